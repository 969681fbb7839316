#include "mobo/campaign.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <unordered_set>

#include "mobo/errors.hpp"
#include "mobo/log.hpp"
#include "mobo/random.hpp"

namespace mobo {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kFitStream = 0;
constexpr std::uint64_t kGeneratorStream = 1;
constexpr std::uint64_t kAcquisitionStream = 2;
constexpr std::uint64_t kInitialStream = 3;
constexpr int kCheckpointFormat = 1;

const char* rule_name(RefPointRule r) {
  switch (r) {
    case RefPointRule::nadir_of_initial: return "nadir_of_initial";
    case RefPointRule::explicit_point: return "explicit";
    case RefPointRule::nadir_minus_epsilon: return "nadir_minus_epsilon";
  }
  return "";
}

std::string resolve(const std::string& path, const std::string& base) {
  if (path.empty() || base.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(base) / path).lexically_normal().string();
}

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

MetricRecord make_metric(const CampaignState& s, std::size_t iteration, std::vector<std::string> batch) {
  MetricRecord r;
  r.iteration = iteration;
  r.hv = hypervolume(s.front);
  if (s.hv0 > 0.0) r.relative_hvi = relative_hvi(r.hv, s.hv0);
  if (s.true_pareto_ids) {
    std::set<std::string> found;
    for (const auto& c : s.data) found.insert(c.id);
    r.fraction_recovered = fraction_recovered(found, *s.true_pareto_ids);
  }
  r.batch_ids = std::move(batch);
  return r;
}

GpFitConfig fit_config_for(const CampaignConfig& cfg, std::uint64_t seed) {
  GpFitConfig g = cfg.surrogate;
  g.seed = seed;
  return g;
}

nlohmann::json candidate_json(const Candidate& c) {
  return {{"id", c.id}, {"genome", c.genome}, {"objectives", *c.labels}};
}

}  // namespace

void CampaignConfig::validate() const {
  if (iterations == 0) throw InvalidInput("T must be at least 1");
  if (batch_size == 0) throw InvalidInput("q must be at least 1");
  const bool deferred_n = pool_size == 0 && !pool_path.empty();
  if (pool_size == 0 && !deferred_n) throw InvalidInput("N must be at least 1");
  if (num_draws == 0) throw InvalidInput("L must be at least 1");
  if (num_objectives == 0) throw InvalidInput("M must be at least 1");
  if (num_objectives > kMaxExactDimension)
    throw InvalidInput("M = " + std::to_string(num_objectives) + " exceeds the exact hypervolume limit of " +
                       std::to_string(kMaxExactDimension));
  if (!deferred_n && batch_size > pool_size)
    throw InvalidInput("q (" + std::to_string(batch_size) + ") must not exceed N (" + std::to_string(pool_size) + ")");
  if (ref_rule == RefPointRule::explicit_point && ref_point.size() != num_objectives)
    throw InvalidInput("reference_point.point must have M = " + std::to_string(num_objectives) + " components");
  if (epsilon && !(*epsilon >= 0.0)) throw InvalidInput("reference_point.epsilon must be non-negative");
  if (acquisition == AcquisitionKind::qpo && num_objectives != 1) throw InvalidInput("acquisition qpo needs M = 1");
  if (generator.has_value() == !pool_path.empty())
    throw InvalidInput("exactly one of \"pool\" and \"generator\" must be given");
  if (generator) {
    generator->validate();
    if (generator->pool_size != pool_size)
      throw InvalidInput("generator.pool_size (" + std::to_string(generator->pool_size) + ") differs from N (" +
                         std::to_string(pool_size) + ")");
  }
  genome.validate();
  if (!initial.is_object() || (initial.contains("random") == (initial.contains("path") || initial.contains("ids"))) ||
      (initial.contains("path") && initial.contains("ids")))
    throw InvalidInput("initial must contain exactly one of \"random\", \"path\" or \"ids\"");
  if (initial.contains("random") && (!initial["random"].is_number_integer() || initial["random"].get<long long>() < 2))
    throw InvalidInput("initial.random must be an integer of at least 2");
}

CampaignConfig config_from_json(const nlohmann::json& j, const std::string& base_dir) {
  static const std::set<std::string> known = {"T", "q", "N", "L", "M", "reference_point", "acquisition", "genome",
                                              "featurizer", "surrogate", "generator", "pool", "initial", "oracle",
                                              "seed", "threads", "output_dir"};
  if (!j.is_object()) throw InvalidInput("campaign config must be a JSON object");
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw InvalidInput("unknown config field \"" + k + "\"");
  CampaignConfig c;
  try {
    c.iterations = j.value("T", c.iterations);
    c.batch_size = j.value("q", c.batch_size);
    c.num_draws = j.value("L", c.num_draws);
    c.num_objectives = j.value("M", c.num_objectives);
    c.seed = j.value("seed", c.seed);
    c.threads = j.value("threads", c.threads);
    if (c.threads == 0) throw InvalidInput("threads must be at least 1");
    c.acquisition = acquisition_from_string(j.value("acquisition", std::string("qpmhi")));
    if (j.contains("reference_point")) {
      const auto& r = j.at("reference_point");
      const auto rule = r.value("rule", std::string("nadir_minus_epsilon"));
      if (rule == "nadir_of_initial" || rule == "nadir") c.ref_rule = RefPointRule::nadir_of_initial;
      else if (rule == "explicit") c.ref_rule = RefPointRule::explicit_point;
      else if (rule == "nadir_minus_epsilon") c.ref_rule = RefPointRule::nadir_minus_epsilon;
      else throw InvalidInput("reference_point.rule must be nadir_of_initial, explicit or nadir_minus_epsilon");
      if (r.contains("point")) c.ref_point = r.at("point").get<ObjectiveVector>();
      if (r.contains("epsilon") && !r.at("epsilon").is_null()) c.epsilon = r.at("epsilon").get<double>();
    }
    if (j.contains("genome")) c.genome = genome_space_from_json(j.at("genome"));
    if (j.contains("featurizer")) c.featurizer = featurizer_from_json(j.at("featurizer"));
    const bool binary = c.featurizer.kind == FeaturizerKind::bits || c.featurizer.kind == FeaturizerKind::onehot;
    c.surrogate.kernel = binary ? KernelKind::tanimoto : KernelKind::rbf;
    if (j.contains("surrogate")) {
      const auto& s = j.at("surrogate");
      if (s.contains("kernel")) c.surrogate.kernel = kernel_from_string(s.at("kernel").get<std::string>());
      c.surrogate.num_starts = s.value("num_starts", c.surrogate.num_starts);
      c.surrogate.max_fit_points = s.value("max_fit_points", c.surrogate.max_fit_points);
      c.surrogate.nugget = s.value("nugget", c.surrogate.nugget);
      c.surrogate.normalize_outputs = s.value("normalize_outputs", c.surrogate.normalize_outputs);
      if (s.contains("lengthscale") && !s.at("lengthscale").is_null())
        c.surrogate.fixed_lengthscale = s.at("lengthscale").get<double>();
      if (s.contains("signal_variance") && !s.at("signal_variance").is_null())
        c.surrogate.fixed_signal_variance = s.at("signal_variance").get<double>();
    }
    if (j.contains("generator")) {
      c.generator = generator_from_json(j.at("generator"));
      c.pool_size = c.generator->pool_size;
    }
    if (j.contains("N")) {
      c.pool_size = j.at("N").get<std::size_t>();
      if (c.generator && !j.at("generator").contains("pool_size")) c.generator->pool_size = c.pool_size;
    }
    if (j.contains("pool")) {
      const auto& p = j.at("pool");
      c.pool_path = resolve(p.is_string() ? p.get<std::string>() : p.at("path").get<std::string>(), base_dir);
      if (c.pool_path.empty()) throw InvalidInput("pool path is empty");
    }
    if (j.contains("initial")) {
      c.initial = j.at("initial");
      if (c.initial.contains("path"))
        c.initial["path"] = resolve(c.initial["path"].get<std::string>(), base_dir);
    }
    if (j.contains("oracle")) {
      c.oracle = j.at("oracle");
      if (c.oracle.is_object() && c.oracle.value("kind", std::string()) == "external" && c.oracle.contains("command") &&
          c.oracle["command"].is_array() && !c.oracle["command"].empty()) {
        // Paths to scripts next to the config keep working from any directory.
        for (auto& arg : c.oracle["command"]) {
          const auto s = arg.get<std::string>();
          const auto candidate = resolve(s, base_dir);
          if (s.find('/') != std::string::npos && !fs::path(s).is_absolute() && fs::exists(candidate)) arg = candidate;
        }
      }
    }
    c.output_dir = resolve(j.value("output_dir", std::string()), base_dir);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
  if (c.pool_path.empty() && !c.generator) throw InvalidInput("config needs either \"pool\" or \"generator\"");
  // A static pool without an explicit N takes its size from the file.
  if (!c.pool_path.empty() && !j.contains("N")) c.pool_size = 0;
  c.validate();
  return c;
}

nlohmann::json config_to_json(const CampaignConfig& c) {
  nlohmann::json ref = {{"rule", rule_name(c.ref_rule)}};
  if (c.ref_rule == RefPointRule::explicit_point) ref["point"] = c.ref_point;
  ref["epsilon"] = c.epsilon ? nlohmann::json(*c.epsilon) : nlohmann::json(nullptr);
  nlohmann::json surrogate = {{"kernel", to_string(c.surrogate.kernel)},
                              {"num_starts", c.surrogate.num_starts},
                              {"max_fit_points", c.surrogate.max_fit_points},
                              {"nugget", c.surrogate.nugget},
                              {"normalize_outputs", c.surrogate.normalize_outputs},
                              {"lengthscale", c.surrogate.fixed_lengthscale ? nlohmann::json(*c.surrogate.fixed_lengthscale)
                                                                             : nlohmann::json(nullptr)},
                              {"signal_variance", c.surrogate.fixed_signal_variance
                                                      ? nlohmann::json(*c.surrogate.fixed_signal_variance)
                                                      : nlohmann::json(nullptr)}};
  nlohmann::json j = {{"T", c.iterations},
                      {"q", c.batch_size},
                      {"N", c.pool_size},
                      {"L", c.num_draws},
                      {"M", c.num_objectives},
                      {"reference_point", ref},
                      {"acquisition", to_string(c.acquisition)},
                      {"genome", genome_space_to_json(c.genome)},
                      {"featurizer", featurizer_to_json(c.featurizer)},
                      {"surrogate", surrogate},
                      {"initial", c.initial},
                      {"oracle", c.oracle},
                      {"seed", c.seed},
                      {"threads", c.threads},
                      {"output_dir", c.output_dir}};
  if (c.generator) j["generator"] = generator_to_json(*c.generator);
  else j["pool"] = c.pool_path;
  return j;
}

std::string config_hash(const CampaignConfig& cfg) {
  auto j = config_to_json(cfg);
  // Neither affects results.
  j.erase("threads");
  j.erase("output_dir");
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(j.dump())));
  return buf;
}

ObjectiveVector reference_point(const CampaignConfig& cfg, const std::vector<ObjectiveVector>& initial) {
  if (cfg.ref_rule == RefPointRule::explicit_point) return cfg.ref_point;
  ObjectiveVector r = nadir(initial);
  if (cfg.ref_rule == RefPointRule::nadir_of_initial) return r;
  for (std::size_t m = 0; m < r.size(); ++m) {
    double hi = r[m];
    for (const auto& y : initial) hi = std::max(hi, y[m]);
    const double eps = cfg.epsilon ? *cfg.epsilon : (hi > r[m] ? 1e-6 * (hi - r[m]) : 1e-6);
    r[m] -= eps;
  }
  return r;
}

std::set<std::string> true_pareto_set(const Pool& pool) {
  if (!pool.labeled()) throw InvalidInput("the true Pareto set needs a labeled pool");
  std::vector<ObjectiveVector> ys;
  ys.reserve(pool.candidates.size());
  for (const auto& c : pool.candidates) ys.push_back(*c.labels);
  std::set<std::string> ids;
  if (ys.empty()) return ids;
  // Sort by the first objective so each point only needs to be checked
  // against points that could dominate it.
  std::vector<std::size_t> order(ys.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ys[a] > ys[b]; });
  std::vector<std::size_t> kept;
  for (std::size_t i : order) {
    bool dominated = false;
    for (std::size_t k : kept)
      if (dominates(ys[k], ys[i])) {
        dominated = true;
        break;
      }
    if (!dominated) kept.push_back(i);
  }
  for (std::size_t k : kept) ids.insert(pool.candidates[k].id);
  return ids;
}

CampaignContext prepare_campaign(const CampaignConfig& cfg_in) {
  CampaignConfig cfg = cfg_in;
  Featurizer featurizer(cfg.genome, cfg.featurizer);
  std::optional<Pool> pool;
  std::optional<std::set<std::string>> truth;
  if (!cfg.pool_path.empty()) {
    pool = load_pool(cfg.pool_path, featurizer);
    if (pool->candidates.empty()) throw InvalidInput("pool " + cfg.pool_path + " has no candidates");
    if (pool->labeled() && pool->num_objectives != cfg.num_objectives)
      throw InvalidInput("pool has " + std::to_string(pool->num_objectives) + " objective columns but M = " +
                         std::to_string(cfg.num_objectives));
    if (cfg.pool_size != 0 && cfg.pool_size != pool->candidates.size())
      throw InvalidInput("N (" + std::to_string(cfg.pool_size) + ") differs from the " +
                         std::to_string(pool->candidates.size()) + " candidates in " + cfg.pool_path);
    cfg.pool_size = pool->candidates.size();
    if (pool->labeled()) truth = true_pareto_set(*pool);
  }
  cfg.validate();
  auto oracle = make_oracle(cfg.oracle, cfg.num_objectives, pool ? &*pool : nullptr);
  return CampaignContext{std::move(cfg), std::move(featurizer), std::move(pool), std::move(oracle), std::move(truth)};
}

std::vector<Candidate> initial_data(const CampaignContext& ctx) {
  const auto& cfg = ctx.config;
  std::vector<Candidate> chosen;
  if (cfg.initial.contains("path")) {
    auto p = load_pool(cfg.initial["path"].get<std::string>(), ctx.featurizer);
    if (p.labeled() && p.num_objectives != cfg.num_objectives)
      throw InvalidInput("initial data has " + std::to_string(p.num_objectives) + " objectives but M = " +
                         std::to_string(cfg.num_objectives));
    chosen = std::move(p.candidates);
  } else if (cfg.initial.contains("ids")) {
    if (!ctx.pool) throw InvalidInput("initial.ids needs a static pool");
    std::unordered_map<std::string, std::size_t> by_id;
    for (std::size_t i = 0; i < ctx.pool->candidates.size(); ++i) by_id.emplace(ctx.pool->candidates[i].id, i);
    for (const auto& id : cfg.initial["ids"]) {
      const auto it = by_id.find(id.get<std::string>());
      if (it == by_id.end()) throw InvalidInput("initial id " + id.get<std::string>() + " is not in the pool");
      chosen.push_back(ctx.pool->candidates[it->second]);
    }
  } else {
    const auto k = cfg.initial["random"].get<std::size_t>();
    if (ctx.pool) {
      if (k > ctx.pool->candidates.size())
        throw InvalidInput("initial.random (" + std::to_string(k) + ") exceeds the pool size");
      for (std::size_t i : random_select(ctx.pool->candidates.size(), k, iteration_seed(cfg.seed, kInitialStream, 0)))
        chosen.push_back(ctx.pool->candidates[i]);
    } else {
      GeneratorConfig g = *cfg.generator;
      g.pool_size = k;
      g.elite_fraction = 0.0;
      g.random_fraction = 1.0;
      Candidate seed_parent = make_candidate("seed", std::string(cfg.genome.length, cfg.genome.alphabet[0]), ctx.featurizer);
      auto proposal = propose_pool({seed_parent}, ParetoFront(ObjectiveVector(cfg.num_objectives, 0.0)), nullptr,
                                   ctx.featurizer, g, iteration_seed(cfg.seed, kInitialStream, 0));
      chosen = std::move(proposal.candidates);
    }
  }
  std::vector<Candidate> unlabeled;
  std::vector<std::size_t> where;
  for (std::size_t i = 0; i < chosen.size(); ++i) {
    // Static-pool labels are only trusted through the table oracle.
    const bool keep = chosen[i].labels && (cfg.initial.contains("path") || cfg.oracle.value("kind", "") == "table");
    if (!keep) {
      chosen[i].labels.reset();
      unlabeled.push_back(chosen[i]);
      where.push_back(i);
    }
  }
  if (!unlabeled.empty()) {
    const auto ys = evaluate_oracle(*ctx.oracle, unlabeled);
    for (std::size_t k = 0; k < ys.size(); ++k) chosen[where[k]].labels = ys[k];
  }
  return chosen;
}

CampaignState init_campaign(const CampaignConfig& cfg, std::vector<Candidate> initial,
                            std::optional<std::set<std::string>> truth) {
  CampaignState s;
  std::unordered_set<std::string> keys;
  for (auto& c : initial) {
    if (!c.labels) throw InvalidInput("initial candidate " + c.id + " has no objective values");
    if (c.labels->size() != cfg.num_objectives)
      throw InvalidInput("initial candidate " + c.id + " has " + std::to_string(c.labels->size()) +
                         " objectives, expected " + std::to_string(cfg.num_objectives));
    for (double v : *c.labels)
      if (!std::isfinite(v)) throw InvalidInput("initial candidate " + c.id + " has a non-finite objective");
    if (!keys.insert(c.key).second) {
      log::warn("initial data repeats genome of " + c.id + "; keeping the first occurrence");
      continue;
    }
    s.data.push_back(std::move(c));
  }
  if (s.data.size() < 2) throw InvalidInput("initial data needs at least 2 labeled candidates");
  std::vector<ObjectiveVector> ys;
  for (const auto& c : s.data) ys.push_back(*c.labels);
  if (std::all_of(ys.begin(), ys.end(), [&](const ObjectiveVector& y) { return y == ys.front(); }))
    throw DegenerateData("all initial objective vectors are identical");

  s.front = ParetoFront(reference_point(cfg, ys));
  for (const auto& c : s.data) {
    if (!strictly_dominates(*c.labels, s.front.ref_point())) {
      if (cfg.ref_rule == RefPointRule::explicit_point)
        log::warn("initial candidate " + c.id + " does not dominate the reference point and is left off the front");
      continue;
    }
    s.front.insert(*c.labels, c.id);
  }
  s.hv0 = hypervolume(s.front);
  if (!(s.hv0 > 0.0)) log::warn("initial hypervolume is zero; relative HVI will be left empty");
  s.seed = cfg.seed;
  s.config_hash = config_hash(cfg);
  s.true_pareto_ids = std::move(truth);
  s.baseline = make_metric(s, 0, {});
  return s;
}

std::uint64_t iteration_seed(std::uint64_t seed, std::uint64_t stream, std::size_t t) {
  return derive_seed(seed, 100 + stream, t);
}

Dataset to_dataset(const std::vector<Candidate>& labeled, FeatureKind kind) {
  Dataset d;
  d.feature_kind = kind;
  if (labeled.empty()) return d;
  const auto n = static_cast<Eigen::Index>(labeled.size());
  d.features.resize(n, labeled.front().features.size());
  d.objectives.resize(n, static_cast<Eigen::Index>(labeled.front().labels->size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& c = labeled[static_cast<std::size_t>(i)];
    d.ids.push_back(c.id);
    d.features.row(i) = c.features.transpose();
    for (std::size_t m = 0; m < c.labels->size(); ++m) d.objectives(i, static_cast<Eigen::Index>(m)) = (*c.labels)[m];
  }
  return d;
}

Posterior gp_posterior(const CampaignConfig& cfg, const CampaignState& state, const std::vector<Candidate>& pool,
                       std::uint64_t fit_seed, std::optional<GpModel>* model_out) {
  if (pool.empty()) throw InvalidInput("candidate pool is empty");
  const auto kind = cfg.featurizer.kind == FeaturizerKind::bits || cfg.featurizer.kind == FeaturizerKind::onehot
                        ? FeatureKind::binary
                        : FeatureKind::dense_real;
  GpModel model = fit(to_dataset(state.data, kind), fit_config_for(cfg, fit_seed));
  Eigen::MatrixXd x(static_cast<Eigen::Index>(pool.size()), pool.front().features.size());
  std::vector<std::string> ids;
  ids.reserve(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = pool[i].features.transpose();
    ids.push_back(pool[i].id);
  }
  auto post = posterior(model, x, std::move(ids));
  if (model_out) model_out->emplace(std::move(model));
  return post;
}

Acquired acquire(AcquisitionKind kind, const Posterior* post, const ParetoFront& front, std::size_t pool_size,
                 std::size_t q, std::size_t num_draws, std::uint64_t seed, unsigned threads) {
  Acquired a;
  if (kind == AcquisitionKind::random) {
    a.indices = random_select(pool_size, q, seed);
    return a;
  }
  if (!post) throw InvalidInput("acquisition " + to_string(kind) + " needs a posterior");
  if (post->pool_size() != pool_size) throw InvalidInput("posterior does not cover the pool");
  switch (kind) {
    case AcquisitionKind::qpmhi:
    case AcquisitionKind::qpo: {
      AcquisitionResult r;
      if (kind == AcquisitionKind::qpmhi) {
        r = estimate_qpmhi(*post, front, num_draws, seed, threads);
      } else {
        const double best = front.empty() ? front.ref_point()[0] : front.points().back().values[0];
        r = estimate_qpo(*post, best, num_draws, seed, threads);
      }
      const auto sel = select_batch(r, q);
      r.selected = sel.indices;
      r.truncated = sel.truncated;
      a.indices = sel.indices;
      a.result = std::move(r);
      break;
    }
    case AcquisitionKind::qehvi_mc:
      a.indices = qehvi_mc(*post, front, q, num_draws, seed);
      break;
    case AcquisitionKind::thompson:
      a.indices = thompson_hvi(*post, front, q, seed);
      break;
    case AcquisitionKind::random:
      break;
  }
  return a;
}

Acquired select_next(const CampaignState& state, const CampaignConfig& cfg, const std::vector<Candidate>& pool,
                     std::size_t q) {
  if (q == 0 || q > pool.size())
    throw InvalidInput("q (" + std::to_string(q) + ") must be between 1 and the pool size (" +
                       std::to_string(pool.size()) + ")");
  const std::size_t t = state.iteration + 1;
  std::optional<Posterior> post;
  if (cfg.acquisition != AcquisitionKind::random)
    post = gp_posterior(cfg, state, pool, iteration_seed(state.seed, kFitStream, t));
  return acquire(cfg.acquisition, post ? &*post : nullptr, state.front, pool.size(), q, cfg.num_draws,
                 iteration_seed(state.seed, kAcquisitionStream, t), cfg.threads);
}

void step(CampaignState& state, const CampaignContext& ctx, const RunOptions& opts) {
  const auto& cfg = ctx.config;
  const std::size_t t = state.iteration + 1;
  const bool needs_posterior = cfg.acquisition != AcquisitionKind::random;
  const bool generator_needs_model =
      cfg.generator && cfg.generator->parent_selection == ParentSelection::surrogate_weighted;

  std::optional<GpModel> model;
  if (generator_needs_model || (needs_posterior && !opts.posterior))
    model.emplace(fit(to_dataset(state.data, ctx.featurizer.feature_kind()),
                      fit_config_for(cfg, iteration_seed(state.seed, kFitStream, t))));

  std::vector<Candidate> generated;
  if (cfg.generator) {
    auto proposal = propose_pool(state.data, state.front, model ? &*model : nullptr, ctx.featurizer, *cfg.generator,
                                 iteration_seed(state.seed, kGeneratorStream, t));
    log::debug("iteration " + std::to_string(t) + ": generated pool acceptance rate " +
               std::to_string(proposal.stats.acceptance_rate));
    generated = std::move(proposal.candidates);
  }
  const std::vector<Candidate>& pool = cfg.generator ? generated : ctx.pool->candidates;

  std::optional<Posterior> post;
  if (needs_posterior) {
    if (opts.posterior) {
      post = opts.posterior(state, pool);
    } else {
      Eigen::MatrixXd x(static_cast<Eigen::Index>(pool.size()), pool.front().features.size());
      std::vector<std::string> ids;
      ids.reserve(pool.size());
      for (std::size_t i = 0; i < pool.size(); ++i) {
        x.row(static_cast<Eigen::Index>(i)) = pool[i].features.transpose();
        ids.push_back(pool[i].id);
      }
      post = posterior(*model, x, std::move(ids));
    }
  }
  const auto acquired = acquire(cfg.acquisition, post ? &*post : nullptr, state.front, pool.size(), cfg.batch_size,
                                cfg.num_draws, iteration_seed(state.seed, kAcquisitionStream, t), cfg.threads);

  std::unordered_set<std::string> labeled_keys;
  for (const auto& c : state.data) labeled_keys.insert(c.key);
  std::vector<Candidate> queries;
  std::vector<std::string> batch_ids;
  std::size_t reselected = 0;
  for (std::size_t i : acquired.indices) {
    batch_ids.push_back(pool[i].id);
    if (labeled_keys.count(pool[i].key)) {
      ++reselected;
      continue;
    }
    queries.push_back(pool[i]);
    queries.back().labels.reset();
  }
  if (reselected)
    log::info("iteration " + std::to_string(t) + ": " + std::to_string(reselected) +
              " selected candidates were already labeled; their oracle queries are not reallocated");

  std::vector<ObjectiveVector> ys;
  if (!queries.empty()) {
    try {
      ys = evaluate_oracle(*ctx.oracle, queries);
    } catch (const OracleError& e) {
      throw OracleError("iteration " + std::to_string(t) + ": " + e.what(), e.raw_output());
    }
  }

  for (std::size_t k = 0; k < queries.size(); ++k) {
    queries[k].labels = ys[k];
    state.front.insert(ys[k], queries[k].id);
    state.data.push_back(std::move(queries[k]));
  }
  state.oracle_queries += ys.size();
  state.reselected += reselected;
  state.iteration = t;
  state.history.push_back(make_metric(state, t, std::move(batch_ids)));
  const auto& rec = state.history.back();
  log::info("iteration " + std::to_string(t) + ": hv " + format_double(rec.hv) + ", " + std::to_string(ys.size()) +
            " oracle queries");

  if (!opts.metrics_path.empty()) write_file(opts.metrics_path, campaign_metrics_csv(state));
  if (!opts.front_path.empty()) write_file(opts.front_path, front_to_json(state.front).dump(2) + "\n");
  if (!opts.checkpoint_path.empty()) write_file(opts.checkpoint_path, checkpoint_to_json(state, cfg).dump() + "\n");
}

void run(CampaignState& state, const CampaignContext& ctx, const RunOptions& opts) {
  if (state.config_hash != config_hash(ctx.config))
    throw InvalidInput("campaign state was created with a different configuration");
  while (state.iteration < ctx.config.iterations) {
    step(state, ctx, opts);
    if (opts.stop && opts.stop(state)) {
      log::info("stopped after iteration " + std::to_string(state.iteration));
      break;
    }
  }
}

nlohmann::json checkpoint_to_json(const CampaignState& s, const CampaignConfig& cfg) {
  nlohmann::json data = nlohmann::json::array();
  for (const auto& c : s.data) data.push_back(candidate_json(c));
  nlohmann::json history = nlohmann::json::array();
  for (const auto& r : s.history) history.push_back(metric_to_json(r));
  nlohmann::json truth = nullptr;
  if (s.true_pareto_ids) truth = std::vector<std::string>(s.true_pareto_ids->begin(), s.true_pareto_ids->end());
  return {{"format", kCheckpointFormat},
          {"config", config_to_json(cfg)},
          {"config_hash", s.config_hash},
          {"iteration", s.iteration},
          {"rng", {{"seed", s.seed}, {"next_iteration", s.iteration + 1}}},
          {"dataset", data},
          {"front", front_to_json(s.front)},
          {"hv0", s.hv0},
          {"baseline", metric_to_json(s.baseline)},
          {"history", history},
          {"oracle_queries", s.oracle_queries},
          {"reselected", s.reselected},
          {"true_pareto_ids", truth}};
}

CampaignConfig checkpoint_config(const nlohmann::json& j) {
  if (!j.is_object() || j.value("format", 0) != kCheckpointFormat) throw InvalidInput("not a campaign checkpoint");
  return config_from_json(j.at("config"));
}

CampaignState checkpoint_from_json(const nlohmann::json& j, const Featurizer& featurizer) {
  if (!j.is_object() || j.value("format", 0) != kCheckpointFormat) throw InvalidInput("not a campaign checkpoint");
  CampaignState s;
  try {
    s.config_hash = j.at("config_hash").get<std::string>();
    s.iteration = j.at("iteration").get<std::size_t>();
    s.seed = j.at("rng").at("seed").get<std::uint64_t>();
    for (const auto& c : j.at("dataset")) {
      auto cand = make_candidate(c.at("id").get<std::string>(), c.at("genome").get<std::string>(), featurizer);
      cand.labels = c.at("objectives").get<ObjectiveVector>();
      s.data.push_back(std::move(cand));
    }
    s.front = front_from_json(j.at("front"));
    s.hv0 = j.at("hv0").get<double>();
    s.baseline = metric_from_json(j.at("baseline"));
    for (const auto& r : j.at("history")) s.history.push_back(metric_from_json(r));
    s.oracle_queries = j.at("oracle_queries").get<std::size_t>();
    s.reselected = j.at("reselected").get<std::size_t>();
    if (!j.at("true_pareto_ids").is_null()) {
      const auto ids = j.at("true_pareto_ids").get<std::vector<std::string>>();
      s.true_pareto_ids = std::set<std::string>(ids.begin(), ids.end());
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("checkpoint: ") + e.what());
  }
  if (s.history.size() != s.iteration) throw InvalidInput("checkpoint history does not match its iteration count");
  ParetoFront rebuilt(s.front.ref_point());
  for (const auto& c : s.data) rebuilt.insert(*c.labels, c.id);
  if (rebuilt.values() != s.front.values()) throw InvalidInput("checkpoint front does not match its dataset");
  return s;
}

std::string campaign_metrics_csv(const CampaignState& s, bool with_baseline) {
  std::vector<MetricRecord> rows;
  if (with_baseline) rows.push_back(s.baseline);
  rows.insert(rows.end(), s.history.begin(), s.history.end());
  return metrics_csv(rows);
}

}  // namespace mobo
