#include "mobo/generation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "mobo/errors.hpp"
#include "mobo/io.hpp"
#include "mobo/random.hpp"

namespace mobo {

namespace {

constexpr std::uint64_t kRandomGenomeStream = 3;
constexpr std::uint64_t kOffspringStream = 4;

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::size_t ipow(std::size_t base, std::size_t exp) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    if (r > (std::size_t{1} << 24) / std::max<std::size_t>(base, 1))
      throw InvalidInput("k-gram vocabulary too large");
    r *= base;
  }
  return r;
}

double parse_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && *first == ' ') ++first;
  while (last > first && last[-1] == ' ') --last;
  if (first < last && *first == '+') ++first;
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last || first == last)
    throw ParseError("line " + std::to_string(line) + ": '" + s + "' is not a number", line);
  if (!std::isfinite(v)) throw ParseError("line " + std::to_string(line) + ": non-finite objective", line);
  return v;
}

std::string random_genome(const GenomeSpace& space, Rng& rng) {
  std::size_t len = space.length;
  if (space.kind == GenomeKind::tokens)
    len = space.min_length + uniform_index(rng, space.length - space.min_length + 1);
  std::string g(len, '0');
  for (auto& c : g) c = space.alphabet[uniform_index(rng, space.alphabet.size())];
  return g;
}

std::string crossover(const std::string& a, const std::string& b, Crossover kind, const GenomeSpace& space,
                      Rng& rng) {
  if (kind == Crossover::one_point) {
    if (space.kind == GenomeKind::bitstring) {
      if (a.size() < 2) return a;
      const std::size_t cut = 1 + uniform_index(rng, a.size() - 1);
      return a.substr(0, cut) + b.substr(cut);
    }
    const std::size_t ca = uniform_index(rng, a.size() + 1);
    const std::size_t cb = uniform_index(rng, b.size() + 1);
    std::string child = a.substr(0, ca) + b.substr(cb);
    if (child.size() > space.length) child.resize(space.length);
    if (child.size() < space.min_length) return a;
    return child;
  }
  const std::string& shape = (uniform01(rng) < 0.5) ? a : b;
  std::string child = shape;
  for (std::size_t i = 0; i < child.size(); ++i) {
    const bool from_a = uniform01(rng) < 0.5;
    const std::string& src = from_a ? a : b;
    if (i < src.size()) child[i] = src[i];
  }
  return child;
}

void mutate(std::string& g, double rate, const GenomeSpace& space, Rng& rng) {
  if (rate <= 0.0) return;
  const std::size_t symbols = space.alphabet.size();
  for (auto& c : g) {
    if (!(uniform01(rng) < rate)) continue;
    if (space.kind == GenomeKind::bitstring) {
      c = c == '0' ? '1' : '0';
    } else if (symbols > 1) {
      const std::size_t cur = space.alphabet.find(c);
      std::size_t pick = uniform_index(rng, symbols - 1);
      if (pick >= cur) ++pick;
      c = space.alphabet[pick];
    }
  }
}

std::size_t sample_weighted(const std::vector<double>& cumulative, Rng& rng) {
  const double u = uniform01(rng) * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

const char* crossover_name(Crossover c) { return c == Crossover::one_point ? "one_point" : "uniform"; }

}  // namespace

GenomeSpace GenomeSpace::bitstring(std::size_t bits) {
  GenomeSpace s;
  s.kind = GenomeKind::bitstring;
  s.length = bits;
  s.min_length = bits;
  s.alphabet = "01";
  s.validate();
  return s;
}

GenomeSpace GenomeSpace::tokens(std::string alphabet, std::size_t max_length, std::size_t min_length) {
  GenomeSpace s;
  s.kind = GenomeKind::tokens;
  s.alphabet = std::move(alphabet);
  s.length = max_length;
  s.min_length = min_length;
  s.validate();
  return s;
}

void GenomeSpace::validate() const {
  if (length == 0) throw InvalidInput("genome length must be at least 1");
  if (kind == GenomeKind::bitstring) {
    if (alphabet != "01") throw InvalidInput("bitstring genomes use the alphabet \"01\"");
    return;
  }
  if (alphabet.empty()) throw InvalidInput("token alphabet is empty");
  if (min_length == 0 || min_length > length) throw InvalidInput("token genome min_length must be in [1, length]");
  std::string sorted = alphabet;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw InvalidInput("token alphabet has repeated symbols");
  for (char c : alphabet)
    if (std::isspace(static_cast<unsigned char>(c)) || c == ',' || c == '"')
      throw InvalidInput("token alphabet may not contain whitespace, commas or quotes");
}

std::string GenomeSpace::check(const std::string& genome) const {
  if (kind == GenomeKind::bitstring) {
    if (genome.size() != length)
      return "bitstring has length " + std::to_string(genome.size()) + ", expected " + std::to_string(length);
    for (std::size_t i = 0; i < genome.size(); ++i)
      if (genome[i] != '0' && genome[i] != '1')
        return std::string("non-binary character '") + genome[i] + "' at position " + std::to_string(i);
    return {};
  }
  if (genome.size() < min_length || genome.size() > length)
    return "token genome length " + std::to_string(genome.size()) + " outside [" + std::to_string(min_length) + ", " +
           std::to_string(length) + "]";
  for (std::size_t i = 0; i < genome.size(); ++i)
    if (alphabet.find(genome[i]) == std::string::npos)
      return std::string("symbol '") + genome[i] + "' at position " + std::to_string(i) + " is not in the alphabet";
  return {};
}

std::vector<double> decode_fixed_point(const std::string& genome, std::size_t num_vars) {
  if (num_vars == 0 || genome.size() % num_vars != 0)
    throw InvalidInput("bitstring of length " + std::to_string(genome.size()) + " cannot be split into " +
                       std::to_string(num_vars) + " equal fields");
  const std::size_t width = genome.size() / num_vars;
  if (width > 52) throw InvalidInput("fixed-point fields wider than 52 bits lose precision");
  const double scale = std::ldexp(1.0, static_cast<int>(width)) - 1.0;
  std::vector<double> out(num_vars);
  for (std::size_t v = 0; v < num_vars; ++v) {
    std::uint64_t x = 0;
    for (std::size_t b = 0; b < width; ++b) {
      const char c = genome[v * width + b];
      if (c != '0' && c != '1') throw InvalidInput("fixed-point decoding needs a bitstring");
      x = (x << 1) | static_cast<std::uint64_t>(c == '1');
    }
    out[v] = static_cast<double>(x) / scale;
  }
  return out;
}

Featurizer::Featurizer(GenomeSpace space, FeaturizerConfig config) : space_(std::move(space)), config_(config) {
  space_.validate();
  switch (config_.kind) {
    case FeaturizerKind::bits:
      if (space_.kind != GenomeKind::bitstring) throw InvalidInput("the bits featurizer needs bitstring genomes");
      dim_ = space_.length;
      break;
    case FeaturizerKind::onehot:
      dim_ = space_.length * space_.alphabet.size();
      break;
    case FeaturizerKind::fixed_point:
      if (space_.kind != GenomeKind::bitstring)
        throw InvalidInput("the fixed_point featurizer needs bitstring genomes");
      if (config_.num_vars == 0 || space_.length % config_.num_vars != 0)
        throw InvalidInput("fixed_point num_vars must divide the genome length");
      dim_ = config_.num_vars;
      break;
    case FeaturizerKind::kgram:
      if (config_.k == 0) throw InvalidInput("k-gram length must be at least 1");
      dim_ = ipow(space_.alphabet.size(), config_.k);
      break;
  }
}

FeatureKind Featurizer::feature_kind() const noexcept {
  return config_.kind == FeaturizerKind::bits || config_.kind == FeaturizerKind::onehot ? FeatureKind::binary
                                                                                         : FeatureKind::dense_real;
}

Eigen::VectorXd Featurizer::operator()(const std::string& genome) const {
  if (const auto why = space_.check(genome); !why.empty()) throw InvalidInput("invalid genome: " + why);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim_));
  switch (config_.kind) {
    case FeaturizerKind::bits:
      for (std::size_t i = 0; i < genome.size(); ++i) f(static_cast<Eigen::Index>(i)) = genome[i] == '1';
      break;
    case FeaturizerKind::onehot:
      for (std::size_t i = 0; i < genome.size(); ++i)
        f(static_cast<Eigen::Index>(i * space_.alphabet.size() + space_.alphabet.find(genome[i]))) = 1.0;
      break;
    case FeaturizerKind::fixed_point: {
      const auto x = decode_fixed_point(genome, config_.num_vars);
      for (std::size_t i = 0; i < x.size(); ++i) f(static_cast<Eigen::Index>(i)) = x[i];
      break;
    }
    case FeaturizerKind::kgram: {
      const std::size_t a = space_.alphabet.size();
      for (std::size_t i = 0; i + config_.k <= genome.size(); ++i) {
        std::size_t code = 0;
        for (std::size_t j = 0; j < config_.k; ++j) code = code * a + space_.alphabet.find(genome[i + j]);
        f(static_cast<Eigen::Index>(code)) += 1.0;
      }
      break;
    }
  }
  return f;
}

std::string genome_key(const std::string& genome) { return genome; }

std::string candidate_id_for(const std::string& key) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "c%016llx", static_cast<unsigned long long>(fnv1a64(key)));
  return buf;
}

Candidate make_candidate(std::string id, std::string genome, const Featurizer& featurizer) {
  Candidate c;
  c.features = featurizer(genome);
  c.key = genome_key(genome);
  c.id = id.empty() ? candidate_id_for(c.key) : std::move(id);
  c.genome = std::move(genome);
  return c;
}

Pool parse_pool(const std::string& text, const Featurizer& featurizer) {
  Pool pool;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::size_t columns = 0;
  std::unordered_set<std::string> ids, keys;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    try {
      fields = split_csv_line(line);
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what(), lineno);
    }
    if (columns == 0) {
      if (fields.size() < 2 || fields[0] != "id" || fields[1] != "genome")
        throw ParseError("line " + std::to_string(lineno) + ": header must start with id,genome", lineno);
      for (std::size_t m = 2; m < fields.size(); ++m)
        if (fields[m] != "obj_" + std::to_string(m - 1))
          throw ParseError("line " + std::to_string(lineno) + ": expected column obj_" + std::to_string(m - 1) +
                               ", found '" + fields[m] + "'",
                           lineno);
      columns = fields.size();
      pool.num_objectives = columns - 2;
      continue;
    }
    if (fields.size() != columns)
      throw ParseError("line " + std::to_string(lineno) + ": expected " + std::to_string(columns) + " fields, found " +
                           std::to_string(fields.size()),
                       lineno);
    if (fields[0].empty()) throw ParseError("line " + std::to_string(lineno) + ": empty id", lineno);
    if (const auto why = featurizer.space().check(fields[1]); !why.empty())
      throw ParseError("line " + std::to_string(lineno) + " (id " + fields[0] + "): " + why, lineno);
    if (!ids.insert(fields[0]).second)
      throw InvalidInput("line " + std::to_string(lineno) + ": duplicate id '" + fields[0] + "'");
    ObjectiveVector labels;
    for (std::size_t m = 2; m < columns; ++m) labels.push_back(parse_double(fields[m], lineno));
    if (!keys.insert(genome_key(fields[1])).second) {
      ++pool.duplicates_dropped;
      continue;
    }
    Candidate c = make_candidate(fields[0], fields[1], featurizer);
    if (pool.labeled()) c.labels = std::move(labels);
    pool.candidates.push_back(std::move(c));
  }
  return pool;
}

Pool load_pool(const std::string& path, const Featurizer& featurizer) {
  return parse_pool(read_file(path), featurizer);
}

std::string pool_to_csv(const Pool& pool) {
  std::string out = "id,genome";
  for (std::size_t m = 0; m < pool.num_objectives; ++m) out += ",obj_" + std::to_string(m + 1);
  out += '\n';
  for (const auto& c : pool.candidates) {
    out += csv_field(c.id) + ',' + csv_field(c.genome);
    if (pool.labeled()) {
      if (!c.labels || c.labels->size() != pool.num_objectives)
        throw InvalidInput("candidate " + c.id + " is missing labels");
      for (double v : *c.labels) out += ',' + format_double(v);
    }
    out += '\n';
  }
  return out;
}

Predicate predicate_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("type")) throw InvalidInput("constraint needs a \"type\" field");
  const std::string type = j.at("type").get<std::string>();
  try {
    if (type == "symbol_at") {
      const auto pos = j.at("position").get<std::size_t>();
      const auto sym = j.at("symbol").get<std::string>();
      if (sym.size() != 1) throw InvalidInput("symbol_at needs a single-character symbol");
      return {"symbol " + sym + " at position " + std::to_string(pos),
              [pos, c = sym[0]](const std::string& g) { return pos < g.size() && g[pos] == c; }};
    }
    if (type == "count_range") {
      const auto sym = j.at("symbol").get<std::string>();
      if (sym.size() != 1) throw InvalidInput("count_range needs a single-character symbol");
      const auto lo = j.value("min", std::size_t{0});
      const auto hi = j.value("max", std::numeric_limits<std::size_t>::max());
      return {"count of " + sym + " in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]",
              [c = sym[0], lo, hi](const std::string& g) {
                const auto n = static_cast<std::size_t>(std::count(g.begin(), g.end(), c));
                return n >= lo && n <= hi;
              }};
    }
    if (type == "length_range") {
      const auto lo = j.value("min", std::size_t{0});
      const auto hi = j.value("max", std::numeric_limits<std::size_t>::max());
      return {"length in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]",
              [lo, hi](const std::string& g) { return g.size() >= lo && g.size() <= hi; }};
    }
    if (type == "forbid_substring" || type == "require_substring") {
      const auto pat = j.at("pattern").get<std::string>();
      const bool want = type == "require_substring";
      return {(want ? "contains " : "does not contain ") + pat,
              [pat, want](const std::string& g) { return (g.find(pat) != std::string::npos) == want; }};
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput("constraint '" + type + "': " + e.what());
  }
  throw InvalidInput("unknown constraint type '" + type + "'");
}

bool satisfies(const std::string& genome, const std::vector<Predicate>& predicates) {
  for (const auto& p : predicates)
    if (!p.test(genome)) return false;
  return true;
}

std::vector<Candidate> filter_constraints(const std::vector<Candidate>& pool,
                                          const std::vector<Predicate>& predicates) {
  std::vector<Candidate> out;
  for (const auto& c : pool)
    if (satisfies(c.genome, predicates)) out.push_back(c);
  return out;
}

void GeneratorConfig::validate() const {
  if (pool_size == 0) throw InvalidInput("generator.pool_size must be at least 1");
  if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0)) throw InvalidInput("generator.mutation_rate must be in [0, 1]");
  if (!(elite_fraction >= 0.0 && elite_fraction <= 1.0))
    throw InvalidInput("generator.elite_fraction must be in [0, 1]");
  if (!(random_fraction >= 0.0 && random_fraction <= 1.0))
    throw InvalidInput("generator.random_fraction must be in [0, 1]");
  if (elite_fraction + random_fraction > 1.0 + 1e-12)
    throw InvalidInput("generator.elite_fraction + random_fraction must not exceed 1");
  if (attempt_factor == 0) throw InvalidInput("generator.attempt_factor must be at least 1");
}

GeneratorConfig generator_from_json(const nlohmann::json& j) {
  GeneratorConfig c;
  try {
    c.pool_size = j.value("pool_size", c.pool_size);
    c.mutation_rate = j.value("mutation_rate", c.mutation_rate);
    const auto cross = j.value("crossover", std::string(crossover_name(c.crossover)));
    if (cross == "one_point") c.crossover = Crossover::one_point;
    else if (cross == "uniform") c.crossover = Crossover::uniform;
    else throw InvalidInput("generator.crossover must be one_point or uniform");
    c.elite_fraction = j.value("elite_fraction", c.elite_fraction);
    c.random_fraction = j.value("random_fraction", c.random_fraction);
    const auto sel = j.value("parent_selection", std::string("uniform"));
    if (sel == "uniform") c.parent_selection = ParentSelection::uniform;
    else if (sel == "surrogate_weighted") c.parent_selection = ParentSelection::surrogate_weighted;
    else throw InvalidInput("generator.parent_selection must be uniform or surrogate_weighted");
    c.attempt_factor = j.value("attempt_factor", c.attempt_factor);
    if (j.contains("constraints")) {
      c.predicate_specs = j.at("constraints");
      for (const auto& p : c.predicate_specs) c.predicates.push_back(predicate_from_json(p));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("generator: ") + e.what());
  }
  c.validate();
  return c;
}

nlohmann::json generator_to_json(const GeneratorConfig& c) {
  return {{"pool_size", c.pool_size},
          {"mutation_rate", c.mutation_rate},
          {"crossover", crossover_name(c.crossover)},
          {"elite_fraction", c.elite_fraction},
          {"random_fraction", c.random_fraction},
          {"parent_selection", c.parent_selection == ParentSelection::uniform ? "uniform" : "surrogate_weighted"},
          {"attempt_factor", c.attempt_factor},
          {"constraints", c.predicate_specs}};
}

GenomeSpace genome_space_from_json(const nlohmann::json& j) {
  try {
    const auto kind = j.value("kind", std::string("bitstring"));
    if (kind == "bitstring") return GenomeSpace::bitstring(j.at("length").get<std::size_t>());
    if (kind == "tokens")
      return GenomeSpace::tokens(j.at("alphabet").get<std::string>(), j.at("length").get<std::size_t>(),
                                 j.value("min_length", std::size_t{1}));
    throw InvalidInput("genome.kind must be bitstring or tokens");
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("genome: ") + e.what());
  }
}

nlohmann::json genome_space_to_json(const GenomeSpace& s) {
  if (s.kind == GenomeKind::bitstring) return {{"kind", "bitstring"}, {"length", s.length}};
  return {{"kind", "tokens"}, {"alphabet", s.alphabet}, {"length", s.length}, {"min_length", s.min_length}};
}

FeaturizerConfig featurizer_from_json(const nlohmann::json& j) {
  FeaturizerConfig c;
  const auto kind = j.value("kind", std::string("bits"));
  if (kind == "bits") c.kind = FeaturizerKind::bits;
  else if (kind == "onehot") c.kind = FeaturizerKind::onehot;
  else if (kind == "fixed_point") c.kind = FeaturizerKind::fixed_point;
  else if (kind == "kgram") c.kind = FeaturizerKind::kgram;
  else throw InvalidInput("featurizer.kind must be bits, onehot, fixed_point or kgram");
  c.num_vars = j.value("num_vars", c.num_vars);
  c.k = j.value("k", c.k);
  return c;
}

nlohmann::json featurizer_to_json(const FeaturizerConfig& c) {
  static const char* names[] = {"bits", "onehot", "fixed_point", "kgram"};
  return {{"kind", names[static_cast<int>(c.kind)]}, {"num_vars", c.num_vars}, {"k", c.k}};
}

std::vector<double> parent_weights(const std::vector<Candidate>& parents, const ParetoFront& front,
                                   const GpModel& model) {
  const std::size_t n = parents.size();
  if (n == 0) return {};
  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), parents.front().features.size());
  for (std::size_t i = 0; i < n; ++i) x.row(static_cast<Eigen::Index>(i)) = parents[i].features.transpose();
  const Eigen::MatrixXd mean = model.predict_mean(x);
  if (static_cast<std::size_t>(mean.cols()) != front.dim())
    throw InvalidInput("surrogate and front disagree on objective count");

  std::unordered_map<std::string, std::size_t> front_index;
  for (std::size_t k = 0; k < front.size(); ++k)
    if (front.points()[k].id) front_index.emplace(*front.points()[k].id, k);
  const HviEvaluator full(front);
  std::vector<double> score(n);
  std::vector<double> y(front.dim());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t m = 0; m < y.size(); ++m) y[m] = mean(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m));
    const auto it = front_index.find(parents[i].id);
    if (it == front_index.end()) {
      score[i] = full(y);
    } else {
      auto others = front.values();
      others.erase(others.begin() + static_cast<std::ptrdiff_t>(it->second));
      score[i] = HviEvaluator(others, front.ref_point())(y);
    }
  }
  double mu = 0.0;
  for (double s : score) mu += s;
  mu /= static_cast<double>(n);
  double var = 0.0;
  for (double s : score) var += (s - mu) * (s - mu);
  const double sd = std::sqrt(var / static_cast<double>(n));
  std::vector<double> w(n, 1.0);
  if (sd > 0.0 && std::isfinite(sd))
    for (std::size_t i = 0; i < n; ++i) w[i] = std::exp((score[i] - mu) / sd);
  return w;
}

Proposal propose_pool(const std::vector<Candidate>& labeled, const ParetoFront& front, const GpModel* model,
                      const Featurizer& featurizer, const GeneratorConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (labeled.empty()) throw InvalidInput("pool generation needs at least one labeled genome");
  const GenomeSpace& space = featurizer.space();
  const std::size_t n = cfg.pool_size;
  const std::size_t budget = cfg.attempt_factor * n;

  Proposal out;
  auto& st = out.stats;
  std::unordered_set<std::string> keys;
  auto accept = [&](std::string genome) {
    if (!satisfies(genome, cfg.predicates)) {
      ++st.rejected_by_constraints;
      return false;
    }
    const std::string key = genome_key(genome);
    if (keys.count(key)) {
      ++st.rejected_as_duplicate;
      return false;
    }
    keys.insert(key);
    out.candidates.push_back(make_candidate({}, std::move(genome), featurizer));
    return true;
  };
  auto starve = [&](const char* phase) {
    st.acceptance_rate = st.attempts ? static_cast<double>(st.random + st.offspring) / static_cast<double>(st.attempts)
                                     : 0.0;
    char rate[32];
    std::snprintf(rate, sizeof(rate), "%.4g", st.acceptance_rate);
    throw GenerationStarvation(std::string("pool generation stalled during ") + phase + " after " +
                                   std::to_string(st.attempts) + " attempts with " +
                                   std::to_string(out.candidates.size()) + " of " + std::to_string(n) +
                                   " candidates (acceptance rate " + rate + ")",
                               st.acceptance_rate);
  };

  // Elites: labeled genomes whose labels are non-dominated, in dataset order.
  const auto n_elite = static_cast<std::size_t>(std::floor(cfg.elite_fraction * static_cast<double>(n) + 1e-9));
  if (n_elite > 0) {
    std::vector<ObjectiveVector> ys;
    std::vector<std::size_t> with_labels;
    for (std::size_t i = 0; i < labeled.size(); ++i)
      if (labeled[i].labels) {
        ys.push_back(*labeled[i].labels);
        with_labels.push_back(i);
      }
    for (std::size_t k : non_dominated_indices(ys)) {
      if (st.elites >= n_elite) break;
      if (accept(labeled[with_labels[k]].genome)) ++st.elites;
    }
  }

  const auto n_random = std::min(
      n - out.candidates.size(), static_cast<std::size_t>(std::floor(cfg.random_fraction * static_cast<double>(n) + 1e-9)));
  for (std::size_t target = out.candidates.size() + n_random; out.candidates.size() < target;) {
    if (st.attempts >= budget) starve("random sampling");
    Rng rng = make_rng(seed, kRandomGenomeStream, st.attempts++);
    if (accept(random_genome(space, rng))) ++st.random;
  }

  if (out.candidates.size() < n) {
    std::vector<double> cumulative(labeled.size());
    std::vector<double> w(labeled.size(), 1.0);
    if (cfg.parent_selection == ParentSelection::surrogate_weighted && model) w = parent_weights(labeled, front, *model);
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) cumulative[i] = (acc += w[i]);
    while (out.candidates.size() < n) {
      if (st.attempts >= budget) starve("offspring generation");
      Rng rng = make_rng(seed, kOffspringStream, st.attempts++);
      const auto& a = labeled[sample_weighted(cumulative, rng)].genome;
      const auto& b = labeled[sample_weighted(cumulative, rng)].genome;
      std::string child = crossover(a, b, cfg.crossover, space, rng);
      mutate(child, cfg.mutation_rate, space, rng);
      if (accept(std::move(child))) ++st.offspring;
    }
  }
  st.acceptance_rate =
      st.attempts ? static_cast<double>(st.random + st.offspring) / static_cast<double>(st.attempts) : 1.0;
  return out;
}

}  // namespace mobo
