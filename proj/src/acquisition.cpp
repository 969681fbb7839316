#include "mobo/acquisition.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <queue>

#include "mobo/errors.hpp"
#include "mobo/io.hpp"
#include "mobo/parallel.hpp"
#include "mobo/random.hpp"

namespace mobo {

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
constexpr std::uint64_t kObjectiveStream = 0;
constexpr std::uint64_t kConstraintStream = 1;
constexpr std::uint64_t kRandomStream = 2;

void check_draw_shape(const Eigen::MatrixXd& draw, std::size_t n, std::size_t m) {
  if (static_cast<std::size_t>(draw.rows()) != n || static_cast<std::size_t>(draw.cols()) != m)
    throw InvalidInput("posterior draw has shape " + std::to_string(draw.rows()) + "x" +
                       std::to_string(draw.cols()) + ", expected " + std::to_string(n) + "x" + std::to_string(m));
}

bool on_observed_front(std::span<const double> y, const ParetoFront& front) {
  if (!strictly_dominates(y, front.ref_point())) return false;
  for (const auto& p : front.points())
    if (dominates(p.values, y)) return false;
  return true;
}

// Shared Monte Carlo attribution loop. `improvement(y)` scores one sampled
// objective vector; `member(y)` reports whether it lies on the observed front.
template <typename Improvement, typename Member>
AcquisitionResult attribute_draws(const DrawSource& src, std::size_t num_draws, unsigned threads,
                                  const DrawSource* constraints, std::span<const double> thresholds,
                                  Improvement improvement, Member member) {
  if (num_draws == 0) throw InvalidInput("number of Monte Carlo draws must be at least 1");
  const std::size_t n = src.pool_size();
  const std::size_t dims = src.num_outputs();
  if (n == 0) throw InvalidInput("candidate pool is empty");
  if (constraints) {
    if (constraints->pool_size() != n) throw InvalidInput("constraint posterior covers a different pool");
    if (constraints->num_outputs() != thresholds.size())
      throw InvalidInput("need one threshold per constraint");
  }

  const std::size_t blocks = (num_draws + kDrawBlock - 1) / kDrawBlock;
  std::vector<std::size_t> winners(num_draws, kNone);
  std::vector<std::vector<std::size_t>> member_counts(blocks, std::vector<std::size_t>(n, 0));

  parallel_for(blocks, threads, [&](std::size_t b) {
    const std::size_t first = b * kDrawBlock;
    const std::size_t count = std::min(kDrawBlock, num_draws - first);
    const auto ys = src.draws(first, count);
    std::vector<Eigen::MatrixXd> cs;
    if (constraints) cs = constraints->draws(first, count);
    auto& members = member_counts[b];
    for (std::size_t d = 0; d < count; ++d) {
      check_draw_shape(ys[d], n, dims);
      const Eigen::MatrixXd yt = ys[d].transpose();
      Eigen::MatrixXd ct;
      if (constraints) {
        check_draw_shape(cs[d], n, thresholds.size());
        ct = cs[d].transpose();
      }
      double best = 0.0;
      std::size_t winner = kNone;
      for (std::size_t i = 0; i < n; ++i) {
        const auto col = static_cast<Eigen::Index>(i);
        if (constraints) {
          bool feasible = true;
          for (std::size_t k = 0; k < thresholds.size() && feasible; ++k)
            feasible = ct(static_cast<Eigen::Index>(k), col) >= thresholds[k];
          if (!feasible) continue;
        }
        const std::span<const double> y(yt.col(col).data(), dims);
        const double v = improvement(y);
        if (v > best) {
          best = v;
          winner = i;
        }
        if (member(y)) ++members[i];
      }
      winners[first + d] = winner;
    }
  });

  AcquisitionResult r;
  r.num_draws = num_draws;
  r.counts.assign(n, 0);
  for (std::size_t w : winners) {
    if (w == kNone) continue;
    ++r.counts[w];
    ++r.improving_draws;
  }
  std::vector<std::size_t> total_members(n, 0);
  for (const auto& block : member_counts)
    for (std::size_t i = 0; i < n; ++i) total_members[i] += block[i];
  const auto denom = static_cast<double>(num_draws);
  r.probs.resize(n);
  r.pareto_membership.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    r.probs[i] = static_cast<double>(r.counts[i]) / denom;
    r.pareto_membership[i] = static_cast<double>(total_members[i]) / denom;
  }
  r.improving_fraction = static_cast<double>(r.improving_draws) / denom;
  return r;
}

std::vector<Eigen::MatrixXd> collect_draws(const DrawSource& src, std::size_t num_draws) {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(num_draws);
  for (std::size_t first = 0; first < num_draws; first += kDrawBlock) {
    auto chunk = src.draws(first, std::min(kDrawBlock, num_draws - first));
    for (auto& d : chunk) {
      check_draw_shape(d, src.pool_size(), src.num_outputs());
      out.push_back(d.transpose());
    }
  }
  return out;
}

}  // namespace

std::vector<Eigen::MatrixXd> GaussianDraws::draws(std::size_t first, std::size_t count) const {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(count);
  std::size_t next = first;
  while (next < first + count) {
    const std::size_t block = next / kDrawBlock;
    auto chunk = sample_draw_block(post_, seed_, block, stream_);
    for (std::size_t j = next % kDrawBlock; j < kDrawBlock && next < first + count; ++j, ++next)
      out.push_back(std::move(chunk[j]));
  }
  return out;
}

std::vector<Eigen::MatrixXd> FunctionDraws::draws(std::size_t first, std::size_t count) const {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(fn_(first + i));
  return out;
}

std::vector<double> mean_hvi(const Eigen::MatrixXd& mean, const ParetoFront& front) {
  if (static_cast<std::size_t>(mean.cols()) != front.dim())
    throw InvalidInput("posterior mean has the wrong number of objectives");
  const HviEvaluator eval(front);
  const Eigen::MatrixXd mt = mean.transpose();
  std::vector<double> out(static_cast<std::size_t>(mean.rows()));
  for (Eigen::Index i = 0; i < mean.rows(); ++i)
    out[static_cast<std::size_t>(i)] = eval(std::span<const double>(mt.col(i).data(), front.dim()));
  return out;
}

AcquisitionResult estimate_qpmhi(const DrawSource& draws, const ParetoFront& front, std::size_t num_draws,
                                 unsigned threads, const DrawSource* constraints,
                                 std::span<const double> thresholds) {
  if (draws.num_outputs() != front.dim()) throw InvalidInput("posterior and front disagree on objective count");
  const HviEvaluator eval(front);
  return attribute_draws(
      draws, num_draws, threads, constraints, thresholds, [&](std::span<const double> y) { return eval(y); },
      [&](std::span<const double> y) { return on_observed_front(y, front); });
}

AcquisitionResult estimate_qpmhi(const Posterior& post, const ParetoFront& front, std::size_t num_draws,
                                 std::uint64_t seed, unsigned threads) {
  AcquisitionResult r = estimate_qpmhi(GaussianDraws(post, seed, kObjectiveStream), front, num_draws, threads);
  r.mean_hvi = mean_hvi(post.mean, front);
  return r;
}

std::vector<double> pareto_membership_prob(const DrawSource& draws, const ParetoFront& front,
                                           std::size_t num_draws, unsigned threads) {
  if (draws.num_outputs() != front.dim()) throw InvalidInput("posterior and front disagree on objective count");
  return attribute_draws(
             draws, num_draws, threads, nullptr, {}, [](std::span<const double>) { return 0.0; },
             [&](std::span<const double> y) { return on_observed_front(y, front); })
      .pareto_membership;
}

std::vector<double> pareto_membership_prob(const Posterior& post, const ParetoFront& front,
                                           std::size_t num_draws, std::uint64_t seed, unsigned threads) {
  return pareto_membership_prob(GaussianDraws(post, seed, kObjectiveStream), front, num_draws, threads);
}

BatchSelection select_batch(const AcquisitionResult& result, std::size_t q) {
  if (q == 0) throw InvalidInput("batch size must be at least 1");
  const std::size_t n = result.probs.size();
  if (result.pareto_membership.size() != n || (!result.mean_hvi.empty() && result.mean_hvi.size() != n))
    throw InvalidInput("acquisition result vectors have inconsistent lengths");
  BatchSelection sel;
  sel.truncated = q > n;
  const std::size_t target = std::min(q, n);
  std::vector<char> taken(n, 0);

  auto fill = [&](const std::vector<double>& score, bool positive_only) {
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      const double s = score.empty() ? 0.0 : score[i];
      if (positive_only && !(s > 0.0)) continue;
      order.push_back(i);
    }
    auto value = [&](std::size_t i) { return score.empty() ? 0.0 : score[i]; };
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return value(a) > value(b); });
    for (std::size_t i : order) {
      if (sel.indices.size() >= target) break;
      sel.indices.push_back(i);
      taken[i] = 1;
    }
  };
  fill(result.probs, true);
  if (sel.indices.size() < target) fill(result.pareto_membership, true);
  if (sel.indices.size() < target) fill(result.mean_hvi, false);
  return sel;
}

AcquisitionResult estimate_qpo(const DrawSource& draws, double best_observed, std::size_t num_draws,
                               unsigned threads) {
  if (draws.num_outputs() != 1) throw InvalidInput("qPO needs exactly one objective");
  return attribute_draws(
      draws, num_draws, threads, nullptr, {},
      [best_observed](std::span<const double> y) { return std::max(0.0, y[0] - best_observed); },
      [best_observed](std::span<const double> y) { return y[0] >= best_observed; });
}

AcquisitionResult estimate_qpo(const Posterior& post, double best_observed, std::size_t num_draws,
                               std::uint64_t seed, unsigned threads) {
  AcquisitionResult r = estimate_qpo(GaussianDraws(post, seed, kObjectiveStream), best_observed, num_draws, threads);
  r.mean_hvi.resize(post.pool_size());
  for (std::size_t i = 0; i < post.pool_size(); ++i)
    r.mean_hvi[i] = std::max(0.0, post.mean(static_cast<Eigen::Index>(i), 0) - best_observed);
  return r;
}

AcquisitionResult constrained_qpmhi(const Posterior& post, const Posterior& constraint_post,
                                    std::span<const double> thresholds, const ParetoFront& front,
                                    std::size_t num_draws, std::uint64_t seed, unsigned threads) {
  const GaussianDraws objectives(post, seed, kObjectiveStream);
  const GaussianDraws constraints(constraint_post, seed, kConstraintStream);
  AcquisitionResult r = estimate_qpmhi(objectives, front, num_draws, threads, &constraints, thresholds);
  r.mean_hvi = mean_hvi(post.mean, front);
  return r;
}

std::vector<std::size_t> qehvi_mc(const DrawSource& draws, const ParetoFront& front, std::size_t q,
                                  std::size_t num_draws) {
  if (num_draws == 0) throw InvalidInput("number of Monte Carlo draws must be at least 1");
  if (draws.num_outputs() != front.dim()) throw InvalidInput("posterior and front disagree on objective count");
  const std::size_t n = draws.pool_size();
  const std::size_t dims = front.dim();
  const std::size_t target = std::min(q, n);
  const auto samples = collect_draws(draws, num_draws);  // each M × N
  std::vector<HviEvaluator> fronts(num_draws, HviEvaluator(front));

  auto gain = [&](std::size_t i) {
    double sum = 0.0;
    for (std::size_t l = 0; l < num_draws; ++l)
      sum += fronts[l](std::span<const double>(samples[l].col(static_cast<Eigen::Index>(i)).data(), dims));
    return sum / static_cast<double>(num_draws);
  };

  // Lazy greedy: marginal gains never grow as the batch grows (hypervolume is
  // submodular), so a stale gain is an upper bound on the current one.
  struct Entry {
    double gain;
    std::size_t index;
    std::size_t round;
  };
  auto worse = [](const Entry& a, const Entry& b) {
    return a.gain != b.gain ? a.gain < b.gain : a.index > b.index;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> heap(worse);
  for (std::size_t i = 0; i < n; ++i) heap.push({gain(i), i, 0});

  std::vector<std::size_t> selected;
  selected.reserve(target);
  while (selected.size() < target) {
    Entry top = heap.top();
    heap.pop();
    if (top.round == selected.size()) {
      selected.push_back(top.index);
      for (std::size_t l = 0; l < num_draws; ++l)
        fronts[l].add(std::span<const double>(samples[l].col(static_cast<Eigen::Index>(top.index)).data(), dims));
    } else {
      heap.push({gain(top.index), top.index, selected.size()});
    }
  }
  return selected;
}

std::vector<std::size_t> qehvi_mc(const Posterior& post, const ParetoFront& front, std::size_t q,
                                  std::size_t num_draws, std::uint64_t seed) {
  return qehvi_mc(GaussianDraws(post, seed, kObjectiveStream), front, q, num_draws);
}

std::vector<std::size_t> thompson_hvi(const DrawSource& draws, const ParetoFront& front, std::size_t q) {
  if (draws.num_outputs() != front.dim()) throw InvalidInput("posterior and front disagree on objective count");
  const std::size_t n = draws.pool_size();
  const std::size_t dims = front.dim();
  const std::size_t target = std::min(q, n);
  const auto& ref = front.ref_point();

  HviEvaluator fantasy(front);
  std::vector<ObjectiveVector> incumbents = front.values();
  std::vector<char> taken(n, 0);
  std::vector<std::size_t> selected;
  std::vector<Eigen::MatrixXd> chunk;

  auto margin = [&](std::span<const double> y) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < dims; ++k) m = std::min(m, y[k] - ref[k]);
    for (const auto& p : incumbents) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < dims; ++k) best = std::max(best, y[k] - p[k]);
      m = std::min(m, best);
    }
    return m;
  };

  for (std::size_t j = 0; j < target; ++j) {
    if (j % kDrawBlock == 0) chunk = draws.draws(j, std::min(kDrawBlock, target - j));
    const Eigen::MatrixXd& draw = chunk[j % kDrawBlock];
    check_draw_shape(draw, n, dims);
    const Eigen::MatrixXd yt = draw.transpose();
    auto row = [&](std::size_t i) {
      return std::span<const double>(yt.col(static_cast<Eigen::Index>(i)).data(), dims);
    };

    std::size_t pick = kNone;
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (taken[i]) continue;
      const double v = fantasy(row(i));
      if (v > best) {
        best = v;
        pick = i;
      }
    }
    if (pick == kNone) {
      double best_margin = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n; ++i) {
        if (taken[i]) continue;
        const double m = margin(row(i));
        if (pick == kNone || m > best_margin) {
          best_margin = m;
          pick = i;
        }
      }
    }
    taken[pick] = 1;
    selected.push_back(pick);
    fantasy.add(row(pick));
    incumbents.emplace_back(row(pick).begin(), row(pick).end());
  }
  return selected;
}

std::vector<std::size_t> thompson_hvi(const Posterior& post, const ParetoFront& front, std::size_t q,
                                      std::uint64_t seed) {
  return thompson_hvi(GaussianDraws(post, seed, kObjectiveStream), front, q);
}

std::vector<std::size_t> random_select(std::size_t pool_size, std::size_t q, std::uint64_t seed) {
  std::vector<std::size_t> idx(pool_size);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const std::size_t target = std::min(q, pool_size);
  Rng rng = make_rng(seed, kRandomStream);
  for (std::size_t i = 0; i < target; ++i) std::swap(idx[i], idx[i + uniform_index(rng, pool_size - i)]);
  idx.resize(target);
  return idx;
}

std::string acquisition_csv(const AcquisitionResult& result, const std::vector<std::string>& ids) {
  const std::size_t n = result.probs.size();
  if (ids.size() != n || result.pareto_membership.size() != n)
    throw InvalidInput("acquisition result and id list have different lengths");
  std::vector<std::size_t> rank(n, 0);
  for (std::size_t r = 0; r < result.selected.size(); ++r) {
    if (result.selected[r] >= n) throw InvalidInput("selected index out of range");
    rank[result.selected[r]] = r + 1;
  }
  std::string out = "candidate_id,prob,pareto_membership,selected_rank\n";
  for (std::size_t i = 0; i < n; ++i) {
    out += csv_field(ids[i]) + ',' + format_double(result.probs[i]) + ',' +
           format_double(result.pareto_membership[i]) + ',' + (rank[i] ? std::to_string(rank[i]) : "") + '\n';
  }
  return out;
}

nlohmann::json acquisition_summary(const AcquisitionResult& result, std::uint64_t seed) {
  return {{"improving_fraction", result.improving_fraction}, {"L", result.num_draws}, {"seed", seed}};
}

std::string to_string(AcquisitionKind k) {
  switch (k) {
    case AcquisitionKind::qpmhi: return "qpmhi";
    case AcquisitionKind::qehvi_mc: return "qehvi_mc";
    case AcquisitionKind::thompson: return "thompson";
    case AcquisitionKind::random: return "random";
    case AcquisitionKind::qpo: return "qpo";
  }
  return "unknown";
}

AcquisitionKind acquisition_from_string(const std::string& s) {
  if (s == "qpmhi") return AcquisitionKind::qpmhi;
  if (s == "qehvi_mc" || s == "qehvi") return AcquisitionKind::qehvi_mc;
  if (s == "thompson") return AcquisitionKind::thompson;
  if (s == "random") return AcquisitionKind::random;
  if (s == "qpo") return AcquisitionKind::qpo;
  throw InvalidInput("unknown acquisition '" + s + "' (expected qpmhi, qehvi_mc, thompson, random or qpo)");
}

}  // namespace mobo
