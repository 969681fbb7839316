// Independent reference computations used only by the tests. None of these
// call into the library code they are used to check.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Vec = std::vector<double>;

inline bool dominates(const Vec& a, const Vec& b) {
  bool strict = false;
  for (std::size_t m = 0; m < a.size(); ++m) {
    if (a[m] < b[m]) return false;
    if (a[m] > b[m]) strict = true;
  }
  return strict;
}

/// Volume of the union of boxes [ref, p] by inclusion–exclusion over all subsets.
inline double hv_inclusion_exclusion(const std::vector<Vec>& pts, const Vec& ref) {
  const std::size_t n = pts.size();
  double total = 0.0;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    Vec corner(ref.size(), std::numeric_limits<double>::infinity());
    int bits = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(mask >> i & 1)) continue;
      ++bits;
      for (std::size_t m = 0; m < ref.size(); ++m) corner[m] = std::min(corner[m], pts[i][m]);
    }
    double vol = 1.0;
    for (std::size_t m = 0; m < ref.size(); ++m) vol *= std::max(0.0, corner[m] - ref[m]);
    total += (bits % 2 == 1 ? 1.0 : -1.0) * vol;
  }
  return total;
}

struct McEstimate {
  double value;
  double std_error;
};

/// Rejection sampling in the bounding box [ref, max(points)].
inline McEstimate hv_monte_carlo(const std::vector<Vec>& pts, const Vec& ref, std::size_t samples,
                                 std::uint64_t seed) {
  const std::size_t dim = ref.size();
  Vec upper = ref;
  for (const auto& p : pts)
    for (std::size_t m = 0; m < dim; ++m) upper[m] = std::max(upper[m], p[m]);
  double box = 1.0;
  for (std::size_t m = 0; m < dim; ++m) box *= upper[m] - ref[m];
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t hits = 0;
  Vec x(dim);
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t m = 0; m < dim; ++m) x[m] = ref[m] + u(rng) * (upper[m] - ref[m]);
    for (const auto& p : pts) {
      bool inside = true;
      for (std::size_t m = 0; m < dim && inside; ++m) inside = x[m] <= p[m];
      if (inside) {
        ++hits;
        break;
      }
    }
  }
  const double frac = static_cast<double>(hits) / static_cast<double>(samples);
  return {box * frac, box * std::sqrt(frac * (1.0 - frac) / static_cast<double>(samples))};
}

/// Hypervolume improvement of y over pts by inclusion–exclusion (small sets only).
inline double hvi_bruteforce(const Vec& y, const std::vector<Vec>& pts, const Vec& ref) {
  std::vector<Vec> with = pts;
  with.push_back(y);
  return hv_inclusion_exclusion(with, ref) - hv_inclusion_exclusion(pts, ref);
}

/// Discrete per-candidate posterior: candidate i takes atoms[i][a] with probability weights[i][a].
struct DiscretePosterior {
  std::vector<std::vector<Vec>> atoms;
  std::vector<std::vector<double>> weights;
};

/// Calls fn(outcome, probability) for every joint outcome (one atom per candidate).
inline void enumerate_outcomes(const DiscretePosterior& post,
                               const std::function<void(const std::vector<Vec>&, double)>& fn) {
  const std::size_t n = post.atoms.size();
  std::vector<std::size_t> idx(n, 0);
  std::vector<Vec> outcome(n);
  for (;;) {
    double prob = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      outcome[i] = post.atoms[i][idx[i]];
      prob *= post.weights[i][idx[i]];
    }
    fn(outcome, prob);
    std::size_t i = 0;
    while (i < n && ++idx[i] == post.atoms[i].size()) idx[i++] = 0;
    if (i == n) break;
  }
}

/// Exact P(candidate i is the HVI maximizer), crediting the lowest index on ties
/// and nobody when no improvement is positive. `feasible(outcome_index, i)` may
/// exclude candidates in a given outcome.
inline std::vector<double> exact_pmhi(const DiscretePosterior& post, const std::vector<Vec>& front, const Vec& ref,
                                      double* improving_probability = nullptr,
                                      const std::function<bool(const std::vector<Vec>&, std::size_t)>& feasible = {}) {
  const std::size_t n = post.atoms.size();
  std::vector<double> p(n, 0.0);
  double improving = 0.0;
  enumerate_outcomes(post, [&](const std::vector<Vec>& outcome, double prob) {
    double best = 0.0;
    std::size_t winner = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (feasible && !feasible(outcome, i)) continue;
      const double v = hvi_bruteforce(outcome[i], front, ref);
      if (v > best) {
        best = v;
        winner = i;
      }
    }
    if (winner < n) {
      p[winner] += prob;
      improving += prob;
    }
  });
  if (improving_probability) *improving_probability = improving;
  return p;
}

/// Samples one joint outcome of a discrete posterior.
inline std::vector<Vec> sample_outcome(const DiscretePosterior& post, std::mt19937_64& rng) {
  std::vector<Vec> out;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < post.atoms.size(); ++i) {
    double r = u(rng), acc = 0.0;
    std::size_t pick = post.atoms[i].size() - 1;
    for (std::size_t a = 0; a < post.atoms[i].size(); ++a) {
      acc += post.weights[i][a];
      if (r < acc) {
        pick = a;
        break;
      }
    }
    out.push_back(post.atoms[i][pick]);
  }
  return out;
}

/// Best q-subset under an additive score, by exhaustive enumeration. Ties go
/// to the lexicographically smallest index set.
inline std::vector<std::size_t> best_subset(const std::vector<double>& score, std::size_t q) {
  const std::size_t n = score.size();
  std::vector<std::size_t> best;
  double best_sum = -1.0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcountll(mask)) != q) continue;
    double s = 0.0;
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) {
        s += score[i];
        members.push_back(i);
      }
    if (s > best_sum) {
      best_sum = s;
      best = members;
    }
  }
  return best;
}

/// Closed-form GP predictive mean and covariance with an RBF kernel,
/// k*ᵀ(K + σ²I)⁻¹y and K** − k*ᵀ(K + σ²I)⁻¹k*, via explicit matrix inverse.
inline void gp_closed_form(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::MatrixXd& xs,
                           double lengthscale, double variance, double noise, Eigen::VectorXd& mean,
                           Eigen::MatrixXd& cov) {
  auto k = [&](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd out(a.rows(), b.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      for (Eigen::Index j = 0; j < b.rows(); ++j)
        out(i, j) = variance * std::exp(-(a.row(i) - b.row(j)).squaredNorm() / (2.0 * lengthscale * lengthscale));
    return out;
  };
  Eigen::MatrixXd kxx = k(x, x);
  kxx.diagonal().array() += noise;
  const Eigen::MatrixXd inv = kxx.inverse();
  const Eigen::MatrixXd kxs = k(x, xs);
  mean = kxs.transpose() * inv * y;
  cov = k(xs, xs) - kxs.transpose() * inv * kxs;
}

}  // namespace oracle
