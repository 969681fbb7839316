#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "mobo/pareto.hpp"
#include "mobo/surrogate.hpp"

namespace mobo {

/// Source of joint posterior draws over a pool. Draw ℓ must be a pure function
/// of ℓ so that results do not depend on how draws are scheduled.
class DrawSource {
 public:
  virtual ~DrawSource() = default;
  virtual std::size_t pool_size() const = 0;
  virtual std::size_t num_outputs() const = 0;
  /// Draws [first, first + count), each pool_size × num_outputs.
  virtual std::vector<Eigen::MatrixXd> draws(std::size_t first, std::size_t count) const = 0;
};

/// Draws from a Gaussian posterior (see sample_draw).
class GaussianDraws final : public DrawSource {
 public:
  GaussianDraws(const Posterior& post, std::uint64_t seed, std::uint64_t stream = 0)
      : post_(post), seed_(seed), stream_(stream) {}
  std::size_t pool_size() const override { return post_.pool_size(); }
  std::size_t num_outputs() const override { return post_.num_objectives(); }
  std::vector<Eigen::MatrixXd> draws(std::size_t first, std::size_t count) const override;

 private:
  const Posterior& post_;
  std::uint64_t seed_;
  std::uint64_t stream_;
};

/// Adapts a per-draw callback; used for non-Gaussian (e.g. discrete) posteriors.
class FunctionDraws final : public DrawSource {
 public:
  using Fn = std::function<Eigen::MatrixXd(std::size_t draw)>;
  FunctionDraws(std::size_t pool_size, std::size_t outputs, Fn fn)
      : n_(pool_size), m_(outputs), fn_(std::move(fn)) {}
  std::size_t pool_size() const override { return n_; }
  std::size_t num_outputs() const override { return m_; }
  std::vector<Eigen::MatrixXd> draws(std::size_t first, std::size_t count) const override;

 private:
  std::size_t n_, m_;
  Fn fn_;
};

struct AcquisitionResult {
  /// p̂(x): fraction of draws in which x is the unique attributed HVI maximizer.
  std::vector<double> probs;
  std::vector<std::size_t> counts;
  /// Fraction of draws in which x's sample is on the observed front (see pareto_membership_prob).
  std::vector<double> pareto_membership;
  /// HVI of the posterior mean; last-resort ranking. May be empty.
  std::vector<double> mean_hvi;
  std::vector<std::size_t> selected;
  std::size_t num_draws = 0;
  /// Draws with at least one strictly positive improvement. Equals Σ counts.
  std::size_t improving_draws = 0;
  double improving_fraction = 0.0;
  bool truncated = false;
};

struct BatchSelection {
  std::vector<std::size_t> indices;
  /// Set when fewer than q candidates existed.
  bool truncated = false;
};

/// Monte Carlo qPMHI over arbitrary draws. For every draw, each candidate's
/// HVI against the fixed front is computed and the strict maximizer among
/// positive values (lowest index on exact ties) is credited; draws with no
/// positive improvement credit nobody. When `constraints` is given, a candidate
/// takes part in a draw only if every sampled constraint value is >= its threshold.
AcquisitionResult estimate_qpmhi(const DrawSource& draws, const ParetoFront& front, std::size_t num_draws,
                                 unsigned threads = 1, const DrawSource* constraints = nullptr,
                                 std::span<const double> thresholds = {});

AcquisitionResult estimate_qpmhi(const Posterior& post, const ParetoFront& front, std::size_t num_draws,
                                 std::uint64_t seed, unsigned threads = 1);

/// Per candidate, the fraction of draws whose sampled objective vector strictly
/// dominates the reference point and is not dominated by any observed front point.
std::vector<double> pareto_membership_prob(const DrawSource& draws, const ParetoFront& front,
                                           std::size_t num_draws, unsigned threads = 1);
std::vector<double> pareto_membership_prob(const Posterior& post, const ParetoFront& front,
                                           std::size_t num_draws, std::uint64_t seed, unsigned threads = 1);

/// Top-q by p̂ among candidates with p̂ > 0; remaining slots by Pareto membership
/// (> 0), then by posterior-mean HVI. Ties always go to the lower index.
BatchSelection select_batch(const AcquisitionResult& result, std::size_t q);

/// Single-objective reduction: improvement is max(0, f(x) − best_observed).
AcquisitionResult estimate_qpo(const DrawSource& draws, double best_observed, std::size_t num_draws,
                               unsigned threads = 1);
AcquisitionResult estimate_qpo(const Posterior& post, double best_observed, std::size_t num_draws,
                               std::uint64_t seed, unsigned threads = 1);

/// qPMHI with black-box constraints enforced per draw. Objective draws use the
/// same stream as estimate_qpmhi, so vacuous thresholds reproduce it exactly.
AcquisitionResult constrained_qpmhi(const Posterior& post, const Posterior& constraint_post,
                                    std::span<const double> thresholds, const ParetoFront& front,
                                    std::size_t num_draws, std::uint64_t seed, unsigned threads = 1);

/// Greedy Monte Carlo qEHVI on one shared set of draws: each step adds the
/// candidate with the largest increase in mean joint HVI of the batch.
std::vector<std::size_t> qehvi_mc(const DrawSource& draws, const ParetoFront& front, std::size_t q,
                                  std::size_t num_draws);
std::vector<std::size_t> qehvi_mc(const Posterior& post, const ParetoFront& front, std::size_t q,
                                  std::size_t num_draws, std::uint64_t seed);

/// Sequential Thompson selection with fantasies: step j uses draw j and picks
/// the unselected candidate with the largest HVI against the front plus the
/// fantasized values of earlier picks, falling back to the largest
/// non-domination margin.
std::vector<std::size_t> thompson_hvi(const DrawSource& draws, const ParetoFront& front, std::size_t q);
std::vector<std::size_t> thompson_hvi(const Posterior& post, const ParetoFront& front, std::size_t q,
                                      std::uint64_t seed);

/// Uniform subset without replacement, in draw order.
std::vector<std::size_t> random_select(std::size_t pool_size, std::size_t q, std::uint64_t seed);

/// HVI of each posterior-mean row against the front.
std::vector<double> mean_hvi(const Eigen::MatrixXd& mean, const ParetoFront& front);

/// Per-candidate table: candidate_id,prob,pareto_membership,selected_rank
/// (rank is 1-based, empty when not selected).
std::string acquisition_csv(const AcquisitionResult& result, const std::vector<std::string>& ids);
/// {"improving_fraction":..., "L":..., "seed":...}
nlohmann::json acquisition_summary(const AcquisitionResult& result, std::uint64_t seed);

enum class AcquisitionKind { qpmhi, qehvi_mc, thompson, random, qpo };
std::string to_string(AcquisitionKind k);
AcquisitionKind acquisition_from_string(const std::string& s);

}  // namespace mobo
