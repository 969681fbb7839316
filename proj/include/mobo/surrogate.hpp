#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

namespace mobo {

enum class FeatureKind { dense_real, binary };
enum class KernelKind { rbf, tanimoto };

std::string to_string(KernelKind k);
KernelKind kernel_from_string(const std::string& s);

/// Labeled observations: row i of `features` and `objectives` belongs to ids[i].
struct Dataset {
  std::vector<std::string> ids;
  Eigen::MatrixXd features;    // n × d
  Eigen::MatrixXd objectives;  // n × M
  FeatureKind feature_kind = FeatureKind::dense_real;

  std::size_t size() const noexcept { return ids.size(); }
  std::size_t num_objectives() const noexcept { return static_cast<std::size_t>(objectives.cols()); }

  /// Throws InvalidInput on shape mismatch, duplicate ids, or non-finite values.
  void validate() const;
};

struct GpFitConfig {
  KernelKind kernel = KernelKind::rbf;
  int num_starts = 8;
  /// Hyperparameter search runs on a seeded random subset of at most this many
  /// rows; the final model always conditions on every row.
  std::size_t max_fit_points = 256;
  std::uint64_t seed = 0;
  bool normalize_outputs = true;
  double nugget = 1e-6;
  double lengthscale_min = 1e-2, lengthscale_max = 1e3;
  double signal_variance_min = 1e-3, signal_variance_max = 1e3;
  /// Pinned hyperparameters skip the likelihood search for that parameter.
  std::optional<double> fixed_lengthscale;
  std::optional<double> fixed_signal_variance;
};

struct GpHyperparameters {
  KernelKind kernel = KernelKind::rbf;
  double lengthscale = 1.0;  // unused for tanimoto
  double signal_variance = 1.0;
};

double kernel_value(const GpHyperparameters& hp, const Eigen::Ref<const Eigen::VectorXd>& a,
                    const Eigen::Ref<const Eigen::VectorXd>& b);

Eigen::MatrixXd kernel_matrix(const GpHyperparameters& hp, const Eigen::MatrixXd& a,
                              const Eigen::MatrixXd& b);

/// Exact GP regressor for a single objective. Training targets are normalized
/// internally; every prediction is returned in the original units.
class GaussianProcess {
 public:
  GaussianProcess(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                  const GpHyperparameters& hp, double nugget, bool normalize);

  /// Mean (length N) and full covariance (N × N) at the query rows.
  void predict(const Eigen::MatrixXd& query, Eigen::VectorXd& mean, Eigen::MatrixXd& cov) const;

  /// Mean only; skips the covariance.
  Eigen::VectorXd predict_mean(const Eigen::MatrixXd& query) const;

  const GpHyperparameters& hyperparameters() const noexcept { return hp_; }
  /// Nugget actually used after any escalation, relative to the signal variance.
  double nugget() const noexcept { return nugget_; }
  double output_mean() const noexcept { return y_mean_; }
  double output_scale() const noexcept { return y_scale_; }

 private:
  GpHyperparameters hp_;
  double nugget_;
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
  Eigen::MatrixXd x_;
  Eigen::LLT<Eigen::MatrixXd> chol_;
  Eigen::VectorXd alpha_;
};

/// Log marginal likelihood of normalized targets under the given hyperparameters,
/// or -inf when the kernel matrix is not positive definite.
double log_marginal_likelihood(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                               const GpHyperparameters& hp, double nugget);

/// Independent GPs, one per objective.
class GpModel {
 public:
  GpModel(std::vector<GaussianProcess> gps, FeatureKind kind)
      : gps_(std::move(gps)), feature_kind_(kind) {}

  std::size_t num_objectives() const noexcept { return gps_.size(); }
  const GaussianProcess& objective(std::size_t m) const { return gps_.at(m); }
  FeatureKind feature_kind() const noexcept { return feature_kind_; }

  /// Posterior mean of every objective at the query rows (N × M).
  Eigen::MatrixXd predict_mean(const Eigen::MatrixXd& query) const;

  /// [{"objective": m, "kernel": ..., "lengthscale": ..., "signal_variance": ...}, ...]
  nlohmann::json hyperparameters_json() const;

 private:
  std::vector<GaussianProcess> gps_;
  FeatureKind feature_kind_;
};

/// Fits one GP per objective, maximizing the log marginal likelihood by a
/// bounded multi-start search in log space.
GpModel fit(const Dataset& data, const GpFitConfig& config);

/// Joint Gaussian predictive distribution over a pool, one independent block
/// per objective. `factors` caches a square root of each covariance block
/// (see covariance_factor); when empty, sampling factorizes on demand.
struct Posterior {
  std::vector<std::string> pool_ids;
  Eigen::MatrixXd mean;              // N × M
  std::vector<Eigen::MatrixXd> cov;  // M blocks of N × N
  std::vector<Eigen::MatrixXd> factors;
  std::vector<bool> factor_is_lower;

  std::size_t pool_size() const noexcept { return static_cast<std::size_t>(mean.rows()); }
  std::size_t num_objectives() const noexcept { return static_cast<std::size_t>(mean.cols()); }
};

/// Builds a posterior from an explicit mean and covariances, computing the
/// sampling factors. Zero or singular blocks are accepted as long as they are
/// positive semidefinite.
Posterior make_posterior(std::vector<std::string> ids, Eigen::MatrixXd mean,
                         std::vector<Eigen::MatrixXd> cov);

/// Predictive distribution of the model over the pool rows. Covariances are
/// symmetrized and jittered (1e-8, escalated tenfold up to 1e-4) until the
/// Cholesky factorization succeeds.
Posterior posterior(const GpModel& model, const Eigen::MatrixXd& pool_features,
                    std::vector<std::string> pool_ids = {});

/// Factor F with F Fᵀ = cov: the Cholesky factor when cov is positive
/// definite, otherwise a pivoted LDLᵀ square root (not triangular) for
/// semidefinite input. Throws NumericalError for indefinite input.
Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& cov, bool* is_lower = nullptr);

/// Draws are produced in fixed blocks of this many so that every draw is a
/// pure function of (posterior, seed, stream, draw index).
inline constexpr std::size_t kDrawBlock = 16;

/// Draws [block·kDrawBlock, (block+1)·kDrawBlock), each N × M.
std::vector<Eigen::MatrixXd> sample_draw_block(const Posterior& post, std::uint64_t seed,
                                               std::size_t block, std::uint64_t stream = 0);

/// One joint draw (N × M).
Eigen::MatrixXd sample_draw(const Posterior& post, std::uint64_t seed, std::size_t draw,
                            std::uint64_t stream = 0);

/// Draws 0..count-1 of sample_draw.
std::vector<Eigen::MatrixXd> sample_joint(const Posterior& post, std::size_t count, std::uint64_t seed,
                                          unsigned threads = 1, std::uint64_t stream = 0);

}  // namespace mobo
