#include "mobo/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <set>

#include "mobo/errors.hpp"
#include "mobo/parallel.hpp"
#include "mobo/random.hpp"

namespace mobo {

namespace {

constexpr double kMaxNugget = 1e-2;
constexpr double kInitialJitter = 1e-8;
constexpr double kMaxJitter = 1e-4;
constexpr int kGoldenIterations = 18;

struct Normalization {
  double mean = 0.0;
  double scale = 1.0;
};

Normalization normalization_of(const Eigen::VectorXd& y, bool normalize) {
  Normalization n;
  if (!normalize || y.size() == 0) return n;
  n.mean = y.mean();
  const double var = (y.array() - n.mean).square().mean();
  n.scale = var > 1e-24 ? std::sqrt(var) : 1.0;
  return n;
}

// Correlation matrix R (kernel with unit signal variance) plus nugget on the diagonal.
Eigen::MatrixXd train_matrix(const GpHyperparameters& hp, const Eigen::MatrixXd& x, double nugget) {
  GpHyperparameters unit = hp;
  unit.signal_variance = 1.0;
  Eigen::MatrixXd a = kernel_matrix(unit, x, x);
  a.diagonal().array() += nugget;
  return a;
}

// Profile log likelihood in which the signal variance takes its closed-form
// optimum yᵀA⁻¹y/n, clamped to the configured bounds (or the pinned value).
struct ProfileResult {
  double lml = -std::numeric_limits<double>::infinity();
  double signal_variance = 1.0;
};

ProfileResult profile_likelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, GpHyperparameters hp,
                                 double nugget, const GpFitConfig& cfg) {
  ProfileResult out;
  const Eigen::MatrixXd a = train_matrix(hp, x, nugget);
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) return out;
  const auto n = static_cast<double>(y.size());
  const double quad = y.dot(llt.solve(y));
  const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  double s2 = cfg.fixed_signal_variance ? *cfg.fixed_signal_variance : quad / n;
  s2 = std::clamp(s2, cfg.signal_variance_min, cfg.signal_variance_max);
  if (cfg.fixed_signal_variance) s2 = *cfg.fixed_signal_variance;
  out.signal_variance = s2;
  out.lml = -0.5 * quad / s2 - 0.5 * (n * std::log(s2) + logdet) - 0.5 * n * std::log(2.0 * std::numbers::pi);
  return out;
}

GpHyperparameters search_hyperparameters(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                         const GpFitConfig& cfg) {
  GpHyperparameters hp;
  hp.kernel = cfg.kernel;
  if (cfg.kernel == KernelKind::tanimoto || cfg.fixed_lengthscale) {
    if (cfg.fixed_lengthscale) hp.lengthscale = *cfg.fixed_lengthscale;
    hp.signal_variance = profile_likelihood(x, y, hp, cfg.nugget, cfg).signal_variance;
    return hp;
  }

  const double lo = std::log(cfg.lengthscale_min);
  const double hi = std::log(cfg.lengthscale_max);
  const int starts = std::max(1, cfg.num_starts);
  const double width = (hi - lo) / starts;

  auto objective = [&](double log_ell) {
    GpHyperparameters trial = hp;
    trial.lengthscale = std::exp(log_ell);
    return profile_likelihood(x, y, trial, cfg.nugget, cfg);
  };

  double best_u = 0.5 * (lo + hi);
  ProfileResult best;
  auto consider = [&](double u, const ProfileResult& r) {
    if (r.lml > best.lml) {
      best = r;
      best_u = u;
    }
  };

  // Golden-section search inside each start's cell of the log-lengthscale range.
  constexpr double kInvPhi = 0.6180339887498949;
  for (int s = 0; s < starts; ++s) {
    double a = lo + s * width;
    double b = a + width;
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    ProfileResult fc = objective(c), fd = objective(d);
    for (int it = 0; it < kGoldenIterations; ++it) {
      if (fc.lml >= fd.lml) {
        b = d;
        d = c;
        fd = fc;
        c = b - kInvPhi * (b - a);
        fc = objective(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + kInvPhi * (b - a);
        fd = objective(d);
      }
    }
    consider(c, fc);
    consider(d, fd);
  }
  if (!std::isfinite(best.lml))
    throw FitFailure("log marginal likelihood is not finite for any lengthscale in the search range");
  hp.lengthscale = std::exp(best_u);
  hp.signal_variance = best.signal_variance;
  return hp;
}

}  // namespace

std::string to_string(KernelKind k) { return k == KernelKind::rbf ? "rbf" : "tanimoto"; }

KernelKind kernel_from_string(const std::string& s) {
  if (s == "rbf") return KernelKind::rbf;
  if (s == "tanimoto") return KernelKind::tanimoto;
  throw InvalidInput("unknown kernel '" + s + "' (expected rbf or tanimoto)");
}

void Dataset::validate() const {
  const auto n = static_cast<Eigen::Index>(ids.size());
  if (features.rows() != n || objectives.rows() != n)
    throw InvalidInput("dataset rows disagree: " + std::to_string(n) + " ids, " +
                       std::to_string(features.rows()) + " feature rows, " +
                       std::to_string(objectives.rows()) + " objective rows");
  if (objectives.cols() < 1) throw InvalidInput("dataset needs at least one objective");
  if (!objectives.allFinite()) throw InvalidInput("dataset objectives must be finite");
  if (!features.allFinite()) throw InvalidInput("dataset features must be finite");
  std::set<std::string> seen;
  for (const auto& id : ids)
    if (!seen.insert(id).second) throw InvalidInput("duplicate candidate id in dataset: " + id);
}

double kernel_value(const GpHyperparameters& hp, const Eigen::Ref<const Eigen::VectorXd>& a,
                    const Eigen::Ref<const Eigen::VectorXd>& b) {
  if (hp.kernel == KernelKind::rbf) {
    const double d2 = (a - b).squaredNorm();
    return hp.signal_variance * std::exp(-0.5 * d2 / (hp.lengthscale * hp.lengthscale));
  }
  const double ab = a.dot(b);
  const double denom = a.squaredNorm() + b.squaredNorm() - ab;
  // Two all-zero fingerprints are identical.
  return hp.signal_variance * (denom > 0.0 ? ab / denom : 1.0);
}

Eigen::MatrixXd kernel_matrix(const GpHyperparameters& hp, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols()) throw InvalidInput("feature dimension mismatch in kernel evaluation");
  const Eigen::Index n = a.rows(), m = b.rows();
  Eigen::MatrixXd k(n, m);
  const Eigen::VectorXd a2 = a.rowwise().squaredNorm();
  const Eigen::VectorXd b2 = b.rowwise().squaredNorm();
  const Eigen::MatrixXd ab = a * b.transpose();
  if (hp.kernel == KernelKind::rbf) {
    const double inv = -0.5 / (hp.lengthscale * hp.lengthscale);
    for (Eigen::Index j = 0; j < m; ++j)
      for (Eigen::Index i = 0; i < n; ++i) {
        const double d2 = std::max(0.0, a2(i) + b2(j) - 2.0 * ab(i, j));
        k(i, j) = hp.signal_variance * std::exp(inv * d2);
      }
  } else {
    for (Eigen::Index j = 0; j < m; ++j)
      for (Eigen::Index i = 0; i < n; ++i) {
        const double denom = a2(i) + b2(j) - ab(i, j);
        k(i, j) = hp.signal_variance * (denom > 0.0 ? ab(i, j) / denom : 1.0);
      }
  }
  return k;
}

GaussianProcess::GaussianProcess(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                                 const GpHyperparameters& hp, double nugget, bool normalize)
    : hp_(hp), nugget_(nugget), x_(features) {
  if (features.rows() != targets.size() || targets.size() == 0)
    throw InvalidInput("GP needs matching, non-empty features and targets");
  if (!(hp.signal_variance > 0.0) || (hp.kernel == KernelKind::rbf && !(hp.lengthscale > 0.0)))
    throw InvalidInput("GP hyperparameters must be positive");
  const Normalization norm = normalization_of(targets, normalize);
  y_mean_ = norm.mean;
  y_scale_ = norm.scale;
  const Eigen::VectorXd y = (targets.array() - y_mean_) / y_scale_;

  Eigen::MatrixXd k = kernel_matrix(hp_, x_, x_);
  for (;;) {
    Eigen::MatrixXd a = k;
    a.diagonal().array() += nugget_ * hp_.signal_variance;
    chol_.compute(a);
    if (chol_.info() == Eigen::Success) break;
    if (nugget_ * 2.0 > kMaxNugget)
      throw FitFailure("kernel matrix is singular even with nugget " + std::to_string(nugget_));
    nugget_ *= 2.0;
  }
  alpha_ = chol_.solve(y);
}

void GaussianProcess::predict(const Eigen::MatrixXd& query, Eigen::VectorXd& mean, Eigen::MatrixXd& cov) const {
  if (query.cols() != x_.cols())
    throw InvalidInput("pool feature dimension " + std::to_string(query.cols()) + " does not match training (" +
                       std::to_string(x_.cols()) + ")");
  const Eigen::MatrixXd ks = kernel_matrix(hp_, x_, query);  // n × N
  mean = ks.transpose() * alpha_;
  const Eigen::MatrixXd v = chol_.matrixL().solve(ks);
  cov = kernel_matrix(hp_, query, query);
  cov.selfadjointView<Eigen::Lower>().rankUpdate(v.transpose(), -1.0);
  cov = cov.selfadjointView<Eigen::Lower>();
  mean = mean.array() * y_scale_ + y_mean_;
  cov *= y_scale_ * y_scale_;
}

Eigen::VectorXd GaussianProcess::predict_mean(const Eigen::MatrixXd& query) const {
  if (query.cols() != x_.cols())
    throw InvalidInput("pool feature dimension " + std::to_string(query.cols()) + " does not match training (" +
                       std::to_string(x_.cols()) + ")");
  const Eigen::VectorXd mean = kernel_matrix(hp_, query, x_) * alpha_;
  return (mean.array() * y_scale_ + y_mean_).matrix();
}

Eigen::MatrixXd GpModel::predict_mean(const Eigen::MatrixXd& query) const {
  Eigen::MatrixXd out(query.rows(), static_cast<Eigen::Index>(gps_.size()));
  for (std::size_t m = 0; m < gps_.size(); ++m) out.col(static_cast<Eigen::Index>(m)) = gps_[m].predict_mean(query);
  return out;
}

double log_marginal_likelihood(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                               const GpHyperparameters& hp, double nugget) {
  Eigen::MatrixXd k = kernel_matrix(hp, features, features);
  k.diagonal().array() += nugget * hp.signal_variance;
  Eigen::LLT<Eigen::MatrixXd> llt(k);
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  const auto n = static_cast<double>(targets.size());
  return -0.5 * targets.dot(llt.solve(targets)) - llt.matrixLLT().diagonal().array().log().sum() -
         0.5 * n * std::log(2.0 * std::numbers::pi);
}

nlohmann::json GpModel::hyperparameters_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (std::size_t m = 0; m < gps_.size(); ++m) {
    const auto& hp = gps_[m].hyperparameters();
    nlohmann::json j;
    j["objective"] = m;
    j["kernel"] = to_string(hp.kernel);
    j["lengthscale"] = hp.kernel == KernelKind::rbf ? nlohmann::json(hp.lengthscale) : nlohmann::json(nullptr);
    j["signal_variance"] = hp.signal_variance;
    out.push_back(std::move(j));
  }
  return out;
}

GpModel fit(const Dataset& data, const GpFitConfig& cfg) {
  data.validate();
  if (data.size() < 2) throw InvalidInput("GP fit needs at least 2 observations");
  if (cfg.num_starts < 1) throw InvalidInput("GP fit needs at least one start");

  // Rows used for the hyperparameter search.
  std::vector<Eigen::Index> rows(data.size());
  std::iota(rows.begin(), rows.end(), Eigen::Index{0});
  if (rows.size() > cfg.max_fit_points && cfg.max_fit_points >= 2) {
    Rng rng = make_rng(cfg.seed, 0x6669);
    for (std::size_t i = 0; i < cfg.max_fit_points; ++i)
      std::swap(rows[i], rows[i + uniform_index(rng, rows.size() - i)]);
    rows.resize(cfg.max_fit_points);
    std::sort(rows.begin(), rows.end());
  }
  Eigen::MatrixXd xs(rows.size(), data.features.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) xs.row(static_cast<Eigen::Index>(i)) = data.features.row(rows[i]);

  std::vector<GaussianProcess> gps;
  gps.reserve(data.num_objectives());
  for (std::size_t m = 0; m < data.num_objectives(); ++m) {
    const Eigen::VectorXd y = data.objectives.col(static_cast<Eigen::Index>(m));
    const Normalization norm = normalization_of(y, cfg.normalize_outputs);
    Eigen::VectorXd ys(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i)
      ys(static_cast<Eigen::Index>(i)) = (y(rows[i]) - norm.mean) / norm.scale;
    const GpHyperparameters hp = search_hyperparameters(xs, ys, cfg);
    gps.emplace_back(data.features, y, hp, cfg.nugget, cfg.normalize_outputs);
  }
  return GpModel(std::move(gps), data.feature_kind);
}

Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& cov, bool* is_lower) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) {
    if (is_lower) *is_lower = true;
    return llt.matrixL();
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
  if (ldlt.info() != Eigen::Success) throw NumericalError("covariance factorization failed");
  Eigen::VectorXd d = ldlt.vectorD();
  const double tol = 1e-12 * std::max(1.0, cov.diagonal().cwiseAbs().maxCoeff());
  if (d.minCoeff() < -tol) throw NumericalError("covariance is not positive semidefinite");
  d = d.cwiseMax(0.0).cwiseSqrt();
  Eigen::MatrixXd l = ldlt.matrixL();
  Eigen::MatrixXd f = ldlt.transpositionsP().transpose() * (l * d.asDiagonal());
  if (is_lower) *is_lower = false;
  return f;
}

Posterior make_posterior(std::vector<std::string> ids, Eigen::MatrixXd mean, std::vector<Eigen::MatrixXd> cov) {
  if (static_cast<Eigen::Index>(cov.size()) != mean.cols())
    throw InvalidInput("posterior needs one covariance block per objective");
  for (const auto& c : cov)
    if (c.rows() != mean.rows() || c.cols() != mean.rows())
      throw InvalidInput("posterior covariance block has the wrong shape");
  if (!ids.empty() && static_cast<Eigen::Index>(ids.size()) != mean.rows())
    throw InvalidInput("posterior ids do not match the pool size");
  Posterior p;
  p.pool_ids = std::move(ids);
  p.mean = std::move(mean);
  p.cov = std::move(cov);
  for (const auto& c : p.cov) {
    bool lower = false;
    p.factors.push_back(covariance_factor(c, &lower));
    p.factor_is_lower.push_back(lower);
  }
  return p;
}

Posterior posterior(const GpModel& model, const Eigen::MatrixXd& pool_features, std::vector<std::string> pool_ids) {
  if (pool_features.rows() == 0) throw InvalidInput("posterior over an empty pool");
  if (!pool_ids.empty() && static_cast<Eigen::Index>(pool_ids.size()) != pool_features.rows())
    throw InvalidInput("pool ids do not match the pool features");
  Posterior p;
  p.pool_ids = std::move(pool_ids);
  const Eigen::Index n = pool_features.rows();
  p.mean.resize(n, static_cast<Eigen::Index>(model.num_objectives()));
  for (std::size_t m = 0; m < model.num_objectives(); ++m) {
    Eigen::VectorXd mu;
    Eigen::MatrixXd c;
    model.objective(m).predict(pool_features, mu, c);
    p.mean.col(static_cast<Eigen::Index>(m)) = mu;
    c = 0.5 * (c + c.transpose());
    double jitter = kInitialJitter;
    for (;;) {
      Eigen::MatrixXd jittered = c;
      jittered.diagonal().array() += jitter;
      Eigen::LLT<Eigen::MatrixXd> llt(jittered);
      if (llt.info() == Eigen::Success) {
        p.factors.emplace_back(llt.matrixL());
        p.factor_is_lower.push_back(true);
        p.cov.push_back(std::move(jittered));
        break;
      }
      if (jitter * 10.0 > kMaxJitter * 1.0000001)
        throw NumericalError("posterior covariance is not positive definite even with jitter " +
                             std::to_string(jitter));
      jitter *= 10.0;
    }
  }
  return p;
}

std::vector<Eigen::MatrixXd> sample_draw_block(const Posterior& post, std::uint64_t seed, std::size_t block,
                                               std::uint64_t stream) {
  const Eigen::Index n = post.mean.rows();
  const Eigen::Index dims = post.mean.cols();
  const auto width = static_cast<Eigen::Index>(kDrawBlock);

  // z for draw ℓ comes from its own generator: objective 0 first, then 1, ...
  std::vector<Eigen::MatrixXd> z(static_cast<std::size_t>(dims), Eigen::MatrixXd(n, width));
  for (Eigen::Index j = 0; j < width; ++j) {
    Rng rng = make_rng(seed, stream, block * kDrawBlock + static_cast<std::size_t>(j));
    std::normal_distribution<double> normal;
    for (Eigen::Index m = 0; m < dims; ++m)
      for (Eigen::Index i = 0; i < n; ++i) z[static_cast<std::size_t>(m)](i, j) = normal(rng);
  }

  std::vector<Eigen::MatrixXd> out(kDrawBlock, Eigen::MatrixXd(n, dims));
  for (Eigen::Index m = 0; m < dims; ++m) {
    const auto mi = static_cast<std::size_t>(m);
    Eigen::MatrixXd f;
    bool lower = false;
    if (mi < post.factors.size()) {
      lower = post.factor_is_lower.at(mi);
    } else {
      f = covariance_factor(post.cov.at(mi), &lower);
    }
    const Eigen::MatrixXd& factor = mi < post.factors.size() ? post.factors[mi] : f;
    Eigen::MatrixXd s = lower ? Eigen::MatrixXd(factor.triangularView<Eigen::Lower>() * z[mi])
                              : Eigen::MatrixXd(factor * z[mi]);
    for (std::size_t j = 0; j < kDrawBlock; ++j)
      out[j].col(m) = post.mean.col(m) + s.col(static_cast<Eigen::Index>(j));
  }
  return out;
}

Eigen::MatrixXd sample_draw(const Posterior& post, std::uint64_t seed, std::size_t draw, std::uint64_t stream) {
  return std::move(sample_draw_block(post, seed, draw / kDrawBlock, stream)[draw % kDrawBlock]);
}

std::vector<Eigen::MatrixXd> sample_joint(const Posterior& post, std::size_t count, std::uint64_t seed,
                                          unsigned threads, std::uint64_t stream) {
  if (count == 0) throw InvalidInput("sample count must be at least 1");
  std::vector<Eigen::MatrixXd> out(count);
  const std::size_t blocks = (count + kDrawBlock - 1) / kDrawBlock;
  parallel_for(blocks, threads, [&](std::size_t b) {
    auto draws = sample_draw_block(post, seed, b, stream);
    for (std::size_t j = 0; j < kDrawBlock && b * kDrawBlock + j < count; ++j)
      out[b * kDrawBlock + j] = std::move(draws[j]);
  });
  return out;
}

}  // namespace mobo
