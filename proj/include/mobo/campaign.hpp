#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "mobo/acquisition.hpp"
#include "mobo/generation.hpp"
#include "mobo/io.hpp"
#include "mobo/oracle.hpp"
#include "mobo/pareto.hpp"
#include "mobo/surrogate.hpp"

namespace mobo {

enum class RefPointRule { nadir_of_initial, explicit_point, nadir_minus_epsilon };

struct CampaignConfig {
  std::size_t iterations = 20;  // T
  std::size_t batch_size = 50;  // q
  std::size_t pool_size = 5000; // N; a static pool overrides it with its row count
  std::size_t num_draws = 256;  // L
  std::size_t num_objectives = 2;
  RefPointRule ref_rule = RefPointRule::nadir_minus_epsilon;
  ObjectiveVector ref_point;      // explicit rule only
  std::optional<double> epsilon;  // nadir_minus_epsilon; default 1e-6 · range
  AcquisitionKind acquisition = AcquisitionKind::qpmhi;
  GenomeSpace genome = GenomeSpace::bitstring(32);
  FeaturizerConfig featurizer;
  GpFitConfig surrogate;
  std::optional<GeneratorConfig> generator;
  std::string pool_path;
  /// {"random": k} or {"path": "labeled.csv"}.
  nlohmann::json initial = {{"random", 20}};
  nlohmann::json oracle = {{"kind", "builtin"}, {"name", "sphere_pair"}};
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::string output_dir;

  /// Throws InvalidInput naming the offending field.
  void validate() const;
};

/// Relative paths are resolved against `base_dir`.
CampaignConfig config_from_json(const nlohmann::json& j, const std::string& base_dir = "");
nlohmann::json config_to_json(const CampaignConfig& cfg);
std::string config_hash(const CampaignConfig& cfg);

ObjectiveVector reference_point(const CampaignConfig& cfg, const std::vector<ObjectiveVector>& initial);

struct CampaignState {
  std::vector<Candidate> data;  // D_t, every entry labeled
  ParetoFront front{ObjectiveVector{0.0}};
  std::size_t iteration = 0;
  double hv0 = 0.0;
  MetricRecord baseline;               // iteration 0
  std::vector<MetricRecord> history;   // iterations 1..t
  std::size_t oracle_queries = 0;
  std::size_t reselected = 0;          // batch slots spent on already-labeled candidates
  std::uint64_t seed = 0;
  std::string config_hash;
  std::optional<std::set<std::string>> true_pareto_ids;
};

/// Loaded resources shared by every iteration.
struct CampaignContext {
  CampaignConfig config;
  Featurizer featurizer;
  std::optional<Pool> pool;
  std::unique_ptr<Oracle> oracle;
  std::optional<std::set<std::string>> true_pareto_ids;
};

/// Loads the pool, builds the oracle and, for labeled pools, the true Pareto set.
CampaignContext prepare_campaign(const CampaignConfig& cfg);

/// Ids of the pool rows whose labels no other row dominates.
std::set<std::string> true_pareto_set(const Pool& labeled_pool);

/// Initial sample per cfg.initial, labeled by the oracle where needed.
std::vector<Candidate> initial_data(const CampaignContext& ctx);

/// Builds the front and reference point from labeled initial data.
CampaignState init_campaign(const CampaignConfig& cfg, std::vector<Candidate> initial,
                            std::optional<std::set<std::string>> true_pareto_ids = std::nullopt);

using PosteriorProvider =
    std::function<Posterior(const CampaignState& state, const std::vector<Candidate>& pool)>;

struct RunOptions {
  /// Checked after each iteration; returning true stops the run early.
  std::function<bool(const CampaignState&)> stop;
  /// Replaces the GP fit and predictive step (tests, custom surrogates).
  PosteriorProvider posterior;
  /// Written after every iteration when non-empty.
  std::string checkpoint_path;
  std::string metrics_path;
  std::string front_path;
};

/// Default surrogate: independent GPs fitted on D_t, predicted over the pool.
Posterior gp_posterior(const CampaignConfig& cfg, const CampaignState& state, const std::vector<Candidate>& pool,
                       std::uint64_t fit_seed, std::optional<GpModel>* model_out = nullptr);

struct Acquired {
  std::vector<std::size_t> indices;
  std::optional<AcquisitionResult> result;  // qpmhi and qpo only
};

Acquired acquire(AcquisitionKind kind, const Posterior* post, const ParetoFront& front, std::size_t pool_size,
                 std::size_t q, std::size_t num_draws, std::uint64_t seed, unsigned threads);

/// Acquisition over `pool` exactly as the next iteration would run it, with
/// batch size q and no oracle calls.
Acquired select_next(const CampaignState& state, const CampaignConfig& cfg, const std::vector<Candidate>& pool,
                     std::size_t q);

/// Executes one iteration in place. On failure the state is left unchanged.
void step(CampaignState& state, const CampaignContext& ctx, const RunOptions& opts = {});

/// Runs iterations until cfg.iterations are done or opts.stop fires.
void run(CampaignState& state, const CampaignContext& ctx, const RunOptions& opts = {});

/// Seed used by component `stream` at iteration t.
std::uint64_t iteration_seed(std::uint64_t seed, std::uint64_t stream, std::size_t t);

nlohmann::json checkpoint_to_json(const CampaignState& state, const CampaignConfig& cfg);
/// Restores the state; features are recomputed from genomes with `featurizer`.
CampaignState checkpoint_from_json(const nlohmann::json& j, const Featurizer& featurizer);
/// Reads the config stored in a checkpoint.
CampaignConfig checkpoint_config(const nlohmann::json& j);

/// Metric rows (iterations 1..t) as CSV; `with_baseline` prepends iteration 0.
std::string campaign_metrics_csv(const CampaignState& state, bool with_baseline = false);

/// Builds a Dataset for surrogate fitting from labeled candidates.
Dataset to_dataset(const std::vector<Candidate>& labeled, FeatureKind kind);

}  // namespace mobo
