#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "mobo/pareto.hpp"
#include "mobo/surrogate.hpp"

namespace mobo {

enum class GenomeKind { bitstring, tokens };

/// Bitstrings have exactly `length` characters from {0,1}. Token genomes are
/// strings over `alphabet` (one character per token) with length in
/// [min_length, length].
struct GenomeSpace {
  GenomeKind kind = GenomeKind::bitstring;
  std::size_t length = 32;
  std::size_t min_length = 1;
  std::string alphabet = "01";

  static GenomeSpace bitstring(std::size_t bits);
  static GenomeSpace tokens(std::string alphabet, std::size_t max_length, std::size_t min_length = 1);

  /// Empty when the genome is valid, otherwise the reason it is not.
  std::string check(const std::string& genome) const;
  void validate() const;
};

enum class FeaturizerKind {
  bits,         // one 0/1 feature per bit
  onehot,       // one-hot per token position, zero-padded to the maximum length
  fixed_point,  // bitstring split into equal fields, each read as an unsigned integer scaled to [0,1]
  kgram         // counts of every length-k token string
};

struct FeaturizerConfig {
  FeaturizerKind kind = FeaturizerKind::bits;
  std::size_t num_vars = 4;  // fixed_point
  std::size_t k = 2;         // kgram
};

/// Decodes a bitstring into num_vars reals in [0,1], most significant bit first.
std::vector<double> decode_fixed_point(const std::string& genome, std::size_t num_vars);

class Featurizer {
 public:
  Featurizer(GenomeSpace space, FeaturizerConfig config);

  std::size_t dim() const noexcept { return dim_; }
  FeatureKind feature_kind() const noexcept;
  const GenomeSpace& space() const noexcept { return space_; }
  const FeaturizerConfig& config() const noexcept { return config_; }
  Eigen::VectorXd operator()(const std::string& genome) const;

 private:
  GenomeSpace space_;
  FeaturizerConfig config_;
  std::size_t dim_ = 0;
};

struct Candidate {
  std::string id;
  std::string genome;
  std::string key;
  Eigen::VectorXd features;
  std::optional<ObjectiveVector> labels;
};

/// Canonical dedup key of a genome.
std::string genome_key(const std::string& genome);
/// Stable identifier derived from a key: "c" followed by 16 hex digits.
std::string candidate_id_for(const std::string& key);
Candidate make_candidate(std::string id, std::string genome, const Featurizer& featurizer);

struct Pool {
  std::vector<Candidate> candidates;
  /// Number of objective columns (0 when the file carries no labels).
  std::size_t num_objectives = 0;
  /// Rows dropped because their key repeated an earlier row.
  std::size_t duplicates_dropped = 0;

  bool labeled() const noexcept { return num_objectives > 0; }
};

/// Reads `id,genome[,obj_1..obj_M]`. Keeps the first row of each key in file
/// order. Throws ParseError (with the 1-based line number) on malformed rows
/// and InvalidInput on repeated ids.
Pool load_pool(const std::string& path, const Featurizer& featurizer);
Pool parse_pool(const std::string& text, const Featurizer& featurizer);

std::string pool_to_csv(const Pool& pool);

struct Predicate {
  std::string description;
  std::function<bool(const std::string& genome)> test;
};

/// Builds a predicate from JSON, one of
///   {"type":"symbol_at","position":i,"symbol":"1"}
///   {"type":"count_range","symbol":"1","min":a,"max":b}
///   {"type":"length_range","min":a,"max":b}
///   {"type":"forbid_substring","pattern":"..."}
///   {"type":"require_substring","pattern":"..."}
Predicate predicate_from_json(const nlohmann::json& j);

bool satisfies(const std::string& genome, const std::vector<Predicate>& predicates);

/// Order-preserving subset of the pool passing every predicate.
std::vector<Candidate> filter_constraints(const std::vector<Candidate>& pool, const std::vector<Predicate>& predicates);

enum class Crossover { one_point, uniform };
enum class ParentSelection { uniform, surrogate_weighted };

struct GeneratorConfig {
  std::size_t pool_size = 5000;
  double mutation_rate = 0.05;
  Crossover crossover = Crossover::uniform;
  double elite_fraction = 0.1;
  ParentSelection parent_selection = ParentSelection::uniform;
  double random_fraction = 0.1;
  std::vector<Predicate> predicates;
  nlohmann::json predicate_specs = nlohmann::json::array();
  /// Total proposal attempts allowed, as a multiple of pool_size.
  std::size_t attempt_factor = 50;

  void validate() const;
};

GeneratorConfig generator_from_json(const nlohmann::json& j);
nlohmann::json generator_to_json(const GeneratorConfig& cfg);
GenomeSpace genome_space_from_json(const nlohmann::json& j);
nlohmann::json genome_space_to_json(const GenomeSpace& s);
FeaturizerConfig featurizer_from_json(const nlohmann::json& j);
nlohmann::json featurizer_to_json(const FeaturizerConfig& c);

struct ProposalStats {
  std::size_t elites = 0;
  std::size_t random = 0;
  std::size_t offspring = 0;
  std::size_t attempts = 0;
  std::size_t rejected_by_constraints = 0;
  std::size_t rejected_as_duplicate = 0;
  /// Accepted proposals over attempts (elites excluded).
  double acceptance_rate = 1.0;
};

struct Proposal {
  std::vector<Candidate> candidates;
  ProposalStats stats;
};

/// Builds a pool of exactly cfg.pool_size candidates with distinct keys:
/// non-dominated labeled genomes first (up to elite_fraction), then uniform
/// random genomes (random_fraction), then offspring by parent selection,
/// crossover and per-position mutation. `front` supplies the reference point
/// and incumbents for surrogate-weighted parent selection; `model` may be null.
/// Throws GenerationStarvation when the attempt budget runs out.
Proposal propose_pool(const std::vector<Candidate>& labeled, const ParetoFront& front, const GpModel* model,
                      const Featurizer& featurizer, const GeneratorConfig& cfg, std::uint64_t seed);

/// Parent selection weights, exp of the standardized leave-one-out HVI of each
/// parent's posterior mean. Uniform when every score is equal.
std::vector<double> parent_weights(const std::vector<Candidate>& parents, const ParetoFront& front,
                                   const GpModel& model);

}  // namespace mobo
