#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "mobo/generation.hpp"
#include "mobo/pareto.hpp"

namespace mobo {

/// Ground-truth evaluator. Deterministic per candidate; one call per batch.
class Oracle {
 public:
  virtual ~Oracle() = default;
  virtual std::size_t num_objectives() const = 0;
  virtual std::string name() const = 0;
  virtual std::vector<ObjectiveVector> evaluate(const std::vector<Candidate>& batch) const = 0;
};

/// Synthetic bitstring objectives, all maximized:
///   sphere_pair      negated squared distances of the decoded point to two centres
///   zdt1_discrete    negated ZDT1 objectives of the decoded point
///   linear_tradeoff  (fraction of ones, fraction of zeros)
/// The first two decode the genome into `num_vars` fixed-point reals.
class BuiltinOracle final : public Oracle {
 public:
  BuiltinOracle(std::string name, std::size_t num_vars = 4);
  std::size_t num_objectives() const override { return 2; }
  std::string name() const override { return name_; }
  std::vector<ObjectiveVector> evaluate(const std::vector<Candidate>& batch) const override;
  ObjectiveVector evaluate_genome(const std::string& genome) const;

 private:
  std::string name_;
  std::size_t num_vars_;
};

/// Looks candidates up by key in a labeled pool.
class TableOracle final : public Oracle {
 public:
  explicit TableOracle(const Pool& labeled_pool);
  std::size_t num_objectives() const override { return m_; }
  std::string name() const override { return "table"; }
  std::vector<ObjectiveVector> evaluate(const std::vector<Candidate>& batch) const override;

 private:
  std::size_t m_;
  std::unordered_map<std::string, ObjectiveVector> labels_;
};

/// Runs a command once per batch. Writes one JSON object per candidate,
/// {"id","genome","features"}, to its stdin, closes it, and expects one
/// {"id","objectives"} line per request on stdout (any order) and exit status 0.
class ExternalOracle final : public Oracle {
 public:
  ExternalOracle(std::vector<std::string> argv, std::size_t num_objectives, double timeout_seconds = 300.0);
  std::size_t num_objectives() const override { return m_; }
  std::string name() const override;
  std::vector<ObjectiveVector> evaluate(const std::vector<Candidate>& batch) const override;

 private:
  std::vector<std::string> argv_;
  std::size_t m_;
  double timeout_;
};

/// Builds an oracle from {"kind": "builtin"|"table"|"external", ...}. Table
/// oracles need the labeled pool.
std::unique_ptr<Oracle> make_oracle(const nlohmann::json& spec, std::size_t num_objectives, const Pool* pool);

/// Evaluates a non-empty batch and checks that every result has the right
/// length and finite values. Throws OracleError otherwise.
std::vector<ObjectiveVector> evaluate_oracle(const Oracle& oracle, const std::vector<Candidate>& batch);

}  // namespace mobo
