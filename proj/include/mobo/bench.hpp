#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "mobo/acquisition.hpp"
#include "mobo/io.hpp"

namespace mobo {

/// Acquisition ablation over a fully labeled pool: every (acquisition, seed)
/// cell runs one campaign with the table oracle. Cells sharing a seed start
/// from the same initial sample.
struct BenchSpec {
  std::string pool_path;
  nlohmann::json genome = {{"kind", "bitstring"}, {"length", 32}};
  nlohmann::json featurizer = nlohmann::json::object();
  nlohmann::json surrogate = nlohmann::json::object();
  nlohmann::json reference_point = nlohmann::json::object();
  std::vector<AcquisitionKind> acquisitions;
  std::vector<std::uint64_t> seeds;
  std::size_t iterations = 20;  // T
  std::size_t batch_size = 100; // q
  std::size_t num_draws = 256;  // L
  std::size_t num_objectives = 2;
  std::size_t initial_size = 20;
  std::optional<std::set<std::string>> true_pareto_ids;  // verified against the pool labels
  std::string output_dir;
  unsigned workers = 1;

  void validate() const;
};

BenchSpec bench_spec_from_json(const nlohmann::json& j, const std::string& base_dir = "");

/// Campaign config of one cell.
nlohmann::json bench_cell_config(const BenchSpec& spec, AcquisitionKind kind, std::uint64_t seed);

struct BenchCell {
  AcquisitionKind acquisition;
  std::uint64_t seed = 0;
  std::vector<MetricRecord> rows;  // iterations 0..T
};

struct AggregateRow {
  AcquisitionKind acquisition;
  std::size_t iteration = 0;
  std::size_t n = 0;
  double hv_mean = 0.0;
  double hv_ci95 = 0.0;
  std::optional<double> fraction_recovered_mean;
  std::optional<double> fraction_recovered_ci95;
};

inline constexpr std::string_view kAggregateCsvHeader =
    "acquisition,iteration,n,hv_mean,hv_ci95,fraction_recovered_mean,fraction_recovered_ci95";

/// Mean and 1.96·sd/√n per acquisition and iteration, in spec order.
std::vector<AggregateRow> aggregate_cells(const std::vector<BenchCell>& cells,
                                          const std::vector<AcquisitionKind>& order);
std::string aggregate_csv(const std::vector<AggregateRow>& rows);

/// Sample mean and normal 95% half-width (sample sd; zero for one value).
std::pair<double, double> mean_ci95(const std::vector<double>& xs);

struct BenchResult {
  std::set<std::string> true_pareto_ids;
  std::vector<BenchCell> cells;  // acquisition-major, seeds in spec order
  std::vector<AggregateRow> aggregate;
};

/// Runs every cell on up to spec.workers threads. When output_dir is set, writes
/// cells/<acquisition>_seed<seed>.csv and aggregate.csv there.
BenchResult run_bench(const BenchSpec& spec);

}  // namespace mobo
