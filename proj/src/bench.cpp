#include "mobo/bench.hpp"

#include <cmath>
#include <filesystem>
#include <map>

#include "mobo/campaign.hpp"
#include "mobo/errors.hpp"
#include "mobo/log.hpp"
#include "mobo/parallel.hpp"

namespace mobo {

namespace fs = std::filesystem;

namespace {

std::string resolve(const std::string& path, const std::string& base) {
  if (path.empty() || base.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(base) / path).lexically_normal().string();
}

std::string opt_field(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace

void BenchSpec::validate() const {
  if (pool_path.empty()) throw InvalidInput("pool is required");
  if (acquisitions.empty()) throw InvalidInput("acquisitions must list at least one acquisition");
  if (seeds.empty()) throw InvalidInput("seeds must list at least one seed");
  if (std::set<AcquisitionKind>(acquisitions.begin(), acquisitions.end()).size() != acquisitions.size())
    throw InvalidInput("acquisitions contains a repeated entry");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
    throw InvalidInput("seeds contains a repeated entry");
  if (workers == 0) throw InvalidInput("workers must be at least 1");
}

BenchSpec bench_spec_from_json(const nlohmann::json& j, const std::string& base_dir) {
  static const std::set<std::string> known = {"pool",  "genome", "featurizer", "surrogate",    "reference_point",
                                              "acquisitions", "seeds", "T", "q", "L", "M", "initial_size",
                                              "true_pareto_ids", "output_dir", "workers"};
  if (!j.is_object()) throw InvalidInput("bench spec must be a JSON object");
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) throw InvalidInput("unknown bench field \"" + k + "\"");
  BenchSpec s;
  try {
    const auto& pool = j.at("pool");
    s.pool_path = resolve(pool.is_string() ? pool.get<std::string>() : pool.at("path").get<std::string>(), base_dir);
    s.genome = j.value("genome", s.genome);
    s.featurizer = j.value("featurizer", s.featurizer);
    s.surrogate = j.value("surrogate", s.surrogate);
    s.reference_point = j.value("reference_point", s.reference_point);
    for (const auto& a : j.at("acquisitions")) s.acquisitions.push_back(acquisition_from_string(a.get<std::string>()));
    s.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    s.iterations = j.value("T", s.iterations);
    s.batch_size = j.value("q", s.batch_size);
    s.num_draws = j.value("L", s.num_draws);
    s.num_objectives = j.value("M", s.num_objectives);
    s.initial_size = j.value("initial_size", s.initial_size);
    if (j.contains("true_pareto_ids"))
      s.true_pareto_ids = j.at("true_pareto_ids").get<std::set<std::string>>();
    if (j.contains("output_dir")) s.output_dir = resolve(j.at("output_dir").get<std::string>(), base_dir);
    s.workers = j.value("workers", s.workers);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("bench spec: ") + e.what());
  }
  s.validate();
  return s;
}

nlohmann::json bench_cell_config(const BenchSpec& spec, AcquisitionKind kind, std::uint64_t seed) {
  nlohmann::json j = {{"T", spec.iterations},
                      {"q", spec.batch_size},
                      {"L", spec.num_draws},
                      {"M", spec.num_objectives},
                      {"acquisition", to_string(kind)},
                      {"genome", spec.genome},
                      {"featurizer", spec.featurizer},
                      {"surrogate", spec.surrogate},
                      {"pool", spec.pool_path},
                      {"initial", {{"random", spec.initial_size}}},
                      {"oracle", {{"kind", "table"}}},
                      {"seed", seed},
                      {"threads", 1}};
  if (!spec.reference_point.empty()) j["reference_point"] = spec.reference_point;
  return j;
}

std::pair<double, double> mean_ci95(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  if (xs.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

std::vector<AggregateRow> aggregate_cells(const std::vector<BenchCell>& cells,
                                          const std::vector<AcquisitionKind>& order) {
  std::vector<AggregateRow> out;
  for (auto kind : order) {
    std::map<std::size_t, std::vector<const MetricRecord*>> by_iter;
    for (const auto& c : cells)
      if (c.acquisition == kind)
        for (const auto& r : c.rows) by_iter[r.iteration].push_back(&r);
    for (const auto& [t, rows] : by_iter) {
      AggregateRow a;
      a.acquisition = kind;
      a.iteration = t;
      a.n = rows.size();
      std::vector<double> hv, fr;
      for (const auto* r : rows) {
        hv.push_back(r->hv);
        if (r->fraction_recovered) fr.push_back(*r->fraction_recovered);
      }
      std::tie(a.hv_mean, a.hv_ci95) = mean_ci95(hv);
      if (fr.size() == rows.size()) {
        const auto [m, h] = mean_ci95(fr);
        a.fraction_recovered_mean = m;
        a.fraction_recovered_ci95 = h;
      }
      out.push_back(a);
    }
  }
  return out;
}

std::string aggregate_csv(const std::vector<AggregateRow>& rows) {
  std::string out(kAggregateCsvHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += to_string(r.acquisition) + ',' + std::to_string(r.iteration) + ',' + std::to_string(r.n) + ',' +
           format_double(r.hv_mean) + ',' + format_double(r.hv_ci95) + ',' + opt_field(r.fraction_recovered_mean) +
           ',' + opt_field(r.fraction_recovered_ci95) + '\n';
  }
  return out;
}

BenchResult run_bench(const BenchSpec& spec) {
  spec.validate();
  BenchResult result;
  {
    const auto ctx = prepare_campaign(config_from_json(bench_cell_config(spec, spec.acquisitions[0], spec.seeds[0])));
    if (!ctx.pool->labeled())
      throw InvalidInput("bench pool " + spec.pool_path + " has no objective columns; a fully labeled pool is required");
    result.true_pareto_ids = *ctx.true_pareto_ids;
    if (spec.true_pareto_ids && *spec.true_pareto_ids != result.true_pareto_ids)
      throw InvalidInput("true_pareto_ids does not match the non-dominated rows of " + spec.pool_path + " (" +
                         std::to_string(result.true_pareto_ids.size()) + " ids recomputed from the labels)");
  }

  for (auto kind : spec.acquisitions)
    for (auto seed : spec.seeds) result.cells.push_back(BenchCell{kind, seed, {}});

  parallel_for(result.cells.size(), spec.workers, [&](std::size_t i) {
    auto& cell = result.cells[i];
    const auto ctx = prepare_campaign(config_from_json(bench_cell_config(spec, cell.acquisition, cell.seed)));
    auto state = init_campaign(ctx.config, initial_data(ctx), ctx.true_pareto_ids);
    run(state, ctx);
    cell.rows.push_back(state.baseline);
    cell.rows.insert(cell.rows.end(), state.history.begin(), state.history.end());
    log::info("bench cell " + to_string(cell.acquisition) + " seed " + std::to_string(cell.seed) + " done");
  });

  result.aggregate = aggregate_cells(result.cells, spec.acquisitions);

  if (!spec.output_dir.empty()) {
    const fs::path dir(spec.output_dir);
    fs::create_directories(dir / "cells");
    for (const auto& c : result.cells)
      write_file((dir / "cells" / (to_string(c.acquisition) + "_seed" + std::to_string(c.seed) + ".csv")).string(),
                 metrics_csv(c.rows));
    write_file((dir / "aggregate.csv").string(), aggregate_csv(result.aggregate));
  }
  return result;
}

}  // namespace mobo
