#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "mobo/bench.hpp"
#include "mobo/campaign.hpp"
#include "mobo/errors.hpp"
#include "mobo/io.hpp"
#include "mobo/log.hpp"

namespace fs = std::filesystem;
using namespace mobo;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitValidation = 2;

json load_json(const std::string& path) {
  const auto text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

std::string parent_dir(const std::string& path) {
  const auto p = fs::absolute(path).parent_path();
  return p.string();
}

int cmd_run(const std::string& config_path, bool resume, std::optional<std::size_t> stop_after) {
  const auto cfg = config_from_json(load_json(config_path), parent_dir(config_path));
  const fs::path out = cfg.output_dir.empty() ? fs::path(parent_dir(config_path)) : fs::path(cfg.output_dir);
  fs::create_directories(out);
  RunOptions opts;
  opts.checkpoint_path = (out / "checkpoint.json").string();
  opts.metrics_path = (out / "metrics.csv").string();
  opts.front_path = (out / "front.json").string();
  if (stop_after) opts.stop = [k = *stop_after](const CampaignState& s) { return s.iteration >= k; };

  const auto ctx = prepare_campaign(cfg);
  CampaignState state;
  if (resume) {
    if (!fs::exists(opts.checkpoint_path)) throw InvalidInput("--resume: no checkpoint at " + opts.checkpoint_path);
    const auto ckpt = load_json(opts.checkpoint_path);
    state = checkpoint_from_json(ckpt, ctx.featurizer);
    if (state.config_hash != config_hash(ctx.config))
      throw InvalidInput("--resume: " + opts.checkpoint_path + " was written for a different configuration");
    log::info("resuming after iteration " + std::to_string(state.iteration));
  } else {
    state = init_campaign(ctx.config, initial_data(ctx), ctx.true_pareto_ids);
    write_file(opts.checkpoint_path, checkpoint_to_json(state, ctx.config).dump() + "\n");
  }
  run(state, ctx, opts);
  // Keep the files consistent even when there was nothing left to run.
  write_file(opts.metrics_path, campaign_metrics_csv(state));
  write_file(opts.front_path, front_to_json(state.front).dump(2) + "\n");
  std::cout << "iteration " << state.iteration << " hv " << format_double(hypervolume(state.front)) << "\n";
  return 0;
}

int cmd_hv(const std::string& front_path, const std::string& ref_text) {
  const auto j = load_json(front_path);
  std::vector<ObjectiveVector> points;
  std::optional<ObjectiveVector> ref;
  try {
    const auto& list = j.is_array() ? j : j.at("points");
    for (const auto& e : list) points.push_back(e.is_array() ? e.get<ObjectiveVector>() : e.at("values").get<ObjectiveVector>());
    if (j.is_object() && j.contains("ref_point")) ref = j.at("ref_point").get<ObjectiveVector>();
  } catch (const json::exception& e) {
    throw ParseError(front_path + ": malformed front: " + e.what());
  }
  if (!ref_text.empty()) ref = parse_number_list(ref_text);
  if (!ref) throw InvalidInput("hv: no reference point; pass --ref or include ref_point in the file");
  for (const auto& p : points)
    if (p.size() != ref->size())
      throw InvalidInput("hv: front point has " + std::to_string(p.size()) + " objectives but the reference point has " +
                         std::to_string(ref->size()));
  std::cout << format_double(hypervolume(points, *ref)) << "\n";
  return 0;
}

int cmd_bench(const std::string& spec_path, std::optional<unsigned> workers) {
  auto spec = bench_spec_from_json(load_json(spec_path), parent_dir(spec_path));
  if (workers) spec.workers = *workers;
  if (spec.output_dir.empty()) spec.output_dir = (fs::path(parent_dir(spec_path)) / "bench_out").string();
  const auto res = run_bench(spec);
  std::cout << aggregate_csv(res.aggregate);
  return 0;
}

int cmd_select(const std::string& pool_path, const std::string& ckpt_path, std::size_t q, const std::string& summary) {
  const auto ckpt = load_json(ckpt_path);
  const auto cfg = checkpoint_config(ckpt);
  const Featurizer featurizer(cfg.genome, cfg.featurizer);
  const auto state = checkpoint_from_json(ckpt, featurizer);
  const auto pool = load_pool(pool_path, featurizer);
  if (pool.candidates.empty()) throw InvalidInput("pool " + pool_path + " has no candidates");
  const auto acquired = select_next(state, cfg, pool.candidates, q);
  std::vector<std::string> ids;
  for (const auto& c : pool.candidates) ids.push_back(c.id);
  if (acquired.result) {
    auto r = *acquired.result;
    std::cout << acquisition_csv(r, ids);
    if (!summary.empty()) write_file(summary, acquisition_summary(r, state.seed).dump() + "\n");
  } else {
    std::vector<std::size_t> rank(ids.size(), 0);
    for (std::size_t k = 0; k < acquired.indices.size(); ++k) rank[acquired.indices[k]] = k + 1;
    std::cout << "candidate_id,prob,pareto_membership,selected_rank\n";
    for (std::size_t i = 0; i < ids.size(); ++i)
      std::cout << csv_field(ids[i]) << ",,," << (rank[i] ? std::to_string(rank[i]) : "") << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Batch multi-objective Bayesian optimization over candidate pools"};
  app.require_subcommand(1);

  std::string config_path;
  bool resume = false;
  std::optional<std::size_t> stop_after;
  auto* run = app.add_subcommand("run", "Run a campaign; writes metrics.csv, front.json and checkpoint.json");
  run->add_option("config", config_path, "Campaign config JSON")->required();
  run->add_flag("--resume", resume, "Continue from the checkpoint in the output directory");
  run->add_option("--stop-after", stop_after, "Stop once this iteration is complete")->group("");

  std::string front_path, ref_text;
  auto* hv = app.add_subcommand("hv", "Exact hypervolume of a front");
  hv->add_option("front", front_path, "Front JSON")->required();
  hv->add_option("--ref", ref_text, "Reference point, comma separated");

  std::string spec_path;
  std::optional<unsigned> workers;
  auto* bench = app.add_subcommand("bench", "Acquisition ablation over a labeled pool");
  bench->add_option("spec", spec_path, "Bench spec JSON")->required();
  bench->add_option("--workers", workers, "Cells run in parallel")->check(CLI::PositiveNumber);

  std::string pool_path, ckpt_path, summary_path;
  std::size_t q = 0;
  auto* select = app.add_subcommand("select", "One-shot acquisition over a pool from a checkpoint");
  select->add_option("pool", pool_path, "Candidate pool CSV")->required();
  select->add_option("checkpoint", ckpt_path, "Campaign checkpoint JSON")->required();
  select->add_option("-q", q, "Batch size")->required();
  select->add_option("--summary", summary_path, "Write the acquisition summary JSON here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*run) return cmd_run(config_path, resume, stop_after);
    if (*hv) return cmd_hv(front_path, ref_text);
    if (*bench) return cmd_bench(spec_path, workers);
    if (*select) return cmd_select(pool_path, ckpt_path, q, summary_path);
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const UnsupportedDimension& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const OracleError& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (!e.raw_output().empty()) std::cerr << "oracle output:\n" << e.raw_output() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitRuntime;
}
