#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mobo/acquisition.hpp"
#include "mobo/bench.hpp"
#include "mobo/campaign.hpp"
#include "mobo/errors.hpp"
#include "mobo/pareto.hpp"
#include "mobo/surrogate.hpp"

namespace py = pybind11;
using namespace mobo;

namespace {

ParetoFront front_of(const std::vector<ObjectiveVector>& points, const ObjectiveVector& ref) {
  ParetoFront f(ref);
  for (const auto& p : points) f.insert(p);
  return f;
}

py::dict result_dict(const AcquisitionResult& r) {
  py::dict d;
  d["probs"] = r.probs;
  d["counts"] = r.counts;
  d["pareto_membership"] = r.pareto_membership;
  d["selected"] = r.selected;
  d["num_draws"] = r.num_draws;
  d["improving_draws"] = r.improving_draws;
  d["improving_fraction"] = r.improving_fraction;
  d["truncated"] = r.truncated;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Pool-based batch multi-objective Bayesian optimization";

  auto base = py::register_exception<Error>(m, "MoboError", PyExc_RuntimeError);
  py::register_exception<InvalidInput>(m, "InvalidInput", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<UnsupportedDimension>(m, "UnsupportedDimension", base.ptr());
  py::register_exception<FitFailure>(m, "FitFailure", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<DegenerateData>(m, "DegenerateData", base.ptr());
  py::register_exception<OracleError>(m, "OracleError", base.ptr());
  py::register_exception<GenerationStarvation>(m, "GenerationStarvation", base.ptr());

  py::class_<ParetoFront>(m, "ParetoFront")
      .def(py::init<ObjectiveVector>(), py::arg("ref_point"))
      .def(
          "insert", [](ParetoFront& f, const ObjectiveVector& y, std::optional<std::string> id) { return f.insert(y, id); },
          py::arg("y"), py::arg("id") = py::none())
      .def("values", &ParetoFront::values)
      .def("ids",
           [](const ParetoFront& f) {
             std::vector<std::optional<std::string>> ids;
             for (const auto& p : f.points()) ids.push_back(p.id);
             return ids;
           })
      .def_property_readonly("ref_point", &ParetoFront::ref_point)
      .def("hypervolume", [](const ParetoFront& f) { return hypervolume(f); })
      .def("hvi", [](const ParetoFront& f, const ObjectiveVector& y) { return hvi(y, f); })
      .def("__len__", &ParetoFront::size);

  m.def(
      "hypervolume",
      [](const std::vector<ObjectiveVector>& points, const ObjectiveVector& ref) { return hypervolume(points, ref); },
      py::arg("points"), py::arg("ref_point"));
  m.def(
      "hvi",
      [](const ObjectiveVector& y, const std::vector<ObjectiveVector>& points, const ObjectiveVector& ref) {
        return hvi(y, front_of(points, ref));
      },
      py::arg("y"), py::arg("points"), py::arg("ref_point"));
  m.def("non_dominated_indices", &non_dominated_indices, py::arg("points"));

  py::class_<GpModel>(m, "GpModel")
      .def_property_readonly("num_objectives", &GpModel::num_objectives)
      .def("predict_mean", &GpModel::predict_mean, py::arg("x"))
      .def(
          "predict",
          [](const GpModel& model, const Eigen::MatrixXd& x) {
            Eigen::MatrixXd mean(x.rows(), static_cast<Eigen::Index>(model.num_objectives()));
            std::vector<Eigen::MatrixXd> cov;
            for (std::size_t k = 0; k < model.num_objectives(); ++k) {
              Eigen::VectorXd mu;
              Eigen::MatrixXd c;
              model.objective(k).predict(x, mu, c);
              mean.col(static_cast<Eigen::Index>(k)) = mu;
              cov.push_back(std::move(c));
            }
            return py::make_tuple(mean, cov);
          },
          py::arg("x"), "Posterior mean (N x M) and one N x N covariance per objective.")
      .def("hyperparameters", [](const GpModel& model) { return model.hyperparameters_json().dump(); });

  m.def(
      "fit_gp",
      [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const std::string& kernel, std::uint64_t seed,
         int num_starts, bool normalize, std::optional<double> lengthscale, std::optional<double> signal_variance) {
        Dataset d;
        d.features = x;
        d.objectives = y;
        for (Eigen::Index i = 0; i < x.rows(); ++i) d.ids.push_back(std::to_string(i));
        GpFitConfig cfg;
        cfg.kernel = kernel_from_string(kernel);
        d.feature_kind = cfg.kernel == KernelKind::tanimoto ? FeatureKind::binary : FeatureKind::dense_real;
        cfg.seed = seed;
        cfg.num_starts = num_starts;
        cfg.normalize_outputs = normalize;
        cfg.fixed_lengthscale = lengthscale;
        cfg.fixed_signal_variance = signal_variance;
        return fit(d, cfg);
      },
      py::arg("x"), py::arg("y"), py::arg("kernel") = "rbf", py::arg("seed") = 0, py::arg("num_starts") = 8,
      py::arg("normalize") = true, py::arg("lengthscale") = py::none(), py::arg("signal_variance") = py::none());

  m.def(
      "qpmhi",
      [](const Eigen::MatrixXd& mean, const std::vector<Eigen::MatrixXd>& cov,
         const std::vector<ObjectiveVector>& front_points, const ObjectiveVector& ref, std::size_t num_draws,
         std::uint64_t seed, std::size_t q, unsigned threads) {
        AcquisitionResult r;
        {
          py::gil_scoped_release release;
          const auto post = make_posterior({}, mean, cov);
          r = estimate_qpmhi(post, front_of(front_points, ref), num_draws, seed, threads);
          if (q > 0) {
            const auto sel = select_batch(r, q);
            r.selected = sel.indices;
            r.truncated = sel.truncated;
          }
        }
        return result_dict(r);
      },
      py::arg("mean"), py::arg("cov"), py::arg("front"), py::arg("ref_point"), py::arg("num_draws") = 256,
      py::arg("seed") = 0, py::arg("q") = 0, py::arg("threads") = 1);

  m.def(
      "run_campaign",
      [](const std::string& config_json, const std::string& base_dir) {
        const auto ctx = prepare_campaign(config_from_json(nlohmann::json::parse(config_json), base_dir));
        auto state = init_campaign(ctx.config, initial_data(ctx), ctx.true_pareto_ids);
        run(state, ctx);
        return std::make_pair(campaign_metrics_csv(state, true), front_to_json(state.front).dump());
      },
      py::arg("config_json"), py::arg("base_dir") = "", "Returns (metrics CSV with the baseline row, front JSON).",
      py::call_guard<py::gil_scoped_release>());

  m.def(
      "run_bench",
      [](const std::string& spec_json, const std::string& base_dir) {
        return aggregate_csv(run_bench(bench_spec_from_json(nlohmann::json::parse(spec_json), base_dir)).aggregate);
      },
      py::arg("spec_json"), py::arg("base_dir") = "", "Returns the aggregate CSV.",
      py::call_guard<py::gil_scoped_release>());
}
