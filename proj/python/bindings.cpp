#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "advpred/bench.hpp"
#include "advpred/consistency.hpp"
#include "advpred/game.hpp"
#include "advpred/gradients.hpp"
#include "advpred/model_io.hpp"
#include "advpred/prediction.hpp"
#include "advpred/training.hpp"

namespace py = pybind11;
using namespace advpred;

namespace {

using Rows = std::vector<std::vector<double>>;

Matrix to_matrix(const Rows& rows) {
  if (rows.empty()) return {};
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols()) throw Error(ErrorCode::DimensionMismatch, "ragged matrix rows");
    std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
  }
  return m;
}

Rows to_rows(const Matrix& m) {
  Rows out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) out[i].assign(m.row(i).begin(), m.row(i).end());
  return out;
}

Dataset make_dataset(const Rows& x, const std::vector<Label>& y, std::size_t classes) {
  Dataset d;
  d.x = to_matrix(x);
  d.y = y;
  d.classes = classes;
  if (d.classes == 0)
    for (Label l : y) d.classes = std::max<std::size_t>(d.classes, static_cast<std::size_t>(l));
  d.check();
  return d;
}

py::dict game_dict(const GameSolution& s) {
  py::dict d;
  d["q"] = s.q;
  d["p"] = s.p;
  d["v"] = s.v;
  d["value"] = s.value;
  return d;
}

py::dict report_dict(const MetricReport& r) {
  py::dict d;
  d["dataset"] = r.dataset;
  d["metric"] = r.metric;
  d["mean"] = r.mean;
  d["stddev"] = r.stddev;
  d["abstain_rate"] = r.abstain_rate;
  d["error"] = r.error;
  std::vector<double> values;
  for (const auto& s : r.splits) values.push_back(s.metric);
  d["splits"] = values;
  return d;
}

}  // namespace

PYBIND11_MODULE(_advpred, m) {
  m.doc() = "Adversarial surrogate losses, game solvers and trainers";

  static py::exception<Error> error(m, "AdvpredError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  py::class_<LossMatrix>(m, "LossMatrix")
      .def(py::init([](const Rows& rows) { return LossMatrix(to_matrix(rows)); }))
      .def_property_readonly("options", &LossMatrix::options)
      .def_property_readonly("classes", &LossMatrix::classes)
      .def("to_list", [](const LossMatrix& l) { return to_rows(l.entries()); })
      .def("is_natural", &LossMatrix::is_natural);

  py::class_<ZeroOne>(m, "ZeroOne").def(py::init<>());
  py::class_<OrdinalAbsolute>(m, "OrdinalAbsolute").def(py::init<>());
  py::class_<OrdinalSquared>(m, "OrdinalSquared").def(py::init<>());
  py::class_<Abstain>(m, "Abstain").def(py::init<double>(), py::arg("alpha") = 0.5).def_readonly("alpha", &Abstain::alpha);
  py::enum_<BaseMetric>(m, "BaseMetric")
      .value("ZERO_ONE", BaseMetric::ZeroOne)
      .value("ORDINAL_ABSOLUTE", BaseMetric::OrdinalAbsolute)
      .value("ORDINAL_SQUARED", BaseMetric::OrdinalSquared);
  py::class_<Weighted>(m, "Weighted")
      .def(py::init<BaseMetric, double>(), py::arg("base"), py::arg("alpha"))
      .def_readonly("base", &Weighted::base)
      .def_readonly("alpha", &Weighted::alpha);
  py::class_<General>(m, "General").def(py::init<LossMatrix>()).def_readonly("matrix", &General::matrix);

  m.def("describe", &describe);
  m.def("build_loss_matrix", &build_loss_matrix, py::arg("spec"), py::arg("k"));
  m.def(
      "adversarial_loss",
      [](const LossSpec& spec, const Vector& f, Label y) { return adversarial_loss(spec, f, y); },
      py::arg("spec"), py::arg("f"), py::arg("y"));
  m.def(
      "adversary_choice",
      [](const LossSpec& spec, const Vector& f, Label y) {
        const AdversaryChoice c = adversary_choice(spec, f, y);
        return py::make_tuple(c.value, c.q);
      },
      py::arg("spec"), py::arg("f"), py::arg("y"));

  m.def(
      "solve_adversary_game",
      [](const LossMatrix& L, const Vector& f) { return game_dict(solve_adversary_game(L, f)); }, py::arg("loss"),
      py::arg("f"));
  m.def(
      "solve_predictor_game",
      [](const LossMatrix& L, const Vector& f) { return game_dict(solve_predictor_game(L, f)); }, py::arg("loss"),
      py::arg("f"));
  m.def("enumerate_vertices", [](const LossMatrix& L) {
    std::vector<Vector> out;
    for (const auto& v : enumerate_vertices(L)) out.push_back(v.point);
    return out;
  });

  py::class_<FeatureMap>(m, "FeatureMap")
      .def_static("thresholded", &FeatureMap::thresholded, py::arg("m"), py::arg("k"))
      .def_static("multiclass", &FeatureMap::multiclass, py::arg("m"), py::arg("k"))
      .def_property_readonly("output_dim", &FeatureMap::output_dim)
      .def("__call__", [](const FeatureMap& map, const Vector& x, Label y) { return map(x, y); })
      .def("potentials", [](const FeatureMap& map, const Vector& theta, const Vector& x) {
        return map.potentials(theta, x);
      });

  py::class_<LinearKernel>(m, "LinearKernel").def(py::init<>());
  py::class_<GaussianKernel>(m, "GaussianKernel")
      .def(py::init<double>(), py::arg("gamma") = 1.0)
      .def_readonly("gamma", &GaussianKernel::gamma);
  m.def("kernel", [](const KernelSpec& k, const Vector& u, const Vector& v) { return kernel(k, u, v); });

  m.def(
      "subgradient",
      [](const LossSpec& spec, const Vector& x, Label y, const Vector& theta, const FeatureMap& map) {
        const Subgradient g = subgradient(spec, x, y, theta, map);
        return py::make_tuple(g.vector, g.q_star, g.loss);
      },
      py::arg("spec"), py::arg("x"), py::arg("y"), py::arg("theta"), py::arg("map"));

  m.def(
      "abstain_prediction",
      [](const Vector& f, double alpha) {
        const Prediction p = abstain_prediction(f, alpha);
        return py::make_tuple(p.label, p.abstained, p.distribution);
      },
      py::arg("f"), py::arg("alpha") = 0.5);

  py::class_<LinearModel>(m, "LinearModel")
      .def_readonly("theta", &LinearModel::theta)
      .def_readonly("map", &LinearModel::map)
      .def_readonly("lambda_", &LinearModel::lambda)
      .def("potentials", [](const LinearModel& lm, const Vector& x) { return lm.potentials(x); })
      .def("predict", [](const LinearModel& lm, const Vector& x) { return predict_default(lm, x).label; });

  py::class_<KernelModel>(m, "KernelModel")
      .def_readonly("t_final", &KernelModel::t_final)
      .def_property_readonly("alpha", [](const KernelModel& km) { return to_rows(km.alpha); })
      .def("potentials", [](const KernelModel& km, const Vector& x) { return km.potentials(x); })
      .def("predict", [](const KernelModel& km, const Vector& x) { return predict_default(km, x).label; });

  m.def(
      "train_linear",
      [](const Rows& x, const std::vector<Label>& y, const LossSpec& spec, const FeatureMap& map, double lambda,
         std::size_t epochs, std::uint64_t seed, std::size_t classes) {
        OptimizerConfig cfg;
        cfg.epochs = epochs;
        cfg.seed = seed;
        return train_linear(make_dataset(x, y, classes), spec, map, lambda, cfg).model;
      },
      py::arg("x"), py::arg("y"), py::arg("spec"), py::arg("map"), py::arg("lam"), py::arg("epochs") = 200,
      py::arg("seed") = 0, py::arg("classes") = 0);

  m.def(
      "train_pegasos_kernel",
      [](const Rows& x, const std::vector<Label>& y, const LossSpec& spec, const KernelSpec& kernel,
         const FeatureMap& map, double lambda, std::size_t iterations, std::uint64_t seed, std::size_t classes) {
        return train_pegasos_kernel(make_dataset(x, y, classes), spec, kernel, map, lambda, iterations, seed);
      },
      py::arg("x"), py::arg("y"), py::arg("spec"), py::arg("kernel"), py::arg("map"), py::arg("lam"),
      py::arg("iterations"), py::arg("seed") = 0, py::arg("classes") = 0);

  m.def(
      "bayes_set",
      [](const LossMatrix& L, const Vector& d) { return bayes_set(L, TrueDistribution(d)); }, py::arg("loss"),
      py::arg("d"));
  m.def(
      "check_consistency",
      [](const LossSpec& spec, std::size_t classes, std::size_t trials, std::uint64_t seed) {
        ConsistencyOptions opts;
        opts.classes = classes;
        opts.trials = trials;
        opts.seed = seed;
        const ConsistencyReport r = check_consistency(spec, opts);
        py::dict d;
        d["violations"] = r.violations;
        d["trials"] = r.trials.size();
        d["worst_reflective_gap"] = r.worst_reflective_gap;
        d["worst_stationarity_gap"] = r.worst_stationarity_gap;
        d["text"] = r.to_text();
        return d;
      },
      py::arg("spec"), py::arg("classes") = 3, py::arg("trials") = 50, py::arg("seed") = 1);

  m.def(
      "run_experiment",
      [](const std::string& path, const LossSpec& spec, const std::string& features, const py::object& kernel,
         std::size_t splits, std::uint64_t seed) {
        const FeatureKind kind = features == "thresholded" ? FeatureKind::Thresholded : FeatureKind::Multiclass;
        const bool kernelized = !kernel.is_none();
        const KernelSpec ks = kernelized ? kernel.cast<KernelSpec>() : KernelSpec{LinearKernel{}};
        ExperimentConfig cfg =
            ExperimentConfig::defaults(spec, kind, kernelized ? Learner::Kernel : Learner::Linear, ks);
        cfg.splits = splits;
        cfg.seed = seed;
        return report_dict(run_experiment(load_csv(path), cfg));
      },
      py::arg("path"), py::arg("spec"), py::arg("features") = "multiclass", py::arg("kernel") = py::none(),
      py::arg("splits") = 20, py::arg("seed") = 1);

  m.def(
      "dumps_model",
      [](const LinearModel& lm) {
        std::ostringstream out;
        write_model(out, {lm, std::nullopt});
        return out.str();
      },
      py::arg("model"));
  m.def(
      "loads_linear_model",
      [](const std::string& text) {
        std::istringstream in(text);
        return std::get<LinearModel>(read_model(in).model);
      },
      py::arg("text"));
}
