// Copyright 2026 The diffmorph Authors
// SPDX-License-Identifier: Apache-2.0

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>

#include "diffmorph/demo.hpp"
#include "diffmorph/diffusion.hpp"
#include "diffmorph/errors.hpp"
#include "diffmorph/io.hpp"
#include "diffmorph/metrics.hpp"
#include "diffmorph/morph.hpp"
#include "diffmorph/predictors.hpp"
#include "diffmorph/rsm.hpp"

namespace py = pybind11;
using namespace diffmorph;

namespace {

using OptCode = std::optional<Eigen::VectorXd>;

const SemanticCode* ptr(const OptCode& z) { return z ? &*z : nullptr; }

}  // namespace

PYBIND11_MODULE(_diffmorph, m) {
  m.doc() = "Diffusion-autoencoder face morphing toolkit with biometric evaluation metrics.";
  m.attr("__version__") = DIFFMORPH_VERSION;

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ScheduleError>(m, "ScheduleError", base.ptr());
  py::register_exception<InputError>(m, "InputError", base.ptr());
  auto domain = py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<IndefiniteMatrixError>(m, "IndefiniteMatrixError", domain.ptr());
  py::register_exception<UndefinedMetricError>(m, "UndefinedMetricError", base.ptr());
  py::register_exception<IndexError>(m, "ScheduleIndexError", base.ptr());

  // Diffusion core.
  py::class_<VarianceSchedule>(m, "VarianceSchedule")
      .def(py::init<std::vector<double>>(), py::arg("betas"))
      .def_property_readonly("steps", &VarianceSchedule::steps)
      .def("beta", &VarianceSchedule::beta)
      .def("alpha_bar", &VarianceSchedule::alpha_bar)
      .def_property_readonly("alpha_bars", &VarianceSchedule::alpha_bars);
  m.def("make_linear_schedule", &make_linear_schedule, py::arg("steps"), py::arg("beta_start"),
        py::arg("beta_end"));
  m.def("default_schedule", &default_schedule);

  py::enum_<Spacing>(m, "Spacing").value("LINEAR", Spacing::kLinear).value("QUADRATIC", Spacing::kQuadratic);
  py::class_<SubSchedule>(m, "SubSchedule")
      .def(py::init<std::vector<int>>(), py::arg("tau"))
      .def_property_readonly("steps", &SubSchedule::steps)
      .def_property_readonly("tau", &SubSchedule::tau);
  m.def("make_subschedule", &make_subschedule, py::arg("schedule"), py::arg("steps"),
        py::arg("spacing") = Spacing::kLinear);

  py::class_<NoisePredictor>(m, "NoisePredictor")
      .def("evaluate",
           [](const NoisePredictor& p, const StateVector& x, const OptCode& z, int t) {
             return p.evaluate(x, ptr(z), t);
           },
           py::arg("x"), py::arg("z"), py::arg("t"));
  py::class_<GaussianWorld>(m, "GaussianWorld")
      .def(py::init([](double s, int dim) { return GaussianWorld{s, dim}; }), py::arg("s") = 1.0,
           py::arg("dim") = 8)
      .def_readwrite("s", &GaussianWorld::s)
      .def_readwrite("dim", &GaussianWorld::dim);
  // keep_alive is unnecessary: the predictor copies what it needs from the schedule.
  py::class_<AnalyticGaussianPredictor, NoisePredictor>(m, "AnalyticGaussianPredictor")
      .def(py::init<GaussianWorld, const VarianceSchedule&>(), py::arg("world"), py::arg("schedule"));
  py::class_<ZeroPredictor, NoisePredictor>(m, "ZeroPredictor").def(py::init<>());

  m.def("stochastic_encode",
        [](const StateVector& x0, const OptCode& z, const SubSchedule& sub, const VarianceSchedule& s,
           const NoisePredictor& p) { return stochastic_encode(x0, ptr(z), sub, s, p); },
        py::arg("x0"), py::arg("z"), py::arg("sub"), py::arg("schedule"), py::arg("predictor"));
  m.def("generate",
        [](const StateVector& xT, const OptCode& z, const SubSchedule& sub, const VarianceSchedule& s,
           const NoisePredictor& p, double eta, std::uint64_t seed) {
          if (eta == 0.0) return generate(xT, ptr(z), sub, s, p);
          return generate(xT, ptr(z), sub, s, p, SigmaPolicy::from_eta(eta), seed);
        },
        py::arg("x_T"), py::arg("z"), py::arg("sub"), py::arg("schedule"), py::arg("predictor"),
        py::arg("eta") = 0.0, py::arg("seed") = 0);
  m.def("ddim_step_general",
        [](const StateVector& x, int t, int t_prev, const VarianceSchedule& s, const NoisePredictor& p,
           double sigma, const std::optional<StateVector>& noise, const OptCode& z) {
          return ddim_step_general(x, t, t_prev, s, p, sigma, noise.value_or(StateVector()), ptr(z));
        },
        py::arg("x_t"), py::arg("t"), py::arg("t_prev"), py::arg("schedule"), py::arg("predictor"),
        py::arg("sigma") = 0.0, py::arg("noise") = py::none(), py::arg("z") = py::none());

  // Morphing.
  m.def("lerp", &diffmorph::lerp, py::arg("u"), py::arg("v"), py::arg("gamma"));
  m.def("slerp", &diffmorph::slerp, py::arg("u"), py::arg("v"), py::arg("gamma"));
  py::enum_<MorphVariant>(m, "MorphVariant")
      .value("A", MorphVariant::kA)
      .value("B", MorphVariant::kB)
      .value("C", MorphVariant::kC)
      .value("EXTERNAL", MorphVariant::kExternal);
  py::class_<MorphConfig>(m, "MorphConfig")
      .def(py::init<>())
      .def_readwrite("gamma_z", &MorphConfig::gamma_z)
      .def_readwrite("gamma_x", &MorphConfig::gamma_x)
      .def_readwrite("variant", &MorphConfig::variant)
      .def_readwrite("n_encode", &MorphConfig::n_encode)
      .def_readwrite("n_decode", &MorphConfig::n_decode)
      .def_readwrite("spacing", &MorphConfig::spacing);
  m.def("diffusion_morph",
        [](const StateVector& xa, const StateVector& xb, const MorphConfig& cfg, const VarianceSchedule& s,
           const NoisePredictor& p) { return diffusion_morph(xa, xb, cfg, s, p, IdentitySemanticEncoder()); },
        py::arg("x_a"), py::arg("x_b"), py::arg("config"), py::arg("schedule"), py::arg("predictor"),
        "Morph with the identity semantic encoder.");
  m.def("demo_midpoint_fraction",
        [](const MorphConfig& cfg, int pairs, std::uint64_t seed) {
          DemoConfig d;
          d.morph = cfg;
          d.pairs = pairs;
          d.seed = seed;
          return run_demo_morph(d, default_schedule()).midpoint_fraction;
        },
        py::arg("config"), py::arg("pairs") = 500, py::arg("seed") = 0);

  // Metrics.
  py::class_<GaussianStats>(m, "GaussianStats")
      .def(py::init([](Eigen::VectorXd mean, Eigen::MatrixXd cov) { return GaussianStats{mean, cov}; }),
           py::arg("mean"), py::arg("cov"))
      .def_readonly("mean", &GaussianStats::mean)
      .def_readonly("cov", &GaussianStats::cov);
  m.def("fit_gaussian", py::overload_cast<const Eigen::MatrixXd&>(&fit_gaussian), py::arg("samples"));
  m.def("frechet_distance", &frechet_distance, py::arg("g1"), py::arg("g2"));
  m.def("calibrate_threshold_fmr",
        [](const std::vector<double>& d, double fmr) { return calibrate_threshold_fmr(d, fmr); },
        py::arg("impostor"), py::arg("fmr"));
  m.def("bpcer_threshold", [](const std::vector<double>& g, double b) { return bpcer_threshold(g, b); },
        py::arg("genuine"), py::arg("bpcer"));
  m.def("apcer_at", [](const std::vector<double>& s, double t) { return apcer_at(s, t); },
        py::arg("morph"), py::arg("threshold"));

  py::class_<EmbeddingTable>(m, "EmbeddingTable")
      .def_property_readonly("dim", &EmbeddingTable::dim)
      .def_property_readonly("morph_count", [](const EmbeddingTable& t) { return t.morphs().size(); });
  m.def("ingest_embeddings", &ingest_embeddings, py::arg("path"));
  m.def("mmpmr_prodavg",
        [](const EmbeddingTable& t, double gamma, bool skip_missing) {
          return mmpmr_prodavg(t, gamma, skip_missing ? MissingReference::kSkip : MissingReference::kError);
        },
        py::arg("table"), py::arg("gamma"), py::arg("skip_missing") = false);

  // Relative strength.
  m.def("transferability",
        [](const std::map<std::string, int>& self, const std::map<std::string, int>& cross, bool smoothing) {
          return transferability({"d", "self", self}, {"d", "cross", cross}, {smoothing});
        },
        py::arg("self_decisions"), py::arg("cross_decisions"), py::arg("laplace_smoothing") = false,
        "Decisions are dicts mapping pair id to 0/1.");
  m.def("rsm", &rsm, py::arg("t_ab"), py::arg("t_ba"));
  m.def("rsm_matrix_from_file",
        [](const std::filesystem::path& path, bool smoothing) {
          const auto r = rsm_matrix(ingest_decisions(path), {smoothing});
          return py::make_tuple(r.attacks, r.transfer, r.delta);
        },
        py::arg("path"), py::arg("laplace_smoothing") = false,
        "Returns (attacks, transferability matrix, RSM matrix).");
}
