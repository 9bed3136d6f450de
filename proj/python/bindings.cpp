#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <algorithm>
#include <sstream>

#include "cli.hpp"
#include "sgch/dynamics.hpp"
#include "sgch/experiments.hpp"
#include "sgch/fields.hpp"
#include "sgch/integrator.hpp"
#include "sgch/noise.hpp"
#include "sgch/rng.hpp"
#include "sgch/spectral.hpp"

namespace py = pybind11;
using namespace sgch;

namespace {

py::array_t<double> as_array(const std::vector<double>& v) {
  py::array_t<double> a({static_cast<py::ssize_t>(v.size())}, {static_cast<py::ssize_t>(sizeof(double))});
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

SpectralField from_samples(py::array_t<double, py::array::c_style | py::array::forcecast> samples, int n_modes) {
  if (samples.ndim() != 1) throw InvalidInput("samples must be one-dimensional");
  std::span<const double> s(samples.data(), static_cast<std::size_t>(samples.size()));
  return n_modes > 0 ? to_spectral(s, n_modes) : to_spectral(s);
}

}  // namespace

PYBIND11_MODULE(_sgch, m) {
  m.doc() = "Spectral simulation of the stochastic generalized Camassa-Holm equation";

  py::register_exception<InvalidParameter>(m, "InvalidParameter", PyExc_ValueError);
  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);

  py::class_<SpectralField>(m, "SpectralField")
      .def(py::init<int>(), py::arg("n_modes"))
      .def_static("from_samples", &from_samples, py::arg("samples"), py::arg("n_modes") = 0)
      .def_property_readonly("n_modes", &SpectralField::n_modes)
      .def("coeff", &SpectralField::coeff)
      .def("set_coeff", &SpectralField::set_coeff)
      .def(
          "to_physical",
          [](const SpectralField& f, int n) { return as_array(to_physical(f, n > 0 ? n : f.n_modes())); },
          py::arg("n_samples") = 0)
      .def("__call__", [](const SpectralField& f, double x) { return evaluate(f, x); })
      .def(py::self + py::self)
      .def(py::self - py::self)
      .def(py::self * double())
      .def(double() * py::self)
      .def("__repr__", [](const SpectralField& f) { return "<SpectralField N=" + std::to_string(f.n_modes()) + ">"; });

  m.def("cosine_field", &cosine_field, py::arg("n_modes"), py::arg("mean"), py::arg("amplitude"), py::arg("mode") = 1,
        py::arg("phase") = 0.0);
  m.def("sobolev_norm", &sobolev_norm, py::arg("f"), py::arg("s"));
  m.def("w1inf_norm", &w1inf_norm, py::arg("f"), py::arg("oversample") = 4);
  m.def("sup_norm", &sup_norm, py::arg("f"), py::arg("oversample") = 4);
  m.def("derivative", &derivative);
  m.def("helmholtz_inverse", &helmholtz_inverse);
  m.def("green_convolution", &green_convolution, py::arg("f"), py::arg("quad_factor") = 16);
  m.def("mollify_j", &mollify_j, py::arg("f"), py::arg("eps"));
  m.def("mollify_t", &mollify_t, py::arg("f"), py::arg("eps"));
  m.def("f_nonlocal", &f_nonlocal, py::arg("u"), py::arg("k"));
  m.def("drift", &drift, py::arg("u"), py::arg("k"));

  py::class_<PhiloxStream>(m, "PhiloxStream")
      .def(py::init<std::uint64_t, std::uint64_t>(), py::arg("seed"), py::arg("stream_id") = 0)
      .def("uniform", &PhiloxStream::uniform)
      .def("normal", &PhiloxStream::normal)
      .def("split", &PhiloxStream::split);

  py::class_<TimeProfile>(m, "TimeProfile")
      .def(py::init<double, double, double>(), py::arg("amplitude"), py::arg("modulation") = 0.0,
           py::arg("frequency") = 0.0)
      .def("__call__", &TimeProfile::operator());

  py::class_<NoiseModel>(m, "NoiseModel")
      .def_static("none", &NoiseModel::none)
      .def_static("linear", &NoiseModel::linear)
      .def_static("f_bounded", &NoiseModel::f_bounded)
      .def_static("diagonal", &NoiseModel::diagonal);

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("k", &SolverConfig::k)
      .def_readwrite("s", &SolverConfig::s)
      .def_readwrite("n_modes", &SolverConfig::n_modes)
      .def_readwrite("oversample", &SolverConfig::oversample)
      .def_readwrite("dt", &SolverConfig::dt)
      .def_readwrite("T", &SolverConfig::T)
      .def_readwrite("noise", &SolverConfig::noise)
      .def_readwrite("cutoff_R", &SolverConfig::cutoff_R)
      .def_readwrite("mollifier_eps", &SolverConfig::mollifier_eps)
      .def_readwrite("blowup_threshold", &SolverConfig::blowup_threshold)
      .def_readwrite("exit_R", &SolverConfig::exit_R)
      .def_readwrite("seed", &SolverConfig::seed)
      .def_property(
          "scheme", [](const SolverConfig& c) { return to_string(c.scheme); },
          [](SolverConfig& c, const std::string& s) { c.scheme = drift_scheme_from_string(s); })
      .def_readwrite("cfl_limit", &SolverConfig::cfl_limit)
      .def_readwrite("snapshot_stride", &SolverConfig::snapshot_stride)
      .def("validate", &SolverConfig::validate);

  py::class_<TrajectoryRecord>(m, "TrajectoryRecord")
      .def_property_readonly("times", [](const TrajectoryRecord& r) { return as_array(r.times); })
      .def_property_readonly("hs_norm", [](const TrajectoryRecord& r) { return as_array(r.hs_norm); })
      .def_property_readonly("w1inf_norm", [](const TrajectoryRecord& r) { return as_array(r.w1inf_norm); })
      .def_property_readonly("sup_norm", [](const TrajectoryRecord& r) { return as_array(r.sup_norm); })
      .def_readonly("final_field", &TrajectoryRecord::final_field)
      .def_readonly("exit_time", &TrajectoryRecord::exit_time)
      .def_readonly("blowup_time", &TrajectoryRecord::blowup_time)
      .def_property_readonly("status", [](const TrajectoryRecord& r) { return to_string(r.status); })
      .def_readonly("message", &TrajectoryRecord::message);

  m.def(
      "simulate_path", [](const SolverConfig& c, const SpectralField& u0) { return simulate_path(c, u0); },
      py::arg("config"), py::arg("u0"), py::call_guard<py::gil_scoped_release>());

  m.def("rate_exponent", &rate_exponent, py::arg("k"), py::arg("s"), py::arg("delta"));
  m.def("exit_survival_bound", &exit_survival_bound, py::arg("lam"), py::arg("R"));
  m.def("decay_bound", &decay_bound, py::arg("R"), py::arg("lambda2"));
  m.def("embedding_constant", &embedding_constant, py::arg("s"));
  m.def("predicted_gap", &predicted_gap, py::arg("t"));

  m.def(
      "run_config",
      [](const std::string& text, const std::filesystem::path& out, std::optional<std::uint64_t> seed,
         std::optional<int> threads) {
        cli::Overrides ov;
        ov.seed = seed;
        ov.threads = threads;
        ov.out = out;
        std::ostringstream log;
        cli::RunResult r;
        {
          py::gil_scoped_release release;
          r = cli::run_text(text, "<python>", ov, log);
        }
        return py::make_tuple(static_cast<int>(r.status), r.message, log.str());
      },
      py::arg("config"), py::arg("out"), py::arg("seed") = py::none(), py::arg("threads") = py::none(),
      "Runs a TOML experiment config; returns (exit status, message, verdict log).");
  m.def("experiment_kinds", [] {
    std::vector<std::string> k;
    for (const auto& e : cli::catalogue()) k.push_back(e.kind);
    return k;
  });
}
