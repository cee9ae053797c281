#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>

#include "occlab/config.hpp"
#include "occlab/error.hpp"
#include "occlab/estimators.hpp"
#include "occlab/harness.hpp"
#include "occlab/io.hpp"
#include "occlab/simulate.hpp"
#include "occlab/sobolev.hpp"
#include "occlab/test_function.hpp"
#include "occlab/theory.hpp"

namespace py = pybind11;
using namespace occlab;

namespace {

PathGrid grid_from(py::array_t<double, py::array::c_style | py::array::forcecast> values,
                   double horizon) {
  if (values.ndim() != 1) throw ParameterError("values must be one-dimensional");
  const auto n = static_cast<std::size_t>(values.shape(0));
  if (n < 2) throw ParameterError("need at least two path values");
  std::vector<double> v(values.data(), values.data() + n);
  return PathGrid::equispaced(horizon, n - 1, std::move(v), 1);
}

ProcessSpec process_from(const std::string& json_text) {
  return process_from_json(nlohmann::json::parse(json_text));
}

py::dict prediction_dict(const RatePrediction& p) {
  py::dict d;
  d["delta_exponent"] = p.delta_exponent;
  d["T_exponent"] = p.T_exponent;
  d["log_factor"] = p.log_factor;
  d["source"] = p.source;
  return d;
}

}  // namespace

PYBIND11_MODULE(_occlab, m) {
  m.doc() = "Occupation-time functional estimators and error-rate experiments";

  py::register_exception<Error>(m, "OcclabError", PyExc_RuntimeError);

  m.def(
      "simulate",
      [](const std::string& process, std::size_t n, std::uint64_t seed, std::uint64_t replicate) {
        const auto spec = process_from(process);
        const auto path = simulate(spec, n, SeedPolicy{seed}, replicate);
        py::array_t<double> times(path.size());
        py::array_t<double> values({path.size(), path.dim()});
        std::copy(path.times().begin(), path.times().end(), times.mutable_data());
        std::copy(path.values().begin(), path.values().end(), values.mutable_data());
        return py::make_tuple(times, values);
      },
      py::arg("process"), py::arg("n"), py::arg("seed") = 0, py::arg("replicate") = 0,
      "Simulate one path. `process` is a JSON process object or a bare kind such as '\"bm\"'.");

  m.def(
      "evaluate",
      [](const std::string& function_id, py::array_t<double, py::array::forcecast> x) {
        const auto f = parse_function_id(function_id);
        py::array_t<double> out(x.size());
        for (py::ssize_t i = 0; i < x.size(); ++i) out.mutable_data()[i] = f(x.data()[i]);
        return out;
      },
      py::arg("function_id"), py::arg("x"));

  m.def(
      "riemann_sum",
      [](py::array_t<double, py::array::c_style | py::array::forcecast> values,
         const std::string& function_id, double horizon) {
        return riemann_sum(grid_from(values, horizon), parse_function_id(function_id));
      },
      py::arg("values"), py::arg("function_id"), py::arg("horizon") = 1.0);
  m.def(
      "trapezoid",
      [](py::array_t<double, py::array::c_style | py::array::forcecast> values,
         const std::string& function_id, double horizon) {
        return trapezoid(grid_from(values, horizon), parse_function_id(function_id));
      },
      py::arg("values"), py::arg("function_id"), py::arg("horizon") = 1.0);
  m.def(
      "occupation_oracle",
      [](py::array_t<double, py::array::c_style | py::array::forcecast> values,
         const std::string& function_id, double horizon) {
        const auto g = grid_from(values, horizon);
        return occupation_oracle(g, parse_function_id(function_id), horizon);
      },
      py::arg("values"), py::arg("function_id"), py::arg("horizon") = 1.0);

  m.def(
      "theoretical_rate",
      [](const std::string& process, double s, const std::string& context, double rho,
         bool sharp_indicator) {
        const auto ctx = context == "local-time" ? ErrorContext::LocalTime : ErrorContext::L2Error;
        return prediction_dict(
            theoretical_rate(process_from(process), s, ctx, RateOptions{sharp_indicator, rho}));
      },
      py::arg("process"), py::arg("s") = 0.0, py::arg("context") = "l2", py::arg("rho") = 0.0,
      py::arg("sharp_indicator") = false);

  m.def(
      "sobolev_norm",
      [](const std::string& function_id, double s, double p, double truncation) -> py::object {
        const auto r = sobolev_norm(parse_function_id(function_id), s, p, truncation);
        if (is_divergent(r)) return py::none();
        return py::float_(std::get<NormEstimate>(r).value);
      },
      py::arg("function_id"), py::arg("s"), py::arg("p") = 2.0,
      py::arg("truncation") = kDefaultTruncation, "None when the integral diverges.");

  m.def(
      "fourier_bound",
      [](const std::string& process, const std::string& function_id, std::size_t n,
         double horizon) {
        return fourier_bound_evaluator(process_from(process), parse_function_id(function_id), n,
                                       horizon);
      },
      py::arg("process"), py::arg("function_id"), py::arg("n"), py::arg("horizon") = 1.0);

  m.def(
      "run_experiment",
      [](const std::string& config_text) {
        const auto c = parse_config_text(config_text);
        nlohmann::json j;
        py::gil_scoped_release release;
        switch (c.kind) {
          case ExperimentKind::RateStudy: j = summary_json(c, rate_study(c)); break;
          case ExperimentKind::CLTStudy: j = summary_json(c, clt_experiment(c)); break;
          case ExperimentKind::EfficiencyStudy: j = summary_json(c, efficiency_experiment(c)); break;
          case ExperimentKind::LocalTimeStudy: j = summary_json(c, local_time_experiment(c)); break;
          case ExperimentKind::TScalingStudy: j = summary_json(c, t_scaling_experiment(c)); break;
        }
        return dump_json(j, -1);
      },
      py::arg("config"), "Run the experiment a config describes; returns summary JSON text.");

  m.attr("__version__") = std::string(kToolVersion);
}
