#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cachegeo/analytics.hpp"
#include "cachegeo/experiments.hpp"
#include "cachegeo/optimizer.hpp"
#include "cachegeo/placement.hpp"
#include "cachegeo/simulator.hpp"

namespace py = pybind11;
using namespace cachegeo;
namespace ex = cachegeo::experiments;

namespace {

ex::Config config_from(const std::string& ini, const std::map<std::string, std::string>& overrides) {
  ex::Config c = ex::parse_config(ini);
  for (const auto& [key, value] : overrides) ex::set_value(c, key, value);
  return c;
}

py::tuple table_tuple(const ex::Table& t) { return py::make_tuple(t.header, t.rows); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "cachegeo core bindings";
  m.attr("__version__") = CACHEGEO_VERSION;

  py::register_exception<ex::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericFailure>(m, "NumericFailure", PyExc_ArithmeticError);

  py::class_<ContentLibrary>(m, "ContentLibrary")
      .def_readonly("popularity", &ContentLibrary::popularity)
      .def_readonly("rates", &ContentLibrary::rates)
      .def("count", &ContentLibrary::count);

  py::class_<NetworkParams>(m, "NetworkParams")
      .def(py::init<>())
      .def_readwrite("helper_density", &NetworkParams::helper_density)
      .def_readwrite("user_density", &NetworkParams::user_density)
      .def_readwrite("tx_power", &NetworkParams::tx_power)
      .def_readwrite("noise_power", &NetworkParams::noise_power)
      .def_readwrite("pathloss_exp", &NetworkParams::pathloss_exp)
      .def_readwrite("fading_desired", &NetworkParams::fading_desired)
      .def_readwrite("fading_interf", &NetworkParams::fading_interf);

  py::class_<CachingPolicy>(m, "CachingPolicy")
      .def(py::init([](std::vector<double> probs, int memory) { return CachingPolicy{std::move(probs), memory}; }),
           py::arg("probs"), py::arg("memory"))
      .def_readwrite("probs", &CachingPolicy::probs)
      .def_readwrite("memory", &CachingPolicy::memory);

  py::class_<SolveReport>(m, "SolveReport")
      .def_readonly("policy", &SolveReport::policy)
      .def_readonly("omega", &SolveReport::omega)
      .def_readonly("mu", &SolveReport::mu)
      .def_readonly("objective", &SolveReport::objective)
      .def_readonly("iterations", &SolveReport::iterations)
      .def_readonly("kkt_residual", &SolveReport::kkt_residual);

  py::class_<InterferenceConstants>(m, "InterferenceConstants")
      .def_readonly("c", &InterferenceConstants::c)
      .def_readonly("tau", &InterferenceConstants::tau)
      .def_readonly("A", &InterferenceConstants::A)
      .def_readonly("one_minus_A", &InterferenceConstants::one_minus_A)
      .def_readonly("B", &InterferenceConstants::B);

  py::class_<SimulationOptions>(m, "SimulationOptions")
      .def(py::init<>())
      .def_readwrite("trials", &SimulationOptions::trials)
      .def_readwrite("seed", &SimulationOptions::seed)
      .def_readwrite("radius", &SimulationOptions::radius)
      .def_readwrite("threads", &SimulationOptions::threads);

  py::class_<Estimate>(m, "Estimate")
      .def_readonly("value", &Estimate::value)
      .def_readonly("std_error", &Estimate::std_error)
      .def_readonly("trials", &Estimate::trials)
      .def_readonly("successes", &Estimate::successes);

  py::class_<InterferenceReport>(m, "InterferenceReport")
      .def_readonly("instantaneous", &InterferenceReport::instantaneous)
      .def_readonly("mean_approx", &InterferenceReport::mean_approx)
      .def_readonly("long_term", &InterferenceReport::long_term)
      .def_readonly("mean_load_instantaneous", &InterferenceReport::mean_load_instantaneous)
      .def_readonly("mean_load_long_term", &InterferenceReport::mean_load_long_term)
      .def_readonly("served_trials", &InterferenceReport::served_trials)
      .def_readonly("radius", &InterferenceReport::radius);

  py::enum_<Baseline>(m, "Baseline")
      .value("most_popular", Baseline::most_popular)
      .value("uniform", Baseline::uniform);

  m.def("zipf_popularity", &zipf_popularity, py::arg("count"), py::arg("gamma"));
  m.def("uniform_rates", &uniform_rates, py::arg("rho_max"), py::arg("count"), py::arg("seed"));
  m.def("constant_rates", &constant_rates, py::arg("rho"), py::arg("count"));
  m.def("make_library", &make_library, py::arg("popularity"), py::arg("rates"));
  m.def("kappa", &kappa, py::arg("params"));
  m.def("xi1_cdf", &xi1_cdf, py::arg("xi"), py::arg("p"), py::arg("params"));
  m.def("success_noise", &success_noise, py::arg("library"), py::arg("params"), py::arg("policy"));
  m.def("interference_constants", &interference_constants, py::arg("library"), py::arg("alpha"), py::arg("c"));
  m.def("rayleigh_lower_bound", &rayleigh_lower_bound, py::arg("library"), py::arg("constants"), py::arg("policy"));
  m.def("nakagami_lower_bound", &nakagami_lower_bound, py::arg("library"), py::arg("params"), py::arg("policy"),
        py::arg("c"));
  m.def("mean_load_m1", &mean_load_m1, py::arg("f"), py::arg("p"), py::arg("user_density"),
        py::arg("helper_density"));
  m.def("load_based_c", &load_based_c, py::arg("memory"), py::arg("user_density"), py::arg("helper_density"));

  m.def(
      "optimize_noise",
      [](const ContentLibrary& lib, const NetworkParams& p, int memory) { return optimize_noise(lib, p, memory); },
      py::arg("library"), py::arg("params"), py::arg("memory"));
  m.def(
      "optimize_interference",
      [](const ContentLibrary& lib, const InterferenceConstants& c, int memory) {
        return optimize_interference(lib, c, memory);
      },
      py::arg("library"), py::arg("constants"), py::arg("memory"));
  m.def("baseline_policy", &baseline_policy, py::arg("kind"), py::arg("count"), py::arg("memory"));
  m.def("policy_spread", &policy_spread, py::arg("policy"));

  m.def(
      "build_and_sample",
      [](const CachingPolicy& policy, const std::vector<double>& u) {
        const BlockLayout layout = build_block_layout(policy);
        std::vector<std::vector<std::size_t>> out;
        out.reserve(u.size());
        for (double v : u) out.push_back(sample_cache(layout, v));
        return out;
      },
      py::arg("policy"), py::arg("u"), "Cache contents for each uniform draw in u.");

  m.def("simulate_noise_limited", &simulate_noise_limited, py::arg("library"), py::arg("params"), py::arg("policy"),
        py::arg("options"), py::call_guard<py::gil_scoped_release>());
  m.def("simulate_interference", &simulate_interference, py::arg("library"), py::arg("params"), py::arg("policy"),
        py::arg("options"), py::call_guard<py::gil_scoped_release>());
  m.def("sample_xi_min", &sample_xi_min, py::arg("params"), py::arg("p"), py::arg("samples"), py::arg("seed"),
        py::arg("radius") = 0.0, py::call_guard<py::gil_scoped_release>());

  m.def(
      "evaluate",
      [](const std::string& scenario, const std::string& ini, const std::map<std::string, std::string>& overrides) {
        return table_tuple(ex::evaluate(ex::parse_scenario(scenario), config_from(ini, overrides)));
      },
      py::arg("scenario"), py::arg("config") = "", py::arg("overrides") = std::map<std::string, std::string>{},
      "Run a scenario from INI text; returns (header, rows).");
  m.def(
      "run",
      [](const std::string& scenario, const std::string& ini, const std::map<std::string, std::string>& overrides) {
        const auto r = ex::run(ex::parse_scenario(scenario), config_from(ini, overrides));
        return py::make_tuple(r.csv_path, r.manifest_path, r.rows);
      },
      py::arg("scenario"), py::arg("config") = "", py::arg("overrides") = std::map<std::string, std::string>{},
      "Run a scenario and write CSV plus manifest; returns (csv_path, manifest_path, rows).");
  m.def("list_figures", [] { return table_tuple(ex::list_figures()); });
}
