// Python bindings for the main operations: scenario runs, verification
// suites, and process diagnostics. Heavy work runs with the GIL released;
// python objects are only built afterwards.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <string>

#include "metreg/harness.hpp"

namespace py = pybind11;
using namespace metreg;

namespace {

py::dict trace_to_dict(const RegretTrace& trace, bool include_trace) {
  py::dict out;
  out["comparators"] = trace.comparator_names;
  out["rows"] = trace.rows.size();
  out["final_learner_avg"] = trace.final_learner_avg;
  out["final_excess_avg"] = trace.final_excess_avg;
  out["csv_path"] = trace.csv_path;
  out["json_path"] = trace.json_path;
  if (include_trace) {
    py::list ts, learner, excess;
    py::dict comp_cols;
    std::vector<py::list> cols(trace.comparator_names.size());
    for (const TraceRow& row : trace.rows) {
      ts.append(row.t);
      learner.append(row.learner_cum);
      excess.append(row.excess_avg);
      for (std::size_t c = 0; c < cols.size(); ++c)
        cols[c].append(row.comparator_cum[c]);
    }
    for (std::size_t c = 0; c < cols.size(); ++c)
      comp_cols[py::str(trace.comparator_names[c])] = cols[c];
    py::dict tr;
    tr["t"] = ts;
    tr["learner_cum"] = learner;
    tr["comparator_cum"] = comp_cols;
    tr["excess_avg"] = excess;
    out["trace"] = tr;
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(metreg, m) {
  m.doc() = "Universal online regression on metric spaces: scenario simulator, "
            "verification suites, and instance-stream diagnostics.";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("scenarios", [] {
    py::list out;
    for (const ScenarioInfo& s : scenario_list()) {
      py::dict d;
      d["name"] = s.name;
      d["default_horizon"] = s.default_horizon;
      d["summary"] = s.summary;
      d["params"] = s.param_keys;
      out.append(d);
    }
    return out;
  }, "List the registered scenarios with their default horizons and accepted params.");

  m.def(
      "run",
      [](const std::string& scenario, std::int64_t horizon, int replicas,
         std::uint64_t seed, const std::string& out,
         const std::map<std::string, std::string>& params, bool trace) {
        ExperimentConfig cfg;
        cfg.scenario = scenario;
        cfg.horizon = horizon;
        cfg.replicas = replicas;
        cfg.seed = seed;
        cfg.out_path = out;
        cfg.params = params;
        RegretTrace result;
        {
          py::gil_scoped_release release;
          result = run_experiment(cfg);
        }
        return trace_to_dict(result, trace);
      },
      py::arg("scenario"), py::kw_only(), py::arg("horizon") = 0,
      py::arg("replicas") = 1, py::arg("seed") = 1, py::arg("out") = "",
      py::arg("params") = std::map<std::string, std::string>{},
      py::arg("trace") = false,
      "Run a scenario and return its summary; horizon 0 means the scenario "
      "default. When `out` is set, `<out>.csv` and `<out>.json` are written. "
      "With trace=True the per-step cumulative columns are included.");

  m.def("verify_suites", [] { return verify_suite_names(); },
        "Names of the verification suites.");

  m.def(
      "verify",
      [](const std::string& suite) {
        VerifyReport report;
        {
          py::gil_scoped_release release;
          report = run_verify_suite(suite);
        }
        py::dict d;
        d["suite"] = report.suite;
        d["passed"] = report.passed;
        d["lines"] = report.lines;
        return d;
      },
      py::arg("suite"),
      "Run one verification suite and return its per-check lines.");

  m.def(
      "diag",
      [](const std::string& process, const std::string& partition,
         std::int64_t horizon, std::uint64_t seed) {
        DiagReport report;
        {
          py::gil_scoped_release release;
          report = run_diag(process, partition, horizon, seed);
        }
        py::dict d;
        d["process"] = report.process;
        d["partition"] = report.partition;
        d["horizons"] = report.horizons;
        d["distinct_cells"] = report.distinct_cells;
        return d;
      },
      py::arg("process"), py::kw_only(), py::arg("partition") = "identity",
      py::arg("horizon") = 1024, py::arg("seed") = 1,
      "Stream a process through a partition and report distinct-cell counts "
      "at dyadic horizons.");

  m.def("default_out_dir", [] { return default_out_dir(); },
        "Artifact directory used by the CLI when --out is omitted.");
}
