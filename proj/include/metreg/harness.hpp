// Experiment harness: binds learners, adversaries, and instance processes
// into named, seeded scenarios; runs replicas in parallel; emits regret
// traces as CSV plus a JSON summary sidecar; and exposes the oracle
// verification suites and the process diagnostics behind the CLI.
#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace metreg {

// Config errors: unknown scenario or suite, unusable parameter, horizon
// mismatch (component-mismatch), or an unwritable output path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string scenario;
  std::int64_t horizon{0};  // 0 = the scenario's default
  int replicas{1};
  std::uint64_t seed{1};
  // Artifact base path; "<out_path>.csv" and "<out_path>.json" are written
  // (a trailing ".csv" is stripped first). Empty = in-memory trace only.
  std::string out_path{};
  std::map<std::string, std::string> params{};  // scenario overrides
};

struct TraceRow {
  std::int64_t t{0};
  double learner_cum{0.0};
  std::vector<double> comparator_cum;  // parallel to comparator_names
  double excess_avg{0.0};              // (learner - best comparator) / t
};

// Per-step records, replica-averaged when replicas > 1 (the reduction sums
// in replica order, so it is deterministic). Cumulative columns are
// non-decreasing.
struct RegretTrace {
  std::vector<std::string> comparator_names;
  std::vector<TraceRow> rows;
  double final_learner_avg{0.0};
  double final_excess_avg{0.0};
  std::string csv_path{};   // set when artifacts were written
  std::string json_path{};
};

struct ScenarioInfo {
  std::string name;
  std::int64_t default_horizon{0};
  std::string summary;
  std::vector<std::string> param_keys;  // accepted --param overrides
};

std::vector<ScenarioInfo> scenario_list();

// Runs the named scenario for `horizon` steps per replica: the learner
// predicts, the adversary reveals, both losses are recorded against every
// registered comparator. Master seed splits into named child streams per
// replica; adding a comparator never perturbs any stream. Equal configs
// produce byte-identical artifacts. Throws ConfigError.
RegretTrace run_experiment(const ExperimentConfig& config);

// ---- oracle verification suites -------------------------------------------

struct VerifyReport {
  std::string suite;
  bool passed{false};
  std::vector<std::string> lines;  // per-check results; violations verbatim
};

// Suites: metric-axioms, hedge-bounds, loss-identities, c1nn-invariants,
// ftime-certify. Failures are report content, never exceptions.
std::vector<std::string> verify_suite_names();
VerifyReport run_verify_suite(const std::string& suite);

// ---- process diagnostics ---------------------------------------------------

struct DiagReport {
  std::string process;
  std::string partition;
  std::vector<std::int64_t> horizons;        // dyadic prefix checkpoints
  std::vector<std::int64_t> distinct_cells;  // per checkpoint
};

// Streams the named process through the named partition ("identity",
// "dyadic", "unit") and reports distinct-cell counts at dyadic horizons.
DiagReport run_diag(const std::string& process_kind,
                    const std::string& partition, std::int64_t horizon,
                    std::uint64_t seed);

// METREG_OUT_DIR when set, "." otherwise.
std::string default_out_dir();

}  // namespace metreg
