#include "metreg/harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <thread>
#include <utility>

#include "json.hpp"
#include "metreg/adversary.hpp"
#include "metreg/c1nn.hpp"
#include "metreg/cluster.hpp"
#include "metreg/ewa.hpp"
#include "metreg/learner.hpp"
#include "metreg/process.hpp"
#include "metreg/rng.hpp"
#include "metreg/selector.hpp"
#include "metreg/space.hpp"
#include "metreg/value.hpp"

namespace metreg {

namespace {

using Params = std::map<std::string, std::string>;
using Comparator = std::pair<std::string, std::function<Value(const Value&)>>;

double param_double(const Params& p, const std::string& key, double fallback) {
  const auto it = p.find(key);
  if (it == p.end()) return fallback;
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(it->second);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("parameter " + key + ": not a number: " + it->second);
  }
}

std::int64_t param_int(const Params& p, const std::string& key,
                       std::int64_t fallback) {
  const auto it = p.find(key);
  if (it == p.end()) return fallback;
  try {
    std::size_t used = 0;
    const std::int64_t v = std::stoll(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(it->second);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("parameter " + key + ": not an integer: " + it->second);
  }
}

std::string param_str(const Params& p, const std::string& key,
                      const std::string& fallback) {
  const auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

std::function<Value(const Value&)> fixed_comparator(Value v) {
  return [v = std::move(v)](const Value&) { return v; };
}

// ---- scenario-local adversaries and baseline learners ----------------------

class FunctionAdversary final : public ResponseAdversary {
 public:
  FunctionAdversary(std::string name, std::function<Value(const Value&)> f)
      : name_(std::move(name)), f_(std::move(f)) {}
  std::string name() const override { return name_; }
  Value respond(const Value& x, const Value&) override { return f_(x); }

 private:
  std::string name_;
  std::function<Value(const Value&)> f_;
};

class NoisyValueAdversary final : public ResponseAdversary {
 public:
  NoisyValueAdversary(double center, double width, RngStream rng)
      : center_(center), width_(width), rng_(rng) {}
  std::string name() const override { return "noisy-value"; }
  Value respond(const Value&, const Value&) override {
    return center_ + width_ * (2.0 * rng_.uniform() - 1.0);
  }

 private:
  double center_, width_;
  RngStream rng_;
};

class FixedLearner final : public OnlineLearner {
 public:
  explicit FixedLearner(Value v) : v_(std::move(v)) {}
  std::string name() const override { return "fixed"; }
  Value predict(const Value&) override { return v_; }
  void observe(const Value&) override {}

 private:
  Value v_;
};

class FollowLastLearner final : public OnlineLearner {
 public:
  explicit FollowLastLearner(Value start) : last_(std::move(start)) {}
  std::string name() const override { return "follow-last"; }
  Value predict(const Value&) override { return last_; }
  void observe(const Value& y) override { last_ = y; }

 private:
  Value last_;
};

// Bayes-consistent play against the pathological hard sequence: always
// predict the hindsight-block candidate whose revealed bits match the
// responses so far (unrevealed bits zero). Expected step loss is exactly
// 3/4 -- the universal floor -- while the realized comparator pays 1/2.
class PathoConsistentLearner final : public OnlineLearner {
 public:
  explicit PathoConsistentLearner(int k) : part_(patho_partition(k)) {}
  std::string name() const override { return "patho-consistent"; }
  Value predict(const Value&) override {
    std::int64_t j = part_.j_begin;
    for (std::size_t v = 0; v < bits_.size(); ++v)
      if (bits_[v]) j += std::int64_t{1} << v;
    return j;
  }
  void observe(const Value& y) override {
    const auto u = static_cast<std::int64_t>(bits_.size());  // 0-based step
    const std::int64_t r = as_index(y) - part_.i_begin - 4 * u;
    bits_.push_back(((r >> 1) & 1) != 0);
  }

 private:
  PathoPartition part_;
  std::vector<bool> bits_;
};

// ---- scenario registry ------------------------------------------------------

struct ReplicaSetup {
  std::shared_ptr<const ValueSpace> value_space;  // loss source
  std::unique_ptr<OnlineLearner> learner;
  std::unique_ptr<ResponseAdversary> adversary;
  std::unique_ptr<InstanceProcess> process;
  std::vector<Comparator> comparators;
};

struct Scenario {
  std::int64_t default_horizon;
  std::string summary;
  std::vector<std::string> param_keys;
  std::function<ReplicaSetup(std::uint64_t replica_seed, std::int64_t horizon,
                             const Params&)>
      build;
};

ReplicaSetup build_triangle(std::uint64_t rs, std::int64_t, const Params& p) {
  ReplicaSetup s;
  s.value_space = make_space("unit-disk");
  const Value center = Vec2{0.0, 0.0};
  const Value vertex = TriangleAdversary::vertex(0);
  const std::string learner = param_str(p, "learner", "mean-est");
  if (learner == "mean-est") {
    s.learner = std::make_unique<MeanEstLearner>(s.value_space,
                                                 child_stream(rs, "learner"));
  } else if (learner == "last") {
    s.learner = std::make_unique<FollowLastLearner>(center);
  } else if (learner == "vertex") {
    s.learner = std::make_unique<FixedLearner>(vertex);
  } else {
    throw ConfigError("triangle-mean-est: unknown learner " + learner +
                      " (expected mean-est, last, or vertex)");
  }
  s.adversary =
      std::make_unique<TriangleAdversary>(child_stream(rs, "adversary"));
  s.process = make_process("constant", ProcessParams{}, rs);
  s.comparators = {{"center", fixed_comparator(center)},
                   {"vertex", fixed_comparator(vertex)}};
  return s;
}

ReplicaSetup build_patho(std::uint64_t rs, std::int64_t horizon,
                         const Params& p) {
  const std::int64_t k = param_int(p, "k", 3);
  if (k < 1 || k > 62) throw ConfigError("patho-k3: k must be in [1, 62]");
  if (horizon != k)
    throw ConfigError("patho-k3: the game lasts exactly k steps; pass "
                      "--horizon " +
                      std::to_string(k));
  ReplicaSetup s;
  s.value_space = make_space("pathological");
  auto adversary = std::make_unique<PathoAdversary>(
      static_cast<int>(k), child_stream(rs, "adversary"));
  const std::int64_t jstar = adversary->comparator();
  s.adversary = std::move(adversary);
  s.learner = std::make_unique<PathoConsistentLearner>(static_cast<int>(k));
  s.process = make_process("constant", ProcessParams{}, rs);
  s.comparators = {{"hindsight", fixed_comparator(jstar)}};
  return s;
}

ReplicaSetup build_c1nn(std::uint64_t rs, std::int64_t, const Params& p) {
  const double delta = param_double(p, "delta", 0.5);
  const double thr = param_double(p, "threshold", 0.5);
  if (!(delta > 0.0) || delta > 1.0)
    throw ConfigError("c1nn-threshold: delta must be in (0, 1]");
  ReplicaSetup s;
  auto xspace = make_space("unit-interval");
  s.value_space = make_space("labels-2");
  const auto truth = [thr](const Value& x) {
    return Value{static_cast<std::int64_t>(as_real(x) >= thr)};
  };
  s.learner = std::make_unique<C1nnLearner>(
      xspace, delta, child_stream(rs, "learner"), Value{std::int64_t{0}});
  s.adversary = std::make_unique<FunctionAdversary>("threshold", truth);
  s.process = make_process("iid_uniform", ProcessParams{}, rs);
  s.comparators = {{"truth", truth},
                   {"label0", fixed_comparator(Value{std::int64_t{0}})}};
  return s;
}

ReplicaSetup build_combiner(std::uint64_t rs, std::int64_t, const Params& p) {
  const double center = param_double(p, "center", 1.0);
  const double noise = param_double(p, "noise", 0.5);
  const std::int64_t cap = param_int(p, "max_experts", 0);
  if (noise < 0.0) throw ConfigError("combiner-synthetic: noise must be >= 0");
  if (cap < 0) throw ConfigError("combiner-synthetic: max_experts must be >= 0");
  ReplicaSetup s;
  s.value_space = make_space("real-line");
  auto space = s.value_space;
  ExpertFactory factory = [space, rs](std::size_t i) {
    return std::make_unique<MeanEstLearner>(space,
                                            child_stream(rs, "expert", i));
  };
  LossFn loss = [space](const Value& a, const Value& b) {
    return space->loss(a, b);
  };
  s.learner = std::make_unique<CombinerLearner>(
      std::move(factory), std::move(loss), child_stream(rs, "learner"),
      cap == 0 ? static_cast<std::size_t>(-1) : static_cast<std::size_t>(cap));
  s.adversary = std::make_unique<NoisyValueAdversary>(
      center, noise, child_stream(rs, "adversary"));
  s.process = make_process("constant", ProcessParams{}, rs);
  s.comparators = {{"center", fixed_comparator(center)},
                   {"anchor", fixed_comparator(0.0)}};
  return s;
}

ReplicaSetup build_feps(std::uint64_t rs, std::int64_t, const Params& p) {
  const double eps = param_double(p, "eps", 0.4);
  if (!(eps > 0.0) || eps > 1.0)
    throw ConfigError("feps-labels: eps must be in (0, 1]");
  ReplicaSetup s;
  auto xspace = make_space("unit-interval");
  s.value_space = make_space("labels-3");
  const auto truth = [](const Value& x) {
    const double v = as_real(x);
    return Value{static_cast<std::int64_t>(v < 1.0 / 3 ? 0 : v < 2.0 / 3 ? 1 : 2)};
  };
  s.learner = std::make_unique<FEpsLearner>(xspace, s.value_space, eps,
                                            child_stream(rs, "tree"),
                                            child_stream(rs, "learner"));
  s.adversary = std::make_unique<FunctionAdversary>("piecewise", truth);
  s.process = make_process("iid_uniform", ProcessParams{}, rs);
  s.comparators = {{"truth", truth},
                   {"label0", fixed_comparator(Value{std::int64_t{0}})}};
  return s;
}

ReplicaSetup build_ftime(std::uint64_t rs, std::int64_t, const Params& p) {
  const double eps = param_double(p, "eps", 0.5);
  const double eta = param_double(p, "eta", 0.4);
  if (!(eps > 0.0) || eps > 1.0)
    throw ConfigError("ftime-blocks: eps must be in (0, 1]");
  if (!(eta > 0.0) || eta > 1.0)
    throw ConfigError("ftime-blocks: eta must be in (0, 1]");
  ReplicaSetup s;
  auto xspace = make_space("unit-interval");
  s.value_space = make_space("labels-2");
  const auto truth = [](const Value& x) {
    return Value{static_cast<std::int64_t>(as_real(x) >= 0.5)};
  };
  s.learner = std::make_unique<FEpsBlockLearner>(
      xspace, s.value_space, eps, eta, child_stream(rs, "tree"),
      derive_seed(rs, "blocks"));
  s.adversary = std::make_unique<FunctionAdversary>("threshold", truth);
  s.process = make_process("iid_uniform", ProcessParams{}, rs);
  s.comparators = {{"truth", truth},
                   {"label0", fixed_comparator(Value{std::int64_t{0}})}};
  return s;
}

ReplicaSetup build_crf(std::uint64_t rs, std::int64_t horizon,
                       const Params& p) {
  const double alpha = param_double(p, "alpha", 1.0);
  std::string space_name;
  if (alpha == 1.0) {
    space_name = "real-line";
  } else if (alpha == 2.0) {
    space_name = "real-line-a2";
  } else {
    throw ConfigError("crf-spikes: alpha must be 1 or 2");
  }
  ReplicaSetup s;
  s.value_space = make_space(space_name);
  auto space = s.value_space;
  LevelFactory levels = [space, rs](std::int64_t M) {
    return std::make_unique<MeanEstLearner>(
        space, child_stream(rs, "level", static_cast<std::uint64_t>(M)));
  };
  s.learner = std::make_unique<TruncationBank>(space, std::move(levels),
                                               child_stream(rs, "learner"));
  s.adversary = std::make_unique<CrfAdversary>(alpha, horizon,
                                               child_stream(rs, "adversary"));
  s.process = make_process("constant", ProcessParams{}, rs);
  s.comparators = {{"anchor", fixed_comparator(0.0)}};
  return s;
}

ReplicaSetup build_interval_cs(std::uint64_t rs, std::int64_t,
                               const Params& p) {
  const std::int64_t truth_index = param_int(p, "truth", 6);
  if (truth_index < 0) throw ConfigError("interval-cs: truth must be >= 0");
  ReplicaSetup s;
  auto xspace = make_space("unit-interval");
  s.value_space = make_space("unit-interval");
  auto family = std::make_shared<FunctionFamily>(xspace, s.value_space);
  const CellFunctionSpec spec =
      family->decode(static_cast<std::uint64_t>(truth_index));
  const auto truth = [family, spec](const Value& x) {
    return family->evaluate(spec, x);
  };
  s.learner = std::make_unique<CsLearner>(xspace, s.value_space,
                                          child_stream(rs, "learner"));
  s.adversary = std::make_unique<FunctionAdversary>("cells", truth);
  s.process = make_process("iid_uniform", ProcessParams{}, rs);
  s.comparators = {{"truth", truth}, {"anchor", fixed_comparator(0.0)}};
  return s;
}

const std::vector<std::pair<std::string, Scenario>>& registry() {
  static const std::vector<std::pair<std::string, Scenario>> table = {
      {"triangle-mean-est",
       {10000,
        "i.i.d. uniform triangle vertices on the unit disk; the "
        "mean-estimation aggregator beats every memorizing baseline",
        {"learner"},
        build_triangle}},
      {"patho-k3",
       {3,
        "hard bit-pair sequence on the pathological countable space; even "
        "consistent play pays 3/4 per step vs the comparator's exact 1/2",
        {"k"},
        build_patho}},
      {"c1nn-threshold",
       {20000,
        "noiseless threshold labels on the unit interval learned by the "
        "capped nearest-neighbor rule",
        {"delta", "threshold"},
        build_c1nn}},
      {"combiner-synthetic",
       {5000,
        "noisy constant responses on the real line; the selector combines a "
        "growing bank of mean estimators",
        {"center", "noise", "max_experts"},
        build_combiner}},
      {"feps-labels",
       {4000,
        "three-piece labels on the unit interval learned at a fixed "
        "epsilon resolution over tree-carved clusters",
        {"eps"},
        build_feps}},
      {"ftime-blocks",
       {4000,
        "threshold labels learned by restart-per-block finite-horizon "
        "forecasters inside tree-carved clusters",
        {"eps", "eta"},
        build_ftime}},
      {"crf-spikes",
       {2046,
        "doubling loss spikes at doubling times; the truncation-level "
        "selector keeps the average excess vs the anchor in check",
        {"alpha"},
        build_crf}},
      {"interval-cs",
       {10000,
        "two-piece cell function on the unit interval learned by the "
        "countable-family selector under an i.i.d. stream",
        {"truth"},
        build_interval_cs}},
  };
  return table;
}

const Scenario& find_scenario(const std::string& name) {
  for (const auto& entry : registry())
    if (entry.first == name) return entry.second;
  std::string known;
  for (const auto& entry : registry()) {
    if (!known.empty()) known += ", ";
    known += entry.first;
  }
  throw ConfigError("unknown scenario: " + name + " (known: " + known + ")");
}

// ---- trace assembly ---------------------------------------------------------

struct ReplicaResult {
  std::vector<double> learner;             // cumulative per step
  std::vector<std::vector<double>> comps;  // per comparator, cumulative
};

ReplicaResult run_replica(const Scenario& sc, const ExperimentConfig& cfg,
                          std::int64_t horizon, std::uint64_t replica) {
  ReplicaSetup setup =
      sc.build(derive_seed(cfg.seed, "replica", replica), horizon, cfg.params);
  const std::size_t n_comp = setup.comparators.size();
  ReplicaResult res;
  res.learner.reserve(static_cast<std::size_t>(horizon));
  res.comps.assign(n_comp, {});
  for (auto& c : res.comps) c.reserve(static_cast<std::size_t>(horizon));
  double learner_cum = 0.0;
  std::vector<double> comp_cum(n_comp, 0.0);
  for (std::int64_t t = 1; t <= horizon; ++t) {
    const Value x = setup.process->next();
    const Value prediction = setup.learner->predict(x);
    const Value y = setup.adversary->respond(x, prediction);
    setup.learner->observe(y);
    learner_cum += setup.value_space->loss(prediction, y);
    res.learner.push_back(learner_cum);
    for (std::size_t c = 0; c < n_comp; ++c) {
      comp_cum[c] += setup.value_space->loss(setup.comparators[c].second(x), y);
      res.comps[c].push_back(comp_cum[c]);
    }
  }
  return res;
}

std::string format_double(double v) {
  std::array<char, 32> buf;
  const auto [end, ec] =
      std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

void write_artifacts(const ExperimentConfig& cfg, std::int64_t horizon,
                     RegretTrace& trace) {
  std::string base = cfg.out_path;
  if (base.size() > 4 && base.ends_with(".csv"))
    base = base.substr(0, base.size() - 4);
  const std::string csv_path = base + ".csv";
  const std::string json_path = base + ".json";
  std::error_code ec;
  const auto parent = std::filesystem::path(csv_path).parent_path();
  if (!parent.empty()) {
    std::filesystem::create_directories(parent, ec);
    if (ec)
      throw ConfigError("cannot create output directory " + parent.string() +
                        ": " + ec.message());
  }

  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) throw ConfigError("cannot write " + csv_path);
  csv << "t,loss_learner_cum";
  for (const auto& name : trace.comparator_names)
    csv << ",loss_" << name << "_cum";
  csv << ",excess_avg\n";
  for (const TraceRow& row : trace.rows) {
    csv << row.t << ',' << format_double(row.learner_cum);
    for (const double c : row.comparator_cum) csv << ',' << format_double(c);
    csv << ',' << format_double(row.excess_avg) << '\n';
  }
  csv.flush();
  if (!csv) throw ConfigError("failed while writing " + csv_path);

  nlohmann::ordered_json j;
  j["config"] = {{"scenario", cfg.scenario},
                 {"horizon", horizon},
                 {"replicas", cfg.replicas},
                 {"seed", cfg.seed},
                 {"params", cfg.params}};
  j["comparators"] = trace.comparator_names;
  nlohmann::ordered_json finals;
  const TraceRow& last = trace.rows.back();
  finals["learner_cum"] = last.learner_cum;
  finals["learner_avg"] = trace.final_learner_avg;
  nlohmann::ordered_json comp_finals;
  for (std::size_t c = 0; c < trace.comparator_names.size(); ++c)
    comp_finals[trace.comparator_names[c]] = last.comparator_cum[c];
  finals["comparator_cum"] = std::move(comp_finals);
  finals["excess_avg"] = trace.final_excess_avg;
  j["final"] = std::move(finals);
  j["steps"] = static_cast<std::int64_t>(trace.rows.size());

  std::ofstream js(json_path, std::ios::binary);
  if (!js) throw ConfigError("cannot write " + json_path);
  js << j.dump(2) << '\n';
  js.flush();
  if (!js) throw ConfigError("failed while writing " + json_path);

  trace.csv_path = csv_path;
  trace.json_path = json_path;
}

}  // namespace

std::vector<ScenarioInfo> scenario_list() {
  std::vector<ScenarioInfo> out;
  for (const auto& [name, sc] : registry())
    out.push_back({name, sc.default_horizon, sc.summary, sc.param_keys});
  return out;
}

RegretTrace run_experiment(const ExperimentConfig& cfg) {
  const Scenario& sc = find_scenario(cfg.scenario);
  const std::int64_t horizon =
      cfg.horizon > 0 ? cfg.horizon : sc.default_horizon;
  if (cfg.horizon < 0) throw ConfigError("horizon must be positive");
  if (cfg.replicas < 1) throw ConfigError("replicas must be >= 1");
  for (const auto& [key, value] : cfg.params) {
    if (std::find(sc.param_keys.begin(), sc.param_keys.end(), key) ==
        sc.param_keys.end())
      throw ConfigError("scenario " + cfg.scenario +
                        " takes no parameter named " + key);
  }

  // Probe build: surfaces component mismatches before any thread starts and
  // fixes the comparator schema.
  std::vector<std::string> comparator_names;
  {
    const ReplicaSetup probe =
        sc.build(derive_seed(cfg.seed, "replica", 0), horizon, cfg.params);
    for (const auto& comparator : probe.comparators)
      comparator_names.push_back(comparator.first);
  }

  // Replicas are independent: each derives every stream from its own child
  // seed, runs on whichever worker picks it up, and lands in its own slot.
  const int replicas = cfg.replicas;
  std::vector<ReplicaResult> results(static_cast<std::size_t>(replicas));
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const int workers = static_cast<int>(
      std::min<std::uint64_t>(hw, static_cast<std::uint64_t>(replicas)));
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int r = next.fetch_add(1); r < replicas; r = next.fetch_add(1))
          results[static_cast<std::size_t>(r)] =
              run_replica(sc, cfg, horizon, static_cast<std::uint64_t>(r));
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& err : errors)
    if (err) std::rethrow_exception(err);

  // Deterministic reduction: per step, sum across replicas in index order.
  RegretTrace trace;
  trace.comparator_names = comparator_names;
  const std::size_t n_comp = comparator_names.size();
  trace.rows.resize(static_cast<std::size_t>(horizon));
  for (std::int64_t t = 0; t < horizon; ++t) {
    TraceRow& row = trace.rows[static_cast<std::size_t>(t)];
    row.t = t + 1;
    double sum = 0.0;
    for (int r = 0; r < replicas; ++r)
      sum += results[static_cast<std::size_t>(r)]
                 .learner[static_cast<std::size_t>(t)];
    row.learner_cum = sum / replicas;
    row.comparator_cum.resize(n_comp);
    double best = row.learner_cum;
    for (std::size_t c = 0; c < n_comp; ++c) {
      double csum = 0.0;
      for (int r = 0; r < replicas; ++r)
        csum += results[static_cast<std::size_t>(r)]
                    .comps[c][static_cast<std::size_t>(t)];
      row.comparator_cum[c] = csum / replicas;
      if (c == 0 || row.comparator_cum[c] < best) best = row.comparator_cum[c];
    }
    if (n_comp == 0) best = 0.0;
    row.excess_avg = (row.learner_cum - best) / static_cast<double>(row.t);
  }
  const TraceRow& last = trace.rows.back();
  trace.final_learner_avg = last.learner_cum / static_cast<double>(last.t);
  trace.final_excess_avg = last.excess_avg;

  if (!cfg.out_path.empty()) write_artifacts(cfg, horizon, trace);
  return trace;
}

// ---- verification suites ----------------------------------------------------

namespace {

void check_line(VerifyReport& report, bool ok, const std::string& line) {
  report.lines.push_back(line + (ok ? " -> ok" : " -> VIOLATION"));
  report.passed = report.passed && ok;
}

VerifyReport suite_metric_axioms() {
  VerifyReport report{"metric-axioms", true, {}};
  auto space = make_space("pathological");
  const std::int64_t limit = 71;
  bool identity_ok = true, pairs_ok = true, triangle_ok = true;
  std::vector<std::string> violations;
  for (std::int64_t a = 0; a < limit; ++a)
    if (space->distance(a, a) != 0.0) {
      identity_ok = false;
      violations.push_back("d(" + std::to_string(a) + "," + std::to_string(a) +
                           ") != 0");
    }
  for (std::int64_t a = 0; a < limit; ++a) {
    for (std::int64_t b = a + 1; b < limit; ++b) {
      const double dab = space->distance(a, b);
      if (dab <= 0.0 || dab != space->distance(b, a)) {
        pairs_ok = false;
        violations.push_back("pair (" + std::to_string(a) + "," +
                             std::to_string(b) + "): d=" +
                             format_double(dab));
      }
    }
  }
  std::int64_t triples = 0;
  for (std::int64_t a = 0; a < limit; ++a) {
    for (std::int64_t b = 0; b < limit; ++b) {
      for (std::int64_t c = 0; c < limit; ++c) {
        ++triples;
        const double lhs = space->distance(a, c);
        const double rhs = space->distance(a, b) + space->distance(b, c);
        if (lhs > rhs) {
          triangle_ok = false;
          if (violations.size() < 10)
            violations.push_back(
                "triple (" + std::to_string(a) + "," + std::to_string(b) +
                "," + std::to_string(c) + "): d(a,c)=" + format_double(lhs) +
                " > d(a,b)+d(b,c)=" + format_double(rhs));
        }
      }
    }
  }
  check_line(report, identity_ok,
             "identity: " + std::to_string(limit) + " points");
  check_line(report, pairs_ok,
             "symmetry and positivity: " +
                 std::to_string(limit * (limit - 1) / 2) + " pairs");
  check_line(report, triangle_ok,
             "triangle inequality: " + std::to_string(triples) + " triples");
  for (const auto& v : violations) report.lines.push_back("  " + v);
  return report;
}

VerifyReport suite_hedge_bounds() {
  VerifyReport report{"hedge-bounds", true, {}};
  const std::int64_t T = 1000;
  for (const std::size_t n : {std::size_t{2}, std::size_t{4}, std::size_t{16}}) {
    double worst_slack = -1e300;
    bool ok = true;
    for (int run = 0; run < 100; ++run) {
      RngStream rng = child_stream(2024, "hedge-" + std::to_string(n),
                                   static_cast<std::uint64_t>(run));
      std::vector<std::vector<double>> table(
          static_cast<std::size_t>(T), std::vector<double>(n, 0.0));
      for (auto& row : table)
        for (double& v : row) v = rng.uniform();
      const double eta = hedge_rate(1.0, n, T);
      std::vector<Value> candidates;
      for (std::size_t i = 0; i < n; ++i)
        candidates.push_back(static_cast<std::int64_t>(i));
      HedgeState hedge(candidates, eta);
      const LossFn loss = [&table](const Value& cand, const Value& y) {
        return table[static_cast<std::size_t>(as_index(y))]
                    [static_cast<std::size_t>(as_index(cand))];
      };
      double mixture = 0.0;
      for (std::int64_t t = 0; t < T; ++t) {
        const Value y = t;
        mixture += hedge.mixture_loss(loss, y);
        hedge.update(loss, y);
      }
      const double budget = hedge_regret_budget(1.0, n, eta, T);
      const double slack = mixture - hedge.min_cumulative() - budget;
      worst_slack = std::max(worst_slack, slack);
      ok = ok && slack <= 1e-9;
    }
    check_line(report, ok,
               "n=" + std::to_string(n) + ": 100 sequences of length " +
                   std::to_string(T) +
                   ", worst regret minus budget = " + format_double(worst_slack));
  }
  return report;
}

VerifyReport suite_loss_identities() {
  VerifyReport report{"loss-identities", true, {}};
  RngStream rng = child_stream(2024, "loss-identities");
  const int draws = 10000;
  bool doubling_ok = true, eps_ok = true, cap_ok = true;
  std::vector<std::string> violations;
  for (int i = 0; i < draws; ++i) {
    const double a = 10.0 * rng.uniform();
    const double b = 10.0 * rng.uniform();
    const double alpha = 1.0 + 3.0 * rng.uniform();
    const double eps = 0.001 + 0.999 * rng.uniform();
    const double lhs = std::pow(a + b, alpha);
    const double doubling =
        std::pow(2.0, alpha - 1.0) * (std::pow(a, alpha) + std::pow(b, alpha));
    if (lhs > doubling * (1.0 + 1e-9) + 1e-12) {
      doubling_ok = false;
      if (violations.size() < 10)
        violations.push_back("doubling: a=" + format_double(a) +
                             " b=" + format_double(b) +
                             " alpha=" + format_double(alpha));
    }
    const double c = relaxed_triangle_constant(alpha, eps);
    const double relaxed =
        (1.0 + eps) * std::pow(a, alpha) + c * std::pow(b, alpha);
    if (lhs > relaxed * (1.0 + 1e-9) + 1e-12) {
      eps_ok = false;
      if (violations.size() < 10)
        violations.push_back("relaxed: a=" + format_double(a) +
                             " b=" + format_double(b) +
                             " alpha=" + format_double(alpha) +
                             " eps=" + format_double(eps));
    }
    if (c > std::pow(4.0 * alpha / eps, alpha) * (1.0 + 1e-12)) {
      cap_ok = false;
      if (violations.size() < 10)
        violations.push_back("cap: alpha=" + format_double(alpha) +
                             " eps=" + format_double(eps) +
                             " c=" + format_double(c));
    }
  }
  check_line(report, doubling_ok,
             "(a+b)^alpha <= 2^(alpha-1)(a^alpha + b^alpha): " +
                 std::to_string(draws) + " draws");
  check_line(report, eps_ok,
             "(a+b)^alpha <= (1+eps) a^alpha + c b^alpha: " +
                 std::to_string(draws) + " draws");
  check_line(report, cap_ok, "constant cap c <= (4 alpha / eps)^alpha: " +
                                 std::to_string(draws) + " draws");
  for (const auto& v : violations) report.lines.push_back("  " + v);
  return report;
}

VerifyReport suite_c1nn_invariants() {
  VerifyReport report{"c1nn-invariants", true, {}};
  const auto metric = [](const Value& a, const Value& b) {
    return std::abs(as_real(a) - as_real(b));
  };
  const std::int64_t T = 2000;
  int run_index = 0;
  for (const double delta : {0.1, 0.5, 1.0}) {
    bool ok = true;
    std::string first_violation;
    for (int run = 0; run < 10; ++run, ++run_index) {
      C1nnProcess process(
          metric, delta,
          child_stream(2024, "c1nn-coins",
                       static_cast<std::uint64_t>(run_index)));
      RngStream draws = child_stream(
          2024, "c1nn-draws", static_cast<std::uint64_t>(run_index));
      const bool quantized = run % 2 == 1;  // force duplicate instances
      for (std::int64_t t = 0; t < T; ++t) {
        double x = draws.uniform();
        if (quantized) x = std::floor(x * 8.0) / 8.0;
        process.step(x);
      }
      if (const auto violation = c1nn_audit(process)) {
        ok = false;
        if (first_violation.empty()) first_violation = *violation;
      }
    }
    check_line(report, ok,
               "delta=" + format_double(delta) + ": 10 runs of " +
                   std::to_string(T) + " steps audited" +
                   (first_violation.empty() ? "" : " (" + first_violation + ")"));
  }
  return report;
}

VerifyReport suite_ftime_certify() {
  VerifyReport report{"ftime-certify", true, {}};
  const std::vector<std::pair<std::string, double>> cases = {
      {"labels-2", 0.4}, {"labels-3", 0.6}};
  for (const auto& [space_name, eta] : cases) {
    auto space = make_space(space_name);
    const FTimeCertificate cert = certify_ftime(*space, eta);
    check_line(report, cert.satisfied,
               space_name + " eta=" + format_double(eta) + ": " +
                   std::to_string(cert.sequences_checked) +
                   " sequences, worst average excess " +
                   format_double(cert.worst_average_excess));
  }
  return report;
}

}  // namespace

std::vector<std::string> verify_suite_names() {
  return {"metric-axioms", "hedge-bounds", "loss-identities",
          "c1nn-invariants", "ftime-certify"};
}

VerifyReport run_verify_suite(const std::string& suite) {
  if (suite == "metric-axioms") return suite_metric_axioms();
  if (suite == "hedge-bounds") return suite_hedge_bounds();
  if (suite == "loss-identities") return suite_loss_identities();
  if (suite == "c1nn-invariants") return suite_c1nn_invariants();
  if (suite == "ftime-certify") return suite_ftime_certify();
  std::string known;
  for (const auto& name : verify_suite_names()) {
    if (!known.empty()) known += ", ";
    known += name;
  }
  throw ConfigError("unknown suite: " + suite + " (known: " + known + ")");
}

// ---- diagnostics ------------------------------------------------------------

namespace {

std::function<std::int64_t(const Value&)> named_partition(
    const std::string& name) {
  if (name == "identity") {
    return [](const Value& v) -> std::int64_t {
      if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
      if (const auto* d = std::get_if<double>(&v))
        return std::bit_cast<std::int64_t>(*d);
      const auto& p = std::get<Vec2>(v);
      return static_cast<std::int64_t>(
          std::bit_cast<std::uint64_t>(p.x) ^
          std::rotl(std::bit_cast<std::uint64_t>(p.y), 32));
    };
  }
  if (name == "dyadic") {
    return [](const Value& v) -> std::int64_t {
      double magnitude = 0.0;
      if (const auto* i = std::get_if<std::int64_t>(&v))
        magnitude = static_cast<double>(std::abs(*i));
      else if (const auto* d = std::get_if<double>(&v))
        magnitude = std::abs(*d);
      else {
        const auto& p = std::get<Vec2>(v);
        magnitude = std::hypot(p.x, p.y);
      }
      if (magnitude == 0.0) return std::numeric_limits<std::int64_t>::min();
      return static_cast<std::int64_t>(
          std::clamp(std::floor(std::log2(magnitude)), -1070.0, 1070.0));
    };
  }
  if (name == "unit") {
    return [](const Value&) -> std::int64_t { return 0; };
  }
  throw ConfigError("unknown partition: " + name +
                    " (known: identity, dyadic, unit)");
}

}  // namespace

DiagReport run_diag(const std::string& process_kind,
                    const std::string& partition, std::int64_t horizon,
                    std::uint64_t seed) {
  if (horizon < 1) throw ConfigError("diag: horizon must be >= 1");
  const auto part = named_partition(partition);
  ProcessParams params;
  params.support = {Value{std::int64_t{0}}, Value{std::int64_t{1}},
                    Value{std::int64_t{2}}};
  std::unique_ptr<InstanceProcess> process;
  try {
    process = make_process(process_kind, params, seed);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  DiagReport report;
  report.process = process_kind;
  report.partition = partition;
  for (std::int64_t h = 1; h < horizon; h *= 2) report.horizons.push_back(h);
  report.horizons.push_back(horizon);
  report.distinct_cells = smv_diagnostic(*process, part, report.horizons);
  return report;
}

std::string default_out_dir() {
  if (const char* dir = std::getenv("METREG_OUT_DIR"); dir && *dir)
    return dir;
  return ".";
}

}  // namespace metreg
