// Instance-stream generators and finite-horizon diagnostics for the
// process classes the learners are calibrated against. The diagnostics
// are evidence about a realized prefix, never verdicts: the classes
// themselves are asymptotic.
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "metreg/rng.hpp"
#include "metreg/value.hpp"

namespace metreg {

class InstanceProcess {
 public:
  virtual ~InstanceProcess() = default;
  virtual std::string kind() const = 0;
  virtual Value next() = 0;
};

struct ProcessParams {
  std::vector<Value> support{};  // finite_support: the points drawn from
  Value base{std::int64_t{0}};   // constant / sparse_novelty base point
  double epsilon{0.2};           // bursty: burst fraction of each window
};

// Kinds:
//   iid_uniform     i.i.d. uniform reals on [0, 1]
//   finite_support  i.i.d. uniform draws over params.support
//   constant        params.base forever
//   sparse_novelty  fresh integer point k at t_k = 2^(k+1) - 2, base
//                   otherwise (deterministic)
//   bursty          reals in (0, 1]: window (64*2^(p-1), 64*2^p] opens with
//                   an epsilon-fraction burst inside (2^-p-1}, 2^-p], base
//                   1.0 otherwise — a stream whose tail occupancy of every
//                   shrinking set stays bounded away from zero
// Throws std::invalid_argument for unknown kinds or bad params.
std::unique_ptr<InstanceProcess> make_process(const std::string& kind,
                                              const ProcessParams& params,
                                              std::uint64_t seed);

// Distinct partition cells visited by each horizon prefix (ascending
// horizons). Counts are non-decreasing and bounded by min(horizon, cells).
std::vector<std::int64_t> smv_diagnostic(
    InstanceProcess& process,
    const std::function<std::int64_t(const Value&)>& partition,
    const std::vector<std::int64_t>& horizons);

// Monte-Carlo estimate, per set A_k, of the tail occupancy proxy: the max
// over the three most recent dyadic tail windows (T/2, T], (T/4, T/2],
// (T/8, T/4] of the empirical frequency of A_k, averaged over replicas
// (replica r uses seed base_seed + r).
std::vector<double> cs_diagnostic(
    const std::function<std::unique_ptr<InstanceProcess>(std::uint64_t)>&
        make_replica,
    const std::vector<std::function<bool(const Value&)>>& sets,
    std::int64_t horizon, int replicas);

}  // namespace metreg
