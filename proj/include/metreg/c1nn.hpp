// Candidate-capped nearest-neighbor tree process and learner.
//
// The process maintains a dataset D of "open" past times. A new instance is
// attached to its nearest open neighbor phi(t); a parent that already has one
// child must pass a Bernoulli(delta) coin to accept a second child, and is
// closed either way (removed on failure, retired after the second child on
// success). Duplicated instances are memorized and leave the state untouched.
// The evolution depends only on the instance stream and the coin flips,
// never on responses, so the same process also drives the cluster carving of
// the epsilon-resolution learners.
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "metreg/learner.hpp"
#include "metreg/rng.hpp"
#include "metreg/space.hpp"
#include "metreg/value.hpp"

namespace metreg {

struct C1nnStep {
  std::size_t t{0};                  // 1-based round index
  bool duplicate{false};             // instance seen before
  std::size_t source{0};             // duplicate: first occurrence; else phi(t); 0 at t=1
  std::size_t depth{0};              // d(t) for new instances (root: 0)
  std::size_t prior_occurrences{0};  // |{u < t : X_u = X_t}|
};

enum class C1nnEventKind {
  kAccept,             // new point u joined the dataset under `parent`
  kRejectionRemoval,   // candidate parent u failed its coin and left the dataset
  kRetirement,         // parent u took a second child and left the dataset
};

struct C1nnEvent {
  C1nnEventKind kind;
  std::size_t t;         // round during which the event happened
  std::size_t u;         // the point the event is about
  std::size_t parent;    // kAccept only: phi(t)
  std::size_t children;  // u's child count immediately after the event
  bool coin;             // the Bernoulli draw, when one was consumed
  bool coin_consumed;    // whether this event consumed a draw
};

class C1nnProcess {
 public:
  using Metric = std::function<double(const Value&, const Value&)>;

  // delta in (0, 1]; delta = 1 reproduces the deterministic two-child rule.
  C1nnProcess(Metric metric, double delta, RngStream rng);

  C1nnStep step(const Value& x);

  std::size_t time() const { return static_cast<std::size_t>(instances_.size()); }
  double delta() const { return delta_; }

  bool is_new_instance(std::size_t t) const { return prior_occurrences_.at(t - 1) == 0; }
  std::size_t first_occurrence(std::size_t t) const { return first_occurrence_.at(t - 1); }
  std::size_t prior_occurrences(std::size_t t) const { return prior_occurrences_.at(t - 1); }
  // Tree accessors; meaningful for new-instance times only (others throw).
  std::size_t depth_of(std::size_t t) const;
  std::size_t parent_of(std::size_t t) const;  // 0 for the root
  // phi applied `steps` times to t (clamped at the root).
  std::size_t ancestor(std::size_t t, std::size_t steps) const;

  const std::vector<std::size_t>& dataset() const { return dataset_; }
  std::size_t children_count(std::size_t t) const { return children_.at(t - 1); }
  const std::vector<C1nnEvent>& events() const { return events_; }
  const std::vector<std::uint8_t>& coin_log() const { return coin_log_; }
  const Value& instance(std::size_t t) const { return instances_.at(t - 1); }

 private:
  std::size_t nearest_open(const Value& x) const;

  Metric metric_;
  double delta_;
  RngStream rng_;

  std::vector<Value> instances_;                // X_1..X_t
  std::vector<std::size_t> first_occurrence_;   // per time
  std::vector<std::size_t> prior_occurrences_;  // per time
  std::vector<std::size_t> depth_;              // per time (new instances)
  std::vector<std::size_t> parent_;             // per time (new instances), 0 = root
  std::vector<std::size_t> children_;           // n_t, per time
  std::vector<std::uint8_t> revealed_;          // coin consumed for t
  std::vector<std::size_t> dataset_;            // open times, increasing
  std::unordered_map<Value, std::size_t, ValueHash> seen_;  // value -> first time
  std::unordered_map<std::size_t, std::size_t> occurrence_count_;  // duplicates so far
  std::vector<C1nnEvent> events_;
  std::vector<std::uint8_t> coin_log_;
};

// Replays the event log against an independent bookkeeping pass and checks
// the structural invariants (closed points hold exactly the documented child
// counts and coin outcomes, the dataset always keeps an unsaturated point,
// depths increment along accepted edges). Returns the first violation found.
std::optional<std::string> c1nn_audit(const C1nnProcess& process);

// Nearest-neighbor learner on top of the process: memorize duplicates from
// the first occurrence, otherwise copy the attached neighbor's response.
class C1nnLearner final : public OnlineLearner {
 public:
  C1nnLearner(std::shared_ptr<const ValueSpace> instance_space, double delta,
              RngStream rng, Value default_prediction);

  std::string name() const override;
  Value predict(const Value& x) override;
  void observe(const Value& y) override;

  const C1nnProcess& process() const { return process_; }

 private:
  C1nnProcess process_;
  double delta_;
  Value default_prediction_;
  std::vector<Value> responses_;
};

}  // namespace metreg
