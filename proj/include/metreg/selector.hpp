// Model-selection layers.
//
// CombinerLearner runs an exponentially-weighted selector over a growing
// bank of inner learners (expert i enters at round ceil(e^i)); the weights
// compare each expert's true cumulative loss since entry with the
// combiner's own mixture-loss accumulator over the same rounds.
//
// TruncationBank layers the same idea over truncation levels M = 0, 1, ...
// for unbounded losses: level M's learner only ever sees responses clipped
// into the loss-ball of radius M around the anchor, while the selector
// scores every level against a target clipped at a level that grows with
// time.
//
// FunctionFamily enumerates the countable class of cell functions
// f(x) = y^{l_{j*}}, j* = max{j : x in A_j} (A_0 = the whole instance
// space, l_0 = 0) over dyadic cells and the dense value sequence, graded
// by total description weight so that simple functions get small indices.
// CsLearner selects within that family with time-clipped targets.
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "metreg/ewa.hpp"
#include "metreg/learner.hpp"
#include "metreg/rng.hpp"
#include "metreg/space.hpp"
#include "metreg/value.hpp"

namespace metreg {

using ExpertFactory = std::function<std::unique_ptr<OnlineLearner>(std::size_t)>;

// Exponentially-weighted model selection over a lazily grown expert bank.
// Expert i is created fresh at round t_i = ceil(e^i) and from then on sees
// every (x, y); the selection rate at round t is sqrt(ln t / t).
class CombinerLearner final : public OnlineLearner {
 public:
  CombinerLearner(ExpertFactory factory, LossFn loss, RngStream pick_rng,
                  std::size_t max_experts = static_cast<std::size_t>(-1));

  std::string name() const override;
  Value predict(const Value& x) override;
  void observe(const Value& y) override;

  std::size_t time() const { return time_; }
  std::size_t active_count() const { return experts_.size(); }
  // Entry round t_i of expert i (it saw no data earlier).
  std::size_t activation_round(std::size_t i) const;
  // True cumulative loss of expert i over rounds t_i..now.
  double true_cumulative(std::size_t i) const;
  // The combiner's mixture-loss total over the same rounds t_i..now.
  double hat_cumulative(std::size_t i) const;

 private:
  struct Expert {
    std::unique_ptr<OnlineLearner> learner;
    std::size_t start{1};
    double cumulative{0.0};
    double hat_snapshot{0.0};
  };

  std::vector<double> weights() const;

  ExpertFactory factory_;
  LossFn loss_;
  RngStream pick_rng_;
  std::size_t max_experts_;
  std::vector<Expert> experts_;
  double hat_total_{0.0};
  std::size_t time_{0};
  std::vector<Value> pending_predictions_;
  std::vector<double> pending_weights_;
  bool pending_{false};
};

// Clip y into the open loss-ball of radius M around the space's anchor:
// returns y when loss(anchor, y) < M, the anchor otherwise.
Value restrict_value(const ValueSpace& space, const Value& y, double M);

using LevelFactory =
    std::function<std::unique_ptr<OnlineLearner>(std::int64_t M)>;

// Truncation-level selector for unbounded losses. Integer levels M >= 0
// enter at round ceil(e^{2^{alpha-1} M}); the active set at round t is
// {M <= 2^{1-alpha} ln t}. Level M's learner is fed restrict_value(y, M);
// the selector scores all levels against restrict_value(y, 2^{1-alpha}
// ln t) at the sample's own time, with rate 1/(4 sqrt t). Round 1 predicts
// the anchor.
class TruncationBank final : public OnlineLearner {
 public:
  TruncationBank(std::shared_ptr<const ValueSpace> value_space,
                 LevelFactory factory, RngStream pick_rng,
                 std::int64_t max_levels = -1);

  std::string name() const override;
  Value predict(const Value& x) override;
  void observe(const Value& y) override;

  std::size_t time() const { return time_; }
  std::int64_t active_levels() const {
    return static_cast<std::int64_t>(levels_.size());
  }
  std::size_t activation_round(std::int64_t M) const;
  double true_cumulative(std::int64_t M) const;
  double hat_cumulative(std::int64_t M) const;

 private:
  struct Level {
    std::unique_ptr<OnlineLearner> learner;
    std::size_t start{1};
    double cumulative{0.0};
    double hat_snapshot{0.0};
  };

  std::shared_ptr<const ValueSpace> value_space_;
  LevelFactory factory_;
  RngStream pick_rng_;
  std::int64_t max_levels_;
  std::vector<Level> levels_;  // index = level M
  double hat_total_{0.0};
  std::size_t time_{0};
  std::vector<Value> pending_predictions_;
  std::vector<double> pending_weights_;
  bool pending_{false};
};

// A cell function: position j = 1..k pairs a cell index (into the instance
// space's cell basis) with a label index (into the value space's dense
// sequence); the empty spec is the constant y^0.
struct CellFunctionSpec {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;  // (cell, label)
  friend bool operator==(const CellFunctionSpec&,
                         const CellFunctionSpec&) = default;
};

// Bijective enumeration of cell functions, graded by weight
// k + sum_p (cell_p + label_p): all weight-0 specs first (just the constant),
// then weight 1, 2, ...; ties broken by fewer pairs first, then
// lexicographically on (cell_1, label_1, ..., cell_k, label_k).
class FunctionFamily {
 public:
  FunctionFamily(std::shared_ptr<const ValueSpace> instance_space,
                 std::shared_ptr<const ValueSpace> value_space);

  CellFunctionSpec decode(std::uint64_t index) const;
  std::uint64_t encode(const CellFunctionSpec& spec) const;

  // f(x) = label of the highest position whose cell contains x; y^0 when none.
  Value evaluate(const CellFunctionSpec& spec, const Value& x) const;
  Value label_value(std::uint32_t label_index) const;
  // max_p loss(y^{label_p}, y^0); 0 for the constant.
  double max_label_loss(const CellFunctionSpec& spec) const;

  const ValueSpace& instance_space() const { return *instance_space_; }
  const ValueSpace& value_space() const { return *value_space_; }

 private:
  std::shared_ptr<const ValueSpace> instance_space_;
  std::shared_ptr<const ValueSpace> value_space_;
};

// Countable-family selector: active indices at round t are
// {i <= ln t : max_label_loss(f^i) <= 2^{1-alpha} ln t}; index i enters at
// the first round it is active and scores from then on. Rate 1/(ln t
// sqrt t); round 1 predicts y^0. Targets are clipped at level
// 2^{1-alpha} ln t at the sample's own time.
class CsLearner final : public OnlineLearner {
 public:
  CsLearner(std::shared_ptr<const ValueSpace> instance_space,
            std::shared_ptr<const ValueSpace> value_space, RngStream pick_rng);

  std::string name() const override;
  Value predict(const Value& x) override;
  void observe(const Value& y) override;

  std::size_t time() const { return time_; }
  const FunctionFamily& family() const { return family_; }
  std::vector<std::uint64_t> active_indices() const;
  std::size_t activation_round(std::uint64_t index) const;

 private:
  struct Entry {
    std::uint64_t index{0};
    CellFunctionSpec spec;
    std::size_t start{1};
    double cumulative{0.0};
    double hat_snapshot{0.0};
  };

  FunctionFamily family_;
  RngStream pick_rng_;
  std::vector<Entry> entries_;     // in activation order
  std::uint64_t next_index_{0};    // smallest index never yet examined
  std::vector<std::uint64_t> deferred_;  // examined, label condition not yet met
  double hat_total_{0.0};
  std::size_t time_{0};
  std::vector<Value> pending_predictions_;
  std::vector<double> pending_weights_;
  bool pending_{false};
};

}  // namespace metreg
