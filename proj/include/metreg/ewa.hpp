// Exponentially weighted average forecasters.
//
// Three variants used across the library:
//  * HedgeState: fixed rate over a fixed finite set of candidate values.
//  * GrowingHedge: count-based weights over the labels seen so far, for
//    countable classification; rate tuned from a target horizon t0.
//  * MeanEstLearner: instance-blind aggregation over a dense value sequence
//    with anchored activation times and rate 1/(4*sqrt(t)).
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "metreg/learner.hpp"
#include "metreg/rng.hpp"
#include "metreg/space.hpp"
#include "metreg/value.hpp"

namespace metreg {

using LossFn = std::function<double(const Value&, const Value&)>;

// Rate and horizon used by the finite-net forecasters: for sup-loss bound
// sup_loss, n candidates and accuracy eps,
//   horizon  = ceil(sup_loss^2 * ln(n) / (2 eps^2))
//   rate     = sqrt(8 ln(n) / (sup_loss^2 * horizon))
std::int64_t hedge_horizon(double sup_loss, std::size_t n, double eps);
double hedge_rate(double sup_loss, std::size_t n, std::int64_t horizon);

// Regret budget of the fixed-rate forecaster after T rounds:
//   ln(n)/eta + T * eta * sup_loss^2 / 8.
double hedge_regret_budget(double sup_loss, std::size_t n, double eta, std::int64_t rounds);

class HedgeState {
 public:
  HedgeState(std::vector<Value> candidates, double eta);

  const std::vector<Value>& candidates() const { return candidates_; }
  double eta() const { return eta_; }

  // Normalized weights exp(-eta * L_y), stabilized against underflow.
  std::vector<double> weights() const;
  std::size_t sample(RngStream& rng) const;
  // Expected loss of the randomized prediction against response y.
  double mixture_loss(const LossFn& loss, const Value& y) const;
  void update(const LossFn& loss, const Value& y);

  double cumulative(std::size_t i) const { return cumulative_.at(i); }
  double min_cumulative() const;
  std::int64_t rounds() const { return rounds_; }

 private:
  std::vector<Value> candidates_;
  double eta_;
  std::vector<double> cumulative_;
  std::int64_t rounds_{0};
};

// Count-weighted forecaster over an unbounded label alphabet. Before any
// label is observed it deterministically predicts label 0; afterwards it
// samples proportionally to exp(eta * occurrence count) over seen labels.
class GrowingHedge {
 public:
  explicit GrowingHedge(std::int64_t t0);

  double eta() const { return eta_; }
  // Probability that the next prediction equals `label`.
  double success_mass(std::int64_t label) const;
  std::int64_t sample(RngStream& rng) const;
  void observe(std::int64_t label);
  // Deterministic guarantee after T observed rounds with target horizon t0:
  //   sum_t success_mass_t >= max_label hits - 1 - ln(2)/eta - eta*(t0+T)/2.
  double score_budget(std::int64_t rounds) const;

 private:
  std::int64_t t0_;
  double eta_;
  std::map<std::int64_t, std::int64_t> hits_;
};

// Aggregation over a dense sequence (y^i) of the value space, anchored at
// y^0. Candidate i joins at time t_i = ceil(max(e^i, e^{loss(y^0,y^i)})),
// which is exactly when both i <= ln t and loss(y^0,y^i) <= ln t first hold;
// its regret sums start there. The rate 1/(4 sqrt(t)) varies with time, so
// weights are recomputed from the stored sums every round.
class MeanEstLearner final : public OnlineLearner {
 public:
  MeanEstLearner(std::shared_ptr<const ValueSpace> space, RngStream rng);

  std::string name() const override;
  Value predict(const Value& x) override;  // the instance is ignored
  void observe(const Value& y) override;

  // Indices active at the upcoming round (time() + 1), for inspection.
  std::vector<std::size_t> active_indices() const;
  std::int64_t activation_time(std::size_t i) const;
  std::int64_t time() const { return t_; }

 private:
  struct Candidate {
    Value value;
    double anchor_loss;     // loss(y^0, y^i)
    std::int64_t start;     // t_i
    double cumulative;      // sum of loss(y^i, Y_s) for s in [start, t-1]
    double hat_snapshot;    // sum of hat-losses over s < start
  };

  void extend_pool(std::int64_t t);
  std::vector<double> active_weights(std::int64_t t,
                                     std::vector<std::size_t>& active) const;

  std::shared_ptr<const ValueSpace> space_;
  RngStream rng_;
  std::vector<Candidate> pool_;
  double hat_total_{0.0};  // sum of hat-losses over all past rounds
  std::int64_t t_{0};      // completed rounds
  // Cache from predict() for the matching observe().
  std::vector<std::size_t> last_active_;
  std::vector<double> last_weights_;
  bool pending_{false};
};

}  // namespace metreg
