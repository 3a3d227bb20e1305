// Response generators for the hard instances, plus the log-domain number
// type used by the super-exponential construction and the tail-average
// diagnostic for empirical integrability.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "metreg/rng.hpp"
#include "metreg/space.hpp"
#include "metreg/value.hpp"

namespace metreg {

// A response mechanism driven once per round, after the learner committed
// to its prediction. Oblivious mechanisms ignore the prediction entirely,
// so their output stream depends only on the seed (replay-invariant under
// a different learner); adaptive ones may read past predictions.
class ResponseAdversary {
 public:
  virtual ~ResponseAdversary() = default;
  virtual std::string name() const = 0;
  virtual bool oblivious() const { return true; }
  virtual Value respond(const Value& x, const Value& prediction) = 0;
};

// ---- equilateral triangle on the unit disk -------------------------------
//
// I.i.d. uniform over the three unit-circle points at angles 2k*pi/3.
// The center (0,0) has per-step loss exactly 1; any fixed vertex has
// expected per-step loss 2 sqrt(3) / 3 (two thirds of the side length).
class TriangleAdversary final : public ResponseAdversary {
 public:
  explicit TriangleAdversary(RngStream rng);
  std::string name() const override { return "triangle"; }
  Value respond(const Value& x, const Value& prediction) override;

  static Vec2 vertex(int k);  // k = 0, 1, 2
  static double center_step_loss() { return 1.0; }
  // Expected per-step loss of predicting a fixed vertex, computed from the
  // vertex geometry (not hard-coded).
  static double fixed_vertex_expected_loss();

 private:
  RngStream rng_;
};

// ---- pathological-space hard sequence -------------------------------------
//
// Draws fair bits (b_u, c_u) for u = 1..k and emits the length-k sequence
// y_u = n_k + 4(u-1) + 2 b_u + c_u inside block I_k. The hindsight
// comparator is j* = n_k + 4k + sum_u b_u 2^{u-1} in J_k, whose realized
// loss is exactly 1/2 at every step; any fixed prediction has expected
// step loss >= 3/4 over the bit draws.
class PathoAdversary final : public ResponseAdversary {
 public:
  PathoAdversary(int k, RngStream rng);
  std::string name() const override { return "patho"; }
  Value respond(const Value& x, const Value& prediction) override;

  int horizon() const { return k_; }
  std::int64_t response_at(int u) const;  // u = 1..k
  std::int64_t comparator() const { return jstar_; }
  bool bit_b(int u) const { return b_[u - 1]; }
  bool bit_c(int u) const { return c_[u - 1]; }

 private:
  int k_;
  std::vector<bool> b_, c_;
  std::int64_t jstar_;
  int at_{0};
};

// Expected step loss of the fixed prediction y at position u (1-based),
// averaged over the four equally likely (b_u, c_u) pairs.
double patho_fixed_expected_step_loss(int k, int u, std::int64_t y);

// ---- log-domain reals and the super-exponential construction --------------

// A real carried as (sign, log2 |x|): exact for magnitudes like 2^(beta^t)
// that overflow doubles immediately.
struct LogReal {
  int sign{0};           // -1, 0, +1
  double log2_abs{0.0};  // meaningful only when sign != 0
};

class LogDomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

LogReal logreal_from(double x);
LogReal logreal_pow2(int sign, double exponent);
// Throws LogDomainError when the magnitude exceeds double range.
double logreal_to_double(const LogReal& a);

// log2(2^p + 2^q) and log2(2^p - 2^q). Subtraction requires p > q and
// throws LogDomainError when the operands are too close for the result to
// carry any precision (catastrophic cancellation).
double log2_add(double p, double q);
double log2_sub(double p, double q);

// |a - b|^alpha as a nonnegative log-domain value. Mixed signs add the
// magnitudes; equal signs subtract them (and may throw on cancellation).
LogReal logreal_loss(const LogReal& a, const LogReal& b, double alpha);
bool logreal_less(const LogReal& a, const LogReal& b);

// Y_t = 2^(beta^t) b_t with i.i.d. Rademacher signs and beta = 2 alpha /
// (alpha - 1). Magnitudes are exact in log-domain; consecutive magnitudes
// satisfy log2|Y_{t+1}| / log2|Y_t| = beta exactly.
class SuperexpAdversary {
 public:
  SuperexpAdversary(double alpha, int horizon, RngStream rng);
  double beta() const { return beta_; }
  int horizon() const { return horizon_; }
  LogReal value_at(int t) const;        // t = 1..horizon
  double magnitude_log2(int t) const;   // beta^t

 private:
  double alpha_, beta_;
  int horizon_;
  std::vector<int> signs_;
};

// The proof's dominance comparison at horizon T: the cost gap between
// predicting 0 and predicting 1 when Y_T = +2^(beta^T),
//   l(0, Y_T) - l(1, Y_T),
// strictly exceeds T times the total loss of always predicting 1 against
// adversarially signed earlier values, T * sum_{t<T} l(1, -2^(beta^t)).
// Both sides are computed in log-domain; the left side uses the stable
// expansion log2(y^a - (y-1)^a) = (a-1) m + log2 a + O(2^-m) for y = 2^m,
// whose error term is far below the returned margin.
struct SuperexpDominance {
  double lhs_log2;
  double rhs_log2;
  bool dominates;  // lhs > rhs by more than one full bit
};
SuperexpDominance superexp_dominance(double alpha, int T);

// ---- sparse spike responses (CRF lower-bound construction) ----------------
//
// On the real line with loss |a-b|^alpha: anchor y_0 = 0, spike values
// y_k = 2^(k/alpha) (so l(y_0, y_k) = 2^k exactly), spike times
// t_k = sum_{l<=k} l(y_0, y_l) = 2^(k+1) - 2. A fair bit B_k per spike
// decides whether the response at t_k is y_k or stays y_0; responses at
// all other times are y_0. The average anchor loss up to any T >= t_1 is
// at most (T+1)/T, yet any prediction at a spike time suffers expected
// loss >= l(y_0, y_k)/2 over the bit.
class CrfAdversary final : public ResponseAdversary {
 public:
  CrfAdversary(double alpha, std::int64_t horizon, RngStream rng);
  std::string name() const override { return "crf"; }
  Value respond(const Value& x, const Value& prediction) override;

  std::int64_t horizon() const { return horizon_; }
  int spike_count() const { return static_cast<int>(bits_.size()); }
  static std::int64_t spike_time(int k) { return (std::int64_t{2} << k) - 2; }
  std::optional<int> spike_index_at(std::int64_t t) const;
  bool bit(int k) const { return bits_[k - 1]; }
  double spike_value(int k) const;          // y_k
  double response_value(std::int64_t t) const;
  double anchor_loss_at(std::int64_t t) const;  // l(y_0, Y_t)
  // (1/T) sum_{t<=T} l(y_0, Y_t).
  double first_moment_average(std::int64_t T) const;

 private:
  double alpha_;
  std::int64_t horizon_;
  std::vector<bool> bits_;  // bits_[k-1] = B_k
  std::int64_t at_{0};
};

// Expected loss at spike k of the fixed prediction p over the fair bit:
// (l(p, y_0) + l(p, y_k)) / 2.
double crf_spike_expected_loss(double prediction, int k, double alpha);

// ---- empirical integrability tail average ---------------------------------
//
// (1/T) sum_t l_t 1[l_t >= M] over the anchor losses l_t = l(y_0, Y_t).
double empirical_integrability_tail(const std::vector<double>& anchor_losses,
                                    double M);

}  // namespace metreg
