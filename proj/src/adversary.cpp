#include "metreg/adversary.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace metreg {

namespace {
constexpr double kLn2 = std::numbers::ln2;
}  // namespace

// ---- triangle --------------------------------------------------------------

TriangleAdversary::TriangleAdversary(RngStream rng) : rng_(rng) {}

Vec2 TriangleAdversary::vertex(int k) {
  // Angles 0, 2pi/3, 4pi/3 with the cosines/sines written exactly.
  static const double h = std::sqrt(3.0) / 2.0;
  switch (k) {
    case 0: return {1.0, 0.0};
    case 1: return {-0.5, h};
    case 2: return {-0.5, -h};
    default: throw std::invalid_argument("triangle vertex index");
  }
}

double TriangleAdversary::fixed_vertex_expected_loss() {
  const Vec2 a = vertex(0), b = vertex(1), c = vertex(2);
  const auto dist = [](Vec2 u, Vec2 v) {
    return std::hypot(u.x - v.x, u.y - v.y);
  };
  return (0.0 + dist(a, b) + dist(a, c)) / 3.0;
}

Value TriangleAdversary::respond(const Value&, const Value&) {
  const std::size_t k = rng_.sample_index({1.0, 1.0, 1.0});
  return vertex(static_cast<int>(k));
}

// ---- pathological hard sequence ---------------------------------------------

PathoAdversary::PathoAdversary(int k, RngStream rng) : k_(k) {
  if (k < 1) throw std::invalid_argument("patho adversary: k must be >= 1");
  const PathoPartition part = patho_partition(k);
  std::int64_t offset = 0;
  for (int u = 1; u <= k; ++u) {
    b_.push_back(rng.bernoulli(0.5));
    c_.push_back(rng.bernoulli(0.5));
    if (b_.back()) offset += std::int64_t{1} << (u - 1);
  }
  jstar_ = part.j_begin + offset;
}

std::int64_t PathoAdversary::response_at(int u) const {
  if (u < 1 || u > k_) throw std::out_of_range("patho adversary: bad step");
  const PathoPartition part = patho_partition(k_);
  return part.i_begin + 4 * (u - 1) + 2 * (b_[u - 1] ? 1 : 0) +
         (c_[u - 1] ? 1 : 0);
}

Value PathoAdversary::respond(const Value&, const Value&) {
  if (at_ >= k_) throw std::out_of_range("patho adversary exhausted");
  ++at_;
  return response_at(at_);
}

double patho_fixed_expected_step_loss(int k, int u, std::int64_t y) {
  const PathoPartition part = patho_partition(k);
  double total = 0.0;
  for (int b = 0; b < 2; ++b) {
    for (int c = 0; c < 2; ++c) {
      const std::int64_t y_u = part.i_begin + 4 * (u - 1) + 2 * b + c;
      total += patho_loss(y_u, y);
    }
  }
  return total / 4.0;
}

// ---- log-domain reals -------------------------------------------------------

LogReal logreal_from(double x) {
  if (x == 0.0) return {0, 0.0};
  if (!std::isfinite(x)) throw LogDomainError("logreal_from: non-finite");
  return {x > 0.0 ? 1 : -1, std::log2(std::abs(x))};
}

LogReal logreal_pow2(int sign, double exponent) {
  if (sign == 0) return {0, 0.0};
  return {sign > 0 ? 1 : -1, exponent};
}

double logreal_to_double(const LogReal& a) {
  if (a.sign == 0) return 0.0;
  if (a.log2_abs > 1023.0 || a.log2_abs < -1074.0)
    throw LogDomainError("logreal_to_double: outside double range");
  return a.sign * std::exp2(a.log2_abs);
}

double log2_add(double p, double q) {
  const double hi = std::max(p, q), lo = std::min(p, q);
  return hi + std::log1p(std::exp2(lo - hi)) / kLn2;
}

double log2_sub(double p, double q) {
  if (!(p > q)) throw LogDomainError("log2_sub: needs p > q");
  const double scale = std::max({1.0, std::abs(p), std::abs(q)});
  if (p - q <= 32.0 * std::numeric_limits<double>::epsilon() * scale)
    throw LogDomainError("log2_sub: catastrophic cancellation");
  return p + std::log1p(-std::exp2(q - p)) / kLn2;
}

LogReal logreal_loss(const LogReal& a, const LogReal& b, double alpha) {
  if (a.sign == 0 && b.sign == 0) return {0, 0.0};
  if (a.sign == 0) return {1, alpha * b.log2_abs};
  if (b.sign == 0) return {1, alpha * a.log2_abs};
  if (a.sign != b.sign) return {1, alpha * log2_add(a.log2_abs, b.log2_abs)};
  if (a.log2_abs == b.log2_abs) return {0, 0.0};
  const double hi = std::max(a.log2_abs, b.log2_abs);
  const double lo = std::min(a.log2_abs, b.log2_abs);
  return {1, alpha * log2_sub(hi, lo)};
}

bool logreal_less(const LogReal& a, const LogReal& b) {
  if (a.sign != b.sign) return a.sign < b.sign;
  if (a.sign == 0) return false;
  if (a.sign > 0) return a.log2_abs < b.log2_abs;
  return a.log2_abs > b.log2_abs;
}

// ---- super-exponential construction ------------------------------------------

SuperexpAdversary::SuperexpAdversary(double alpha, int horizon, RngStream rng)
    : alpha_(alpha), horizon_(horizon) {
  if (!(alpha > 1.0))
    throw std::invalid_argument("superexp adversary: alpha must be > 1");
  beta_ = 2.0 * alpha_ / (alpha_ - 1.0);
  for (int t = 1; t <= horizon_; ++t)
    signs_.push_back(rng.bernoulli(0.5) ? 1 : -1);
}

LogReal SuperexpAdversary::value_at(int t) const {
  if (t < 1 || t > horizon_)
    throw std::out_of_range("superexp adversary: bad step");
  return {signs_[t - 1], magnitude_log2(t)};
}

double SuperexpAdversary::magnitude_log2(int t) const {
  return std::pow(beta_, t);
}

SuperexpDominance superexp_dominance(double alpha, int T) {
  if (!(alpha > 1.0) || T < 1)
    throw std::invalid_argument("superexp_dominance: bad parameters");
  const double beta = 2.0 * alpha / (alpha - 1.0);
  const double m = std::pow(beta, T);  // log2 |Y_T|
  // l(0, 2^m) - l(1, 2^m) = 2^(alpha m) - (2^m - 1)^alpha
  //                       = alpha 2^((alpha-1) m) (1 + delta),
  // with |delta| <= alpha 2^-m for m >= 2: far below the bit-level margin
  // demanded at the end.
  const double lhs = (alpha - 1.0) * m + std::log2(alpha);
  // T * sum_{t<T} l(1, -2^(beta^t)); each term (1 + 2^(beta^t))^alpha.
  double acc = 0.0;
  bool any = false;
  for (int t = 1; t < T; ++t) {
    const double term = alpha * log2_add(std::pow(beta, t), 0.0);
    acc = any ? log2_add(acc, term) : term;
    any = true;
  }
  const double rhs = any ? std::log2(static_cast<double>(T)) + acc
                         : -std::numeric_limits<double>::infinity();
  return {lhs, rhs, lhs > rhs + 1.0};
}

// ---- CRF spikes ---------------------------------------------------------------

CrfAdversary::CrfAdversary(double alpha, std::int64_t horizon, RngStream rng)
    : alpha_(alpha), horizon_(horizon) {
  if (horizon < 1) throw std::invalid_argument("crf adversary: bad horizon");
  for (int k = 1; spike_time(k) <= horizon_; ++k)
    bits_.push_back(rng.bernoulli(0.5));
}

std::optional<int> CrfAdversary::spike_index_at(std::int64_t t) const {
  // t = 2^(k+1) - 2 <=> t + 2 is a power of two with exponent k+1 >= 2.
  const std::uint64_t v = static_cast<std::uint64_t>(t) + 2;
  if (t < 2 || (v & (v - 1)) != 0) return std::nullopt;
  const int k = std::bit_width(v) - 2;
  if (k < 1 || k > spike_count()) return std::nullopt;
  return k;
}

double CrfAdversary::spike_value(int k) const {
  return std::exp2(static_cast<double>(k) / alpha_);
}

double CrfAdversary::response_value(std::int64_t t) const {
  const auto k = spike_index_at(t);
  if (k && bits_[*k - 1]) return spike_value(*k);
  return 0.0;
}

double CrfAdversary::anchor_loss_at(std::int64_t t) const {
  // l(y_0, y_k) = 2^k exactly by construction.
  const auto k = spike_index_at(t);
  if (k && bits_[*k - 1]) return std::exp2(*k);
  return 0.0;
}

double CrfAdversary::first_moment_average(std::int64_t T) const {
  double total = 0.0;
  for (int k = 1; k <= spike_count() && spike_time(k) <= T; ++k)
    if (bits_[k - 1]) total += std::exp2(k);
  return total / static_cast<double>(T);
}

Value CrfAdversary::respond(const Value&, const Value&) {
  if (at_ >= horizon_) throw std::out_of_range("crf adversary exhausted");
  ++at_;
  return response_value(at_);
}

double crf_spike_expected_loss(double prediction, int k, double alpha) {
  const double y_k = std::exp2(static_cast<double>(k) / alpha);
  return (power_loss(std::abs(prediction), alpha) +
          power_loss(std::abs(prediction - y_k), alpha)) /
         2.0;
}

// ---- empirical integrability ---------------------------------------------------

double empirical_integrability_tail(const std::vector<double>& anchor_losses,
                                    double M) {
  if (anchor_losses.empty()) return 0.0;
  double total = 0.0;
  for (double l : anchor_losses)
    if (l >= M) total += l;
  return total / static_cast<double>(anchor_losses.size());
}

}  // namespace metreg
