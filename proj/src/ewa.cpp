#include "metreg/ewa.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace metreg {

std::int64_t hedge_horizon(double sup_loss, std::size_t n, double eps) {
  if (n < 1 || sup_loss <= 0.0 || eps <= 0.0)
    throw std::invalid_argument("hedge_horizon: bad parameters");
  if (n == 1) return 1;  // a single candidate needs no aggregation time
  return std::max<std::int64_t>(
      1, nudged_ceil(sup_loss * sup_loss * std::log(static_cast<double>(n)) /
                     (2.0 * eps * eps)));
}

double hedge_rate(double sup_loss, std::size_t n, std::int64_t horizon) {
  if (n < 2) return 1.0;  // degenerate: weights never matter
  return std::sqrt(8.0 * std::log(static_cast<double>(n)) /
                   (sup_loss * sup_loss * static_cast<double>(horizon)));
}

double hedge_regret_budget(double sup_loss, std::size_t n, double eta,
                           std::int64_t rounds) {
  return std::log(static_cast<double>(n)) / eta +
         static_cast<double>(rounds) * eta * sup_loss * sup_loss / 8.0;
}

HedgeState::HedgeState(std::vector<Value> candidates, double eta)
    : candidates_(std::move(candidates)), eta_(eta) {
  if (candidates_.empty()) throw std::invalid_argument("HedgeState: no candidates");
  if (!(eta_ > 0.0)) throw std::invalid_argument("HedgeState: eta must be positive");
  cumulative_.assign(candidates_.size(), 0.0);
}

std::vector<double> HedgeState::weights() const {
  const double lo = min_cumulative();
  std::vector<double> w(candidates_.size());
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = std::exp(-eta_ * (cumulative_[i] - lo));  // shift keeps max at 1
    total += w[i];
  }
  for (double& x : w) x /= total;
  return w;
}

std::size_t HedgeState::sample(RngStream& rng) const { return rng.sample_index(weights()); }

double HedgeState::mixture_loss(const LossFn& loss, const Value& y) const {
  const std::vector<double> w = weights();
  double out = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) out += w[i] * loss(candidates_[i], y);
  return out;
}

void HedgeState::update(const LossFn& loss, const Value& y) {
  for (std::size_t i = 0; i < candidates_.size(); ++i)
    cumulative_[i] += loss(candidates_[i], y);
  ++rounds_;
}

double HedgeState::min_cumulative() const {
  return *std::min_element(cumulative_.begin(), cumulative_.end());
}

GrowingHedge::GrowingHedge(std::int64_t t0) : t0_(t0) {
  if (t0 < 2) throw std::invalid_argument("GrowingHedge: t0 must be at least 2");
  eta_ = std::sqrt(2.0 * std::log(static_cast<double>(t0)) / static_cast<double>(t0));
}

double GrowingHedge::success_mass(std::int64_t label) const {
  if (hits_.empty()) return label == 0 ? 1.0 : 0.0;  // opening deterministic 0
  const auto it = hits_.find(label);
  if (it == hits_.end()) return 0.0;
  // Stabilize by the largest count; weights are shift-invariant.
  std::int64_t top = 0;
  for (const auto& [y, c] : hits_) top = std::max(top, c);
  double total = 0.0;
  for (const auto& [y, c] : hits_) total += std::exp(eta_ * static_cast<double>(c - top));
  return std::exp(eta_ * static_cast<double>(it->second - top)) / total;
}

std::int64_t GrowingHedge::sample(RngStream& rng) const {
  if (hits_.empty()) return 0;
  std::int64_t top = 0;
  for (const auto& [y, c] : hits_) top = std::max(top, c);
  std::vector<double> w;
  std::vector<std::int64_t> labels;
  w.reserve(hits_.size());
  for (const auto& [y, c] : hits_) {
    labels.push_back(y);
    w.push_back(std::exp(eta_ * static_cast<double>(c - top)));
  }
  return labels[rng.sample_index(w)];
}

void GrowingHedge::observe(std::int64_t label) { ++hits_[label]; }

double GrowingHedge::score_budget(std::int64_t rounds) const {
  return 1.0 + std::log(2.0) / eta_ +
         eta_ * static_cast<double>(t0_ + rounds) / 2.0;
}

MeanEstLearner::MeanEstLearner(std::shared_ptr<const ValueSpace> space, RngStream rng)
    : space_(std::move(space)), rng_(std::move(rng)) {
  if (!space_->has_dense_sequence())
    throw std::invalid_argument("MeanEstLearner: space has no dense sequence");
  extend_pool(1);
}

std::string MeanEstLearner::name() const { return "mean-est"; }

void MeanEstLearner::extend_pool(std::int64_t t) {
  // Keep candidates for every index i <= ln t; activation is gated by start.
  const double logt = std::log(static_cast<double>(t));
  while (static_cast<double>(pool_.size()) <= logt + 1e-12) {
    const std::size_t i = pool_.size();
    Candidate c;
    c.value = space_->dense_value(i);
    c.anchor_loss = space_->loss(space_->dense_value(0), c.value);
    c.start = std::max<std::int64_t>(
        1, nudged_ceil(std::max(std::exp(static_cast<double>(i)),
                                std::exp(c.anchor_loss))));
    c.cumulative = 0.0;
    c.hat_snapshot = 0.0;  // filled in when the candidate activates
    pool_.push_back(std::move(c));
  }
}

std::vector<double> MeanEstLearner::active_weights(
    std::int64_t t, std::vector<std::size_t>& active) const {
  active.clear();
  const double eta = 1.0 / (4.0 * std::sqrt(static_cast<double>(t)));
  std::vector<double> exponents;
  for (std::size_t i = 0; i < pool_.size(); ++i) {
    const Candidate& c = pool_[i];
    if (t < c.start) continue;
    active.push_back(i);
    // hat-loss sum since activation minus candidate's own loss sum.
    exponents.push_back(eta * ((hat_total_ - c.hat_snapshot) - c.cumulative));
  }
  const double top = *std::max_element(exponents.begin(), exponents.end());
  std::vector<double> w(exponents.size());
  for (std::size_t j = 0; j < w.size(); ++j) w[j] = std::exp(exponents[j] - top);
  return w;
}

std::vector<std::size_t> MeanEstLearner::active_indices() const {
  const std::int64_t t = t_ + 1;
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < pool_.size(); ++i)
    if (t >= pool_[i].start) active.push_back(i);
  return active;
}

std::int64_t MeanEstLearner::activation_time(std::size_t i) const {
  return pool_.at(i).start;
}

Value MeanEstLearner::predict(const Value& /*x*/) {
  if (pending_) throw std::logic_error("MeanEstLearner: observe the last round first");
  const std::int64_t t = t_ + 1;
  extend_pool(t);
  for (Candidate& c : pool_)  // snapshot hat-loss prefix at activation
    if (c.start == t) c.hat_snapshot = hat_total_;
  last_weights_ = active_weights(t, last_active_);
  pending_ = true;
  const std::size_t pick = rng_.sample_index(last_weights_);
  return pool_[last_active_[pick]].value;
}

void MeanEstLearner::observe(const Value& y) {
  if (!pending_) throw std::logic_error("MeanEstLearner: predict first");
  pending_ = false;
  const std::int64_t t = t_ + 1;
  double total = 0.0, mix = 0.0;
  for (std::size_t j = 0; j < last_active_.size(); ++j) {
    Candidate& c = pool_[last_active_[j]];
    const double l = space_->loss(c.value, y);
    total += last_weights_[j];
    mix += last_weights_[j] * l;
    c.cumulative += l;
  }
  hat_total_ += mix / total;
  t_ = t;
}

}  // namespace metreg
