#include "metreg/selector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace metreg {

namespace {

constexpr double kLnTol = 1e-12;

// Max-shifted exponential weights from per-expert exponents.
std::vector<double> shifted_weights(const std::vector<double>& exponents) {
  double top = exponents.empty() ? 0.0 : exponents[0];
  for (double e : exponents) top = std::max(top, e);
  std::vector<double> w(exponents.size());
  for (std::size_t i = 0; i < exponents.size(); ++i) {
    w[i] = std::exp(exponents[i] - top);
  }
  return w;
}

double weighted_mixture(const std::vector<double>& w,
                        const std::vector<double>& losses) {
  double mass = 0.0, mix = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    mass += w[i];
    mix += w[i] * losses[i];
  }
  return mix / mass;
}

}  // namespace

// ---- CombinerLearner ------------------------------------------------------

CombinerLearner::CombinerLearner(ExpertFactory factory, LossFn loss,
                                 RngStream pick_rng, std::size_t max_experts)
    : factory_(std::move(factory)),
      loss_(std::move(loss)),
      pick_rng_(std::move(pick_rng)),
      max_experts_(max_experts) {
  if (!factory_ || !loss_) {
    throw std::invalid_argument("CombinerLearner: factory and loss required");
  }
  if (max_experts_ == 0) {
    throw std::invalid_argument("CombinerLearner: need at least one expert");
  }
}

std::string CombinerLearner::name() const { return "combiner"; }

std::size_t CombinerLearner::activation_round(std::size_t i) const {
  return experts_.at(i).start;
}

double CombinerLearner::true_cumulative(std::size_t i) const {
  return experts_.at(i).cumulative;
}

double CombinerLearner::hat_cumulative(std::size_t i) const {
  return hat_total_ - experts_.at(i).hat_snapshot;
}

std::vector<double> CombinerLearner::weights() const {
  const double t = static_cast<double>(time_);
  const double eta = std::sqrt(std::log(t) / t);
  std::vector<double> exponents(experts_.size());
  for (std::size_t i = 0; i < experts_.size(); ++i) {
    exponents[i] =
        eta * ((hat_total_ - experts_[i].hat_snapshot) - experts_[i].cumulative);
  }
  return shifted_weights(exponents);
}

Value CombinerLearner::predict(const Value& x) {
  if (pending_) {
    throw std::logic_error("CombinerLearner: observe the previous response first");
  }
  ++time_;
  // Expert i enters at round ceil(e^i): equivalently while i <= ln t.
  while (experts_.size() < max_experts_ &&
         static_cast<double>(experts_.size()) <=
             std::log(static_cast<double>(time_)) + kLnTol) {
    Expert e;
    e.learner = factory_(experts_.size());
    if (!e.learner) {
      throw std::runtime_error("CombinerLearner: factory returned no learner");
    }
    e.start = time_;
    e.hat_snapshot = hat_total_;
    experts_.push_back(std::move(e));
  }
  pending_predictions_.clear();
  for (auto& e : experts_) {
    pending_predictions_.push_back(e.learner->predict(x));
  }
  pending_weights_ = weights();
  pending_ = true;
  return pending_predictions_[pick_rng_.sample_index(pending_weights_)];
}

void CombinerLearner::observe(const Value& y) {
  if (!pending_) {
    throw std::logic_error("CombinerLearner: no pending prediction");
  }
  std::vector<double> losses(experts_.size());
  for (std::size_t i = 0; i < experts_.size(); ++i) {
    losses[i] = loss_(pending_predictions_[i], y);
  }
  hat_total_ += weighted_mixture(pending_weights_, losses);
  for (std::size_t i = 0; i < experts_.size(); ++i) {
    experts_[i].cumulative += losses[i];
    experts_[i].learner->observe(y);
  }
  pending_ = false;
}

// ---- restrict_value ---------------------------------------------------------

Value restrict_value(const ValueSpace& space, const Value& y, double M) {
  return space.loss(space.anchor(), y) < M ? y : space.anchor();
}

// ---- TruncationBank ---------------------------------------------------------

namespace {

// Entry round of truncation level M: ceil(e^{2^{alpha-1} M}).
std::size_t level_entry_round(double alpha, std::int64_t M) {
  return static_cast<std::size_t>(std::max<std::int64_t>(
      1, nudged_ceil(std::exp(std::pow(2.0, alpha - 1.0) *
                              static_cast<double>(M)))));
}

}  // namespace

TruncationBank::TruncationBank(std::shared_ptr<const ValueSpace> value_space,
                               LevelFactory factory, RngStream pick_rng,
                               std::int64_t max_levels)
    : value_space_(std::move(value_space)),
      factory_(std::move(factory)),
      pick_rng_(std::move(pick_rng)),
      max_levels_(max_levels) {
  if (!value_space_ || !factory_) {
    throw std::invalid_argument("TruncationBank: space and factory required");
  }
}

std::string TruncationBank::name() const { return "truncation-bank"; }

std::size_t TruncationBank::activation_round(std::int64_t M) const {
  return levels_.at(static_cast<std::size_t>(M)).start;
}

double TruncationBank::true_cumulative(std::int64_t M) const {
  return levels_.at(static_cast<std::size_t>(M)).cumulative;
}

double TruncationBank::hat_cumulative(std::int64_t M) const {
  return hat_total_ - levels_.at(static_cast<std::size_t>(M)).hat_snapshot;
}

Value TruncationBank::predict(const Value& x) {
  if (pending_) {
    throw std::logic_error("TruncationBank: observe the previous response first");
  }
  ++time_;
  const double alpha = value_space_->alpha();
  // Level M is active once M <= 2^{1-alpha} ln t, i.e. t >= ceil(e^{2^{alpha-1} M}).
  while ((max_levels_ < 0 ||
          levels_.size() < static_cast<std::size_t>(max_levels_)) &&
         level_entry_round(alpha, static_cast<std::int64_t>(levels_.size())) <=
             time_) {
    Level level;
    level.learner = factory_(static_cast<std::int64_t>(levels_.size()));
    if (!level.learner) {
      throw std::runtime_error("TruncationBank: factory returned no learner");
    }
    level.start = time_;
    level.hat_snapshot = hat_total_;
    levels_.push_back(std::move(level));
  }
  pending_predictions_.clear();
  for (auto& level : levels_) {
    pending_predictions_.push_back(level.learner->predict(x));
  }
  const double eta = 1.0 / (4.0 * std::sqrt(static_cast<double>(time_)));
  std::vector<double> exponents(levels_.size());
  for (std::size_t m = 0; m < levels_.size(); ++m) {
    exponents[m] =
        eta * ((hat_total_ - levels_[m].hat_snapshot) - levels_[m].cumulative);
  }
  pending_weights_ = shifted_weights(exponents);
  pending_ = true;
  if (time_ == 1) return value_space_->anchor();
  return pending_predictions_[pick_rng_.sample_index(pending_weights_)];
}

void TruncationBank::observe(const Value& y) {
  if (!pending_) {
    throw std::logic_error("TruncationBank: no pending prediction");
  }
  const double alpha = value_space_->alpha();
  const double clip_level =
      std::pow(2.0, 1.0 - alpha) * std::log(static_cast<double>(time_));
  const Value target = restrict_value(*value_space_, y, clip_level);
  std::vector<double> losses(levels_.size());
  for (std::size_t m = 0; m < levels_.size(); ++m) {
    losses[m] = value_space_->loss(pending_predictions_[m], target);
  }
  hat_total_ += weighted_mixture(pending_weights_, losses);
  for (std::size_t m = 0; m < levels_.size(); ++m) {
    levels_[m].cumulative += losses[m];
    levels_[m].learner->observe(
        restrict_value(*value_space_, y, static_cast<double>(m)));
  }
  pending_ = false;
}

// ---- FunctionFamily ---------------------------------------------------------

namespace {

// C(n, r) with overflow detection; r is small (at most 2k+1 for spec size k).
std::uint64_t binomial(std::uint64_t n, std::uint64_t r) {
  if (r > n) return 0;
  r = std::min(r, n - r);
  unsigned __int128 acc = 1;
  for (std::uint64_t i = 1; i <= r; ++i) {
    acc = acc * (n - r + i) / i;
    if (acc > static_cast<unsigned __int128>(-1) >> 64) {
      throw std::overflow_error("FunctionFamily: index does not fit 64 bits");
    }
  }
  return static_cast<std::uint64_t>(acc);
}

// Number of q-pair sequences with total pair weight exactly r: 2q nonnegative
// integers summing to r.
std::uint64_t pair_sequences(std::uint64_t q, std::uint64_t r) {
  if (q == 0) return r == 0 ? 1 : 0;
  return binomial(r + 2 * q - 1, 2 * q - 1);
}

// Number of q-pair sequences with total pair weight at most r.
std::uint64_t pair_sequences_upto(std::uint64_t q, std::uint64_t r) {
  if (q == 0) return 1;
  return binomial(r + 2 * q, 2 * q);
}

// Specs in grade W: k ranges over 1..W, each contributing the k-pair
// sequences of total pair weight W - k. Grade 0 holds only the constant.
std::uint64_t grade_size(std::uint64_t W) {
  if (W == 0) return 1;
  std::uint64_t total = 0;
  for (std::uint64_t k = 1; k <= W; ++k) {
    total += pair_sequences(k, W - k);
  }
  return total;
}

}  // namespace

FunctionFamily::FunctionFamily(std::shared_ptr<const ValueSpace> instance_space,
                               std::shared_ptr<const ValueSpace> value_space)
    : instance_space_(std::move(instance_space)),
      value_space_(std::move(value_space)) {
  if (!instance_space_->has_cell_basis()) {
    throw MissingCapability(instance_space_->name() + ": no cell basis");
  }
  if (!value_space_->has_dense_sequence()) {
    throw MissingCapability(value_space_->name() + ": no dense sequence");
  }
}

std::uint64_t FunctionFamily::encode(const CellFunctionSpec& spec) const {
  const std::uint64_t k = spec.pairs.size();
  if (k == 0) return 0;
  std::uint64_t W = k;
  for (const auto& [cell, label] : spec.pairs) W += cell + label;
  std::uint64_t index = 0;
  for (std::uint64_t w = 0; w < W; ++w) index += grade_size(w);
  for (std::uint64_t kk = 1; kk < k; ++kk) index += pair_sequences(kk, W - kk);
  // Lexicographic rank of (cell_1, label_1, ..., cell_k, label_k) among
  // k-pair sequences of total pair weight W - k.
  std::uint64_t budget = W - k;
  for (std::uint64_t p = 0; p < k; ++p) {
    const std::uint64_t q = k - p - 1;  // pairs after this one
    const auto [cell, label] = spec.pairs[p];
    for (std::uint64_t c = 0; c < cell; ++c) {
      index += pair_sequences_upto(q, budget - c);
    }
    for (std::uint64_t l = 0; l < label; ++l) {
      index += pair_sequences(q, budget - cell - l);
    }
    budget -= cell + label;
  }
  return index;
}

CellFunctionSpec FunctionFamily::decode(std::uint64_t index) const {
  if (index == 0) return {};
  std::uint64_t W = 0;
  while (index >= grade_size(W)) {
    index -= grade_size(W);
    ++W;
  }
  std::uint64_t k = 1;
  while (index >= pair_sequences(k, W - k)) {
    index -= pair_sequences(k, W - k);
    ++k;
  }
  CellFunctionSpec spec;
  std::uint64_t budget = W - k;
  for (std::uint64_t p = 0; p < k; ++p) {
    const std::uint64_t q = k - p - 1;
    std::uint64_t cell = 0;
    while (index >= pair_sequences_upto(q, budget - cell)) {
      index -= pair_sequences_upto(q, budget - cell);
      ++cell;
    }
    std::uint64_t label = 0;
    while (index >= pair_sequences(q, budget - cell - label)) {
      index -= pair_sequences(q, budget - cell - label);
      ++label;
    }
    spec.pairs.emplace_back(static_cast<std::uint32_t>(cell),
                            static_cast<std::uint32_t>(label));
    budget -= cell + label;
  }
  return spec;
}

Value FunctionFamily::evaluate(const CellFunctionSpec& spec,
                               const Value& x) const {
  for (std::size_t j = spec.pairs.size(); j-- > 0;) {
    if (instance_space_->cell_contains(spec.pairs[j].first, x)) {
      return value_space_->dense_value(spec.pairs[j].second);
    }
  }
  return value_space_->dense_value(0);  // position 0: the whole space, label 0
}

Value FunctionFamily::label_value(std::uint32_t label_index) const {
  return value_space_->dense_value(label_index);
}

double FunctionFamily::max_label_loss(const CellFunctionSpec& spec) const {
  double worst = 0.0;
  const Value& y0 = value_space_->anchor();
  for (const auto& [cell, label] : spec.pairs) {
    worst = std::max(worst,
                     value_space_->loss(value_space_->dense_value(label), y0));
  }
  return worst;
}

// ---- CsLearner --------------------------------------------------------------

CsLearner::CsLearner(std::shared_ptr<const ValueSpace> instance_space,
                     std::shared_ptr<const ValueSpace> value_space,
                     RngStream pick_rng)
    : family_(std::move(instance_space), std::move(value_space)),
      pick_rng_(std::move(pick_rng)) {}

std::string CsLearner::name() const { return "cs-selector"; }

std::vector<std::uint64_t> CsLearner::active_indices() const {
  std::vector<std::uint64_t> out;
  for (const auto& e : entries_) out.push_back(e.index);
  return out;
}

std::size_t CsLearner::activation_round(std::uint64_t index) const {
  for (const auto& e : entries_) {
    if (e.index == index) return e.start;
  }
  throw std::out_of_range("CsLearner: index not active");
}

Value CsLearner::predict(const Value& x) {
  if (pending_) {
    throw std::logic_error("CsLearner: observe the previous response first");
  }
  ++time_;
  const double ln_t = std::log(static_cast<double>(time_));
  const double label_cap =
      std::pow(2.0, 1.0 - family_.value_space().alpha()) * ln_t;
  // Indices enter once index <= ln t and every label sits within the cap;
  // the deferred list holds small indices still waiting on the label test.
  auto admit = [&](std::uint64_t index) {
    Entry e;
    e.index = index;
    e.spec = family_.decode(index);
    e.start = time_;
    e.hat_snapshot = hat_total_;
    entries_.push_back(std::move(e));
  };
  for (std::size_t i = 0; i < deferred_.size();) {
    if (family_.max_label_loss(family_.decode(deferred_[i])) <=
        label_cap + kLnTol) {
      admit(deferred_[i]);
      deferred_.erase(deferred_.begin() + static_cast<std::ptrdiff_t>(i));
    } else {
      ++i;
    }
  }
  while (static_cast<double>(next_index_) <= ln_t + kLnTol) {
    if (family_.max_label_loss(family_.decode(next_index_)) <=
        label_cap + kLnTol) {
      admit(next_index_);
    } else {
      deferred_.push_back(next_index_);
    }
    ++next_index_;
  }
  pending_predictions_.clear();
  for (const auto& e : entries_) {
    pending_predictions_.push_back(family_.evaluate(e.spec, x));
  }
  if (time_ == 1) {
    pending_weights_.assign(entries_.size(), 1.0);
    pending_ = true;
    return family_.value_space().anchor();
  }
  const double eta = 1.0 / (ln_t * std::sqrt(static_cast<double>(time_)));
  std::vector<double> exponents(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    exponents[i] =
        eta * ((hat_total_ - entries_[i].hat_snapshot) - entries_[i].cumulative);
  }
  pending_weights_ = shifted_weights(exponents);
  pending_ = true;
  return pending_predictions_[pick_rng_.sample_index(pending_weights_)];
}

void CsLearner::observe(const Value& y) {
  if (!pending_) {
    throw std::logic_error("CsLearner: no pending prediction");
  }
  const ValueSpace& vs = family_.value_space();
  const double clip_level = std::pow(2.0, 1.0 - vs.alpha()) *
                            std::log(static_cast<double>(time_));
  const Value target = restrict_value(vs, y, clip_level);
  std::vector<double> losses(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    losses[i] = vs.loss(pending_predictions_[i], target);
  }
  hat_total_ += weighted_mixture(pending_weights_, losses);
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    entries_[i].cumulative += losses[i];
  }
  pending_ = false;
}

}  // namespace metreg
