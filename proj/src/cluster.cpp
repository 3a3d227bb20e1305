#include "metreg/cluster.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace metreg {

ClusterIndex::ClusterIndex(std::shared_ptr<const ValueSpace> instance_space,
                           double delta, std::int64_t window,
                           double dup_threshold, RngStream rng)
    : process_([space = std::move(instance_space)](const Value& a, const Value& b) {
                 return space->distance(a, b);
               },
               delta, std::move(rng)),
      window_(window),
      dup_threshold_(dup_threshold) {
  if (window_ < 1) throw std::invalid_argument("ClusterIndex: window must be >= 1");
}

ClusterKey ClusterIndex::step(const Value& x) {
  const C1nnStep s = process_.step(x);
  const std::size_t u = s.duplicate ? s.source : s.t;
  ClusterKey key;
  if (static_cast<double>(s.prior_occurrences) > dup_threshold_) {
    key.duplicate_branch = true;
    key.root = u;
  } else {
    const std::size_t hops =
        process_.depth_of(u) % static_cast<std::size_t>(window_);
    key.root = process_.ancestor(u, hops);
  }
  keys_.push_back(key);
  return key;
}

namespace {

double loss_net_radius(const ValueSpace& space, double loss_radius) {
  // epsilon_net covers at metric radius; convert a loss radius through the
  // power alpha.
  return std::pow(loss_radius, 1.0 / space.alpha());
}

}  // namespace

FEpsLearner::FEpsLearner(std::shared_ptr<const ValueSpace> instance_space,
                         std::shared_ptr<const ValueSpace> value_space,
                         double eps, RngStream tree_rng, RngStream pick_rng)
    : value_space_(std::move(value_space)),
      eps_(eps),
      net_(value_space_->epsilon_net(loss_net_radius(*value_space_, eps))),
      horizon_(hedge_horizon(value_space_->sup_loss(), net_.size(), eps)),
      coin_rate_(eps / (2.0 * static_cast<double>(horizon_))),
      rate_(hedge_rate(value_space_->sup_loss(), net_.size(), horizon_)),
      clusters_(std::move(instance_space), coin_rate_, horizon_,
                static_cast<double>(horizon_) / eps, std::move(tree_rng)),
      pick_rng_(std::move(pick_rng)) {
  if (!(eps > 0.0 && eps <= 1.0))
    throw std::invalid_argument("FEpsLearner: eps must be in (0,1]");
}

std::string FEpsLearner::name() const { return "f-eps(" + std::to_string(eps_) + ")"; }

Value FEpsLearner::predict(const Value& x) {
  if (pending_) throw std::logic_error("FEpsLearner: observe the last round first");
  last_key_ = clusters_.step(x);
  auto [it, fresh] = hedges_.try_emplace(last_key_, HedgeState(net_, rate_));
  pending_ = true;
  return net_[it->second.sample(pick_rng_)];
}

void FEpsLearner::observe(const Value& y) {
  if (!pending_) throw std::logic_error("FEpsLearner: predict first");
  pending_ = false;
  hedges_.at(last_key_).update(
      [this](const Value& a, const Value& b) { return value_space_->loss(a, b); }, y);
}

FTimeRule make_ftime_rule(const ValueSpace& space, double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("make_ftime_rule: eta must be positive");
  FTimeRule rule;
  rule.net = space.epsilon_net(loss_net_radius(space, eta / 2.0));
  const double sup = space.sup_loss();
  const double logn = std::log(static_cast<double>(rule.net.size()));
  rule.horizon =
      rule.net.size() < 2
          ? 1
          : std::max<std::int64_t>(1, nudged_ceil(2.0 * sup * sup * logn / (eta * eta)));
  rule.rate = hedge_rate(sup, rule.net.size(), rule.horizon);
  rule.target = eta;
  return rule;
}

FTimeCertificate certify_ftime(const ValueSpace& space, double eta) {
  const FTimeRule rule = make_ftime_rule(space, eta);
  const std::size_t n = rule.net.size();
  const std::int64_t T = rule.horizon;

  double sequences = std::pow(static_cast<double>(n), static_cast<double>(T));
  if (sequences > 6e6)
    throw std::invalid_argument("certify_ftime: search space too large to enumerate");

  // Precompute the loss matrix between net points.
  std::vector<std::vector<double>> loss(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      loss[i][j] = space.loss(rule.net[i], rule.net[j]);

  FTimeCertificate cert;
  cert.worst_average_excess = -1e300;
  std::vector<double> cum(n, 0.0);  // per-net-point cumulative loss so far

  // Depth-first walk over all net-valued response sequences, carrying the
  // deterministic expected loss of the fixed-rate forecaster.
  std::vector<double> weights(n);
  auto dfs = [&](auto&& self, std::int64_t depth, double hat_total) -> void {
    if (depth == T) {
      double best = cum[0];
      for (std::size_t z = 1; z < n; ++z) best = std::min(best, cum[z]);
      cert.worst_average_excess = std::max(
          cert.worst_average_excess, (hat_total - best) / static_cast<double>(T));
      ++cert.sequences_checked;
      return;
    }
    double lo = cum[0];
    for (std::size_t z = 1; z < n; ++z) lo = std::min(lo, cum[z]);
    double total = 0.0;
    for (std::size_t z = 0; z < n; ++z) {
      weights[z] = std::exp(-rule.rate * (cum[z] - lo));
      total += weights[z];
    }
    const std::vector<double> w_here = weights;  // weights is reused below us
    for (std::size_t j = 0; j < n; ++j) {
      double mix = 0.0;
      for (std::size_t z = 0; z < n; ++z) mix += w_here[z] * loss[z][j];
      mix /= total;
      for (std::size_t z = 0; z < n; ++z) cum[z] += loss[z][j];
      self(self, depth + 1, hat_total + mix);
      for (std::size_t z = 0; z < n; ++z) cum[z] -= loss[z][j];
    }
  };
  dfs(dfs, 0, 0.0);

  cert.satisfied = cert.worst_average_excess <= eta + 1e-9;
  return cert;
}

namespace {

std::int64_t block_window(std::int64_t horizon, double eps) {
  if (!(eps > 0.0 && eps <= 1.0))
    throw std::invalid_argument("FEpsBlockLearner: eps must be in (0,1]");
  return std::max<std::int64_t>(1, nudged_ceil(static_cast<double>(horizon) / eps));
}

}  // namespace

FEpsBlockLearner::FEpsBlockLearner(std::shared_ptr<const ValueSpace> instance_space,
                                   std::shared_ptr<const ValueSpace> value_space,
                                   double eps, double eta, RngStream tree_rng,
                                   std::uint64_t block_seed)
    : value_space_(std::move(value_space)),
      rule_(make_ftime_rule(*value_space_, eta)),
      window_(block_window(rule_.horizon, eps)),
      coin_rate_(eps / (2.0 * static_cast<double>(window_))),
      clusters_(std::move(instance_space), coin_rate_, window_,
                static_cast<double>(window_) / eps, std::move(tree_rng)),
      block_seed_(block_seed) {}

std::string FEpsBlockLearner::name() const { return "f-eps-block"; }

Value FEpsBlockLearner::predict(const Value& x) {
  if (pending_) throw std::logic_error("FEpsBlockLearner: observe the last round first");
  last_key_ = clusters_.step(x);
  const std::size_t t = clusters_.process().time();
  Chain& chain = chains_[last_key_];
  if (!chain.hedge || chain.last_position == rule_.horizon - 1) {
    // Fresh block: new forecaster, new private randomness tied to this round.
    chain.hedge = std::make_unique<HedgeState>(rule_.net, rule_.rate);
    chain.rng = std::make_unique<RngStream>(derive_seed(block_seed_, "block", t));
    chain.block_start = t;
    blocks_opened_.emplace_back(t, 0);
    chain.trace_index = blocks_opened_.size() - 1;
    pending_position_ = 0;
  } else {
    pending_position_ = chain.last_position + 1;
  }
  pending_ = true;
  return rule_.net[chain.hedge->sample(*chain.rng)];
}

void FEpsBlockLearner::observe(const Value& y) {
  if (!pending_) throw std::logic_error("FEpsBlockLearner: predict first");
  pending_ = false;
  Chain& chain = chains_.at(last_key_);
  chain.hedge->update(
      [this](const Value& a, const Value& b) { return value_space_->loss(a, b); }, y);
  chain.last_position = pending_position_;
  ++blocks_opened_[chain.trace_index].second;
}

}  // namespace metreg
