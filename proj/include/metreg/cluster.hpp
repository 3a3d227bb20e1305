// Cluster-based epsilon-resolution learners.
//
// Times are grouped into clusters carved from the capped nearest-neighbor
// tree: a time joins the cluster of its instance's first occurrence's
// ancestor at distance depth mod window, unless the instance has been
// duplicated more than the threshold, in which case it joins a cluster
// dedicated to that instance. Each time's key is frozen when it arrives.
//
// Two learners predict per cluster: FEpsLearner runs a fixed-rate
// forecaster over an epsilon-net of the value space; FEpsBlockLearner
// carves each cluster into blocks of a fixed length and hands every block
// to a fresh finite-horizon rule, never leaking responses across blocks.
#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "metreg/c1nn.hpp"
#include "metreg/ewa.hpp"
#include "metreg/learner.hpp"
#include "metreg/rng.hpp"
#include "metreg/space.hpp"
#include "metreg/value.hpp"

namespace metreg {

struct ClusterKey {
  bool duplicate_branch{false};  // heavily duplicated instance
  std::size_t root{0};           // ancestor time, or first occurrence time
  friend bool operator==(const ClusterKey&, const ClusterKey&) = default;
};

struct ClusterKeyHash {
  std::size_t operator()(const ClusterKey& k) const noexcept {
    return std::hash<std::size_t>()(k.root * 2 + (k.duplicate_branch ? 1 : 0));
  }
};

class ClusterIndex {
 public:
  // window: ancestor distance cap (depth is reduced mod window);
  // dup_threshold: duplicate count beyond which an instance gets its own
  // cluster; delta: coin rate of the underlying tree process.
  ClusterIndex(std::shared_ptr<const ValueSpace> instance_space, double delta,
               std::int64_t window, double dup_threshold, RngStream rng);

  ClusterKey step(const Value& x);

  const C1nnProcess& process() const { return process_; }
  std::int64_t window() const { return window_; }
  double dup_threshold() const { return dup_threshold_; }
  const std::vector<ClusterKey>& keys() const { return keys_; }

 private:
  C1nnProcess process_;
  std::int64_t window_;
  double dup_threshold_;
  std::vector<ClusterKey> keys_;
};

// Fixed-resolution learner: fixed-rate forecaster over an epsilon-net,
// one independent copy per cluster.
class FEpsLearner final : public OnlineLearner {
 public:
  FEpsLearner(std::shared_ptr<const ValueSpace> instance_space,
              std::shared_ptr<const ValueSpace> value_space, double eps,
              RngStream tree_rng, RngStream pick_rng);

  std::string name() const override;
  Value predict(const Value& x) override;
  void observe(const Value& y) override;

  std::int64_t horizon() const { return horizon_; }      // T for this resolution
  double coin_rate() const { return coin_rate_; }        // tree delta
  double rate() const { return rate_; }                  // forecaster eta
  std::size_t net_size() const { return net_.size(); }
  const ClusterIndex& clusters() const { return clusters_; }

 private:
  std::shared_ptr<const ValueSpace> value_space_;
  double eps_;
  std::vector<Value> net_;
  std::int64_t horizon_;
  double coin_rate_;
  double rate_;
  ClusterIndex clusters_;
  RngStream pick_rng_;
  std::unordered_map<ClusterKey, HedgeState, ClusterKeyHash> hedges_;
  ClusterKey last_key_{};
  bool pending_{false};
};

// Finite-horizon rule specification produced for a bounded space: run a
// fixed-rate forecaster over a net for exactly `horizon` rounds to push the
// average excess loss below the target.
struct FTimeRule {
  std::vector<Value> net;
  std::int64_t horizon{1};
  double rate{1.0};
  double target{0.0};  // the average-excess goal the parameters were tuned for
};

// Tuning: net at loss radius eta/2, horizon ceil(2 sup^2 ln|net| / eta^2),
// rate sqrt(8 ln|net| / (sup^2 * horizon)).
FTimeRule make_ftime_rule(const ValueSpace& space, double eta);

struct FTimeCertificate {
  bool satisfied{false};
  double worst_average_excess{0.0};
  std::int64_t sequences_checked{0};
};

// Exhaustively drives the rule's deterministic expected loss against every
// net-valued response sequence of full horizon length and every net
// comparator. For 0-1 label spaces the net is the whole space, so this is a
// complete certification of the finite-time property at level eta.
FTimeCertificate certify_ftime(const ValueSpace& space, double eta);

// Block learner: clusters come from the tree with window ceil(t_eps/eps);
// inside a cluster, consecutive times form blocks of length t_eps, each
// served by a fresh finite-horizon forecaster seeded from the block's
// starting round.
class FEpsBlockLearner final : public OnlineLearner {
 public:
  FEpsBlockLearner(std::shared_ptr<const ValueSpace> instance_space,
                   std::shared_ptr<const ValueSpace> value_space, double eps,
                   double eta, RngStream tree_rng, std::uint64_t block_seed);

  std::string name() const override;
  Value predict(const Value& x) override;
  void observe(const Value& y) override;

  std::int64_t block_length() const { return rule_.horizon; }
  std::int64_t window() const { return clusters_.window(); }
  double coin_rate() const { return coin_rate_; }
  const ClusterIndex& clusters() const { return clusters_; }
  // Block bookkeeping for audits: start round of every block opened so far,
  // and the number of responses each block's forecaster has consumed.
  const std::vector<std::pair<std::size_t, std::int64_t>>& block_trace() const {
    return blocks_opened_;
  }

 private:
  struct Chain {
    std::int64_t last_position{-1};  // position of the last member in its block
    std::unique_ptr<HedgeState> hedge;
    std::unique_ptr<RngStream> rng;  // the block's private randomness
    std::size_t block_start{0};
    std::size_t trace_index{0};
  };

  std::shared_ptr<const ValueSpace> value_space_;
  FTimeRule rule_;
  std::int64_t window_;  // cluster window ceil(horizon/eps)
  double coin_rate_;
  ClusterIndex clusters_;
  std::uint64_t block_seed_;
  std::unordered_map<ClusterKey, Chain, ClusterKeyHash> chains_;
  std::vector<std::pair<std::size_t, std::int64_t>> blocks_opened_;
  ClusterKey last_key_{};
  std::int64_t pending_position_{-1};
  bool pending_{false};
};

}  // namespace metreg
