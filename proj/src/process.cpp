#include "metreg/process.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace metreg {

namespace {

class IidUniform final : public InstanceProcess {
 public:
  explicit IidUniform(RngStream rng) : rng_(rng) {}
  std::string kind() const override { return "iid_uniform"; }
  Value next() override { return rng_.uniform(); }

 private:
  RngStream rng_;
};

class FiniteSupport final : public InstanceProcess {
 public:
  FiniteSupport(std::vector<Value> support, RngStream rng)
      : support_(std::move(support)), rng_(rng) {
    if (support_.empty())
      throw std::invalid_argument("finite_support: empty support");
  }
  std::string kind() const override { return "finite_support"; }
  Value next() override {
    const std::vector<double> w(support_.size(), 1.0);
    return support_[rng_.sample_index(w)];
  }

 private:
  std::vector<Value> support_;
  RngStream rng_;
};

class Constant final : public InstanceProcess {
 public:
  explicit Constant(Value base) : base_(std::move(base)) {}
  std::string kind() const override { return "constant"; }
  Value next() override { return base_; }

 private:
  Value base_;
};

class SparseNovelty final : public InstanceProcess {
 public:
  explicit SparseNovelty(Value base) : base_(std::move(base)) {}
  std::string kind() const override { return "sparse_novelty"; }
  Value next() override {
    ++t_;
    // Fresh point k at t = 2^(k+1) - 2, i.e. when t + 2 is a power of two.
    const std::uint64_t v = static_cast<std::uint64_t>(t_) + 2;
    if (t_ >= 2 && (v & (v - 1)) == 0) {
      ++k_;
      return k_;
    }
    return base_;
  }

 private:
  Value base_;
  std::int64_t t_{0};
  std::int64_t k_{0};
};

class Bursty final : public InstanceProcess {
 public:
  explicit Bursty(double epsilon) : epsilon_(epsilon) {
    if (!(epsilon > 0.0) || epsilon >= 1.0)
      throw std::invalid_argument("bursty: epsilon must be in (0,1)");
  }
  std::string kind() const override { return "bursty"; }
  Value next() override {
    ++t_;
    // Window p covers (64*2^(p-1), 64*2^p]; its first epsilon-fraction
    // emits the midpoint of (2^{-p-1}, 2^{-p}].
    std::int64_t lo = 64, p = 0;
    while (t_ > 2 * lo) {
      lo *= 2;
      ++p;
    }
    if (t_ > lo) {  // inside window p+1 = (lo, 2*lo]
      const double burst_len = epsilon_ * static_cast<double>(lo);
      if (static_cast<double>(t_ - lo) <= burst_len)
        return 3.0 * std::exp2(-static_cast<double>(p + 1) - 2.0);
    }
    return 1.0;
  }

 private:
  double epsilon_;
  std::int64_t t_{0};
};

}  // namespace

std::unique_ptr<InstanceProcess> make_process(const std::string& kind,
                                              const ProcessParams& params,
                                              std::uint64_t seed) {
  if (kind == "iid_uniform")
    return std::make_unique<IidUniform>(child_stream(seed, "process"));
  if (kind == "finite_support")
    return std::make_unique<FiniteSupport>(params.support,
                                           child_stream(seed, "process"));
  if (kind == "constant") return std::make_unique<Constant>(params.base);
  if (kind == "sparse_novelty")
    return std::make_unique<SparseNovelty>(params.base);
  if (kind == "bursty") return std::make_unique<Bursty>(params.epsilon);
  throw std::invalid_argument("make_process: unknown kind " + kind);
}

std::vector<std::int64_t> smv_diagnostic(
    InstanceProcess& process,
    const std::function<std::int64_t(const Value&)>& partition,
    const std::vector<std::int64_t>& horizons) {
  std::vector<std::int64_t> out;
  if (horizons.empty()) return out;
  if (!std::is_sorted(horizons.begin(), horizons.end()))
    throw std::invalid_argument("smv_diagnostic: horizons must ascend");
  std::unordered_set<std::int64_t> seen;
  std::int64_t t = 0;
  for (const std::int64_t h : horizons) {
    for (; t < h; ++t) seen.insert(partition(process.next()));
    out.push_back(static_cast<std::int64_t>(seen.size()));
  }
  return out;
}

std::vector<double> cs_diagnostic(
    const std::function<std::unique_ptr<InstanceProcess>(std::uint64_t)>&
        make_replica,
    const std::vector<std::function<bool(const Value&)>>& sets,
    std::int64_t horizon, int replicas) {
  if (horizon < 8 || replicas < 1)
    throw std::invalid_argument("cs_diagnostic: bad horizon or replicas");
  std::vector<double> means(sets.size(), 0.0);
  for (int r = 0; r < replicas; ++r) {
    auto process = make_replica(static_cast<std::uint64_t>(r));
    // Hits per set per round, then window maxima.
    std::vector<std::vector<bool>> hits(sets.size());
    for (std::int64_t t = 0; t < horizon; ++t) {
      const Value x = process->next();
      for (std::size_t k = 0; k < sets.size(); ++k)
        hits[k].push_back(sets[k](x));
    }
    for (std::size_t k = 0; k < sets.size(); ++k) {
      double best = 0.0;
      std::int64_t hi = horizon;
      for (int w = 0; w < 3 && hi >= 2; ++w) {
        const std::int64_t lo = hi / 2;  // window (lo, hi]
        std::int64_t count = 0;
        for (std::int64_t t = lo; t < hi; ++t) count += hits[k][t] ? 1 : 0;
        best = std::max(best,
                        static_cast<double>(count) / static_cast<double>(hi - lo));
        hi = lo;
      }
      means[k] += best;
    }
  }
  for (double& m : means) m /= static_cast<double>(replicas);
  return means;
}

}  // namespace metreg
