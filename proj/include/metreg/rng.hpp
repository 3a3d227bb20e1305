// Seeded random streams with stable named derivation.
//
// Every component of an experiment (learner, adversary, process, each
// replica, each block learner) owns a stream derived from the master seed
// and a name, so adding or removing one component never perturbs the
// randomness of any other.
#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace metreg {

// One round of the splitmix64 generator; also used as the seed mixer.
std::uint64_t splitmix64(std::uint64_t& state);

// Stable (master, name, index) -> seed derivation: FNV-1a over the name,
// mixed with the master seed and index through splitmix64 rounds.
std::uint64_t derive_seed(std::uint64_t master, std::string_view name,
                          std::uint64_t index = 0);

class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  // Uniform draw in [0,1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Inverse-CDF sample from nonnegative weights; consumes one uniform.
  // Weights need not be normalized; at least one must be positive.
  std::size_t sample_index(const std::vector<double>& weights);

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

inline RngStream child_stream(std::uint64_t master, std::string_view name,
                              std::uint64_t index = 0) {
  return RngStream(derive_seed(master, name, index));
}

}  // namespace metreg
