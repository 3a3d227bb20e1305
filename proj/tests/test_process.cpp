#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <bit>
#include <cmath>
#include <cstdint>
#include <unordered_set>
#include <vector>

#include "metreg/process.hpp"
#include "metreg/value.hpp"

using namespace metreg;

TEST_CASE("make_process: stream shapes per kind") {
  ProcessParams params;

  auto constant = make_process("constant", params, 1);
  for (int t = 0; t < 50; ++t)
    CHECK(as_index(constant->next()) == 0);

  params.support = {Value{std::int64_t{0}}, Value{std::int64_t{1}},
                    Value{std::int64_t{2}}};
  auto fs = make_process("finite_support", params, 2);
  std::unordered_set<std::int64_t> seen;
  for (int t = 0; t < 64; ++t) {
    const std::int64_t v = as_index(fs->next());
    CHECK(v >= 0);
    CHECK(v <= 2);
    seen.insert(v);
  }
  CHECK(seen.size() == 3);

  auto iid = make_process("iid_uniform", params, 3);
  for (int t = 0; t < 64; ++t) {
    const double x = as_real(iid->next());
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }

  // Fresh integer k exactly at t = 2^(k+1) - 2.
  auto sparse = make_process("sparse_novelty", params, 4);
  for (std::int64_t t = 1; t <= 2046; ++t) {
    const std::int64_t v = as_index(sparse->next());
    const std::uint64_t w = static_cast<std::uint64_t>(t) + 2;
    if (t >= 2 && (w & (w - 1)) == 0) {
      CHECK(v == std::bit_width(w) - 2);
    } else {
      CHECK(v == 0);
    }
  }

  ProcessParams bad;
  CHECK_THROWS_AS(make_process("finite_support", bad, 5),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_process("no-such-kind", bad, 5), std::invalid_argument);
}

TEST_CASE("smv diagnostic: counts per horizon") {
  ProcessParams params;
  const std::vector<std::int64_t> horizons = {1, 10, 100, 1000};

  auto constant = make_process("constant", params, 1);
  const auto id_part = [](const Value& v) { return as_index(v); };
  CHECK(smv_diagnostic(*constant, id_part, horizons) ==
        std::vector<std::int64_t>{1, 1, 1, 1});

  // A process meeting a fresh cell every step: counts equal the horizons.
  auto iid = make_process("iid_uniform", params, 2);
  const auto bits_part = [](const Value& v) {
    return std::bit_cast<std::int64_t>(as_real(v));
  };
  CHECK(smv_diagnostic(*iid, bits_part, horizons) == horizons);

  // Sparse novelty visits 1 + #{k : 2^(k+1) - 2 <= T} cells.
  auto sparse = make_process("sparse_novelty", params, 3);
  const auto counts = smv_diagnostic(*sparse, id_part, horizons);
  CHECK(counts == std::vector<std::int64_t>{1, 3, 6, 9});
  for (std::size_t i = 1; i < counts.size(); ++i)
    CHECK(counts[i] >= counts[i - 1]);

  auto c2 = make_process("constant", params, 1);
  CHECK_THROWS_AS(smv_diagnostic(*c2, id_part, {10, 5}),
                  std::invalid_argument);
}

TEST_CASE("cs diagnostic: shrinking sets under iid uniform") {
  std::vector<std::function<bool(const Value&)>> sets;
  for (int k = 1; k <= 6; ++k) {
    sets.push_back([k](const Value& v) {
      const double x = as_real(v);
      return x > 0.0 && x < std::exp2(-k);
    });
  }
  // Full space as a control.
  sets.push_back([](const Value&) { return true; });

  const auto make = [](std::uint64_t r) {
    return make_process("iid_uniform", ProcessParams{}, 1000 + r);
  };
  const auto est = cs_diagnostic(make, sets, 10000, 20);
  REQUIRE(est.size() == 7);
  for (int k = 1; k <= 6; ++k) {
    const double p = std::exp2(-k);
    CHECK(est[k - 1] >= 0.5 * p - 0.005);
    CHECK(est[k - 1] <= 2.0 * p + 0.005);
    if (k >= 2) CHECK(est[k - 1] <= est[k - 2] + 0.01);
  }
  CHECK(est[5] <= 0.05);
  CHECK(est[6] == 1.0);

  // Determinism: same seeds give the same report.
  CHECK(cs_diagnostic(make, sets, 10000, 20) == est);
}

TEST_CASE("cs diagnostic: bursty stream stays bounded away from zero") {
  // Every shrinking set keeps receiving epsilon-length bursts in later
  // windows, so the tail occupancy never decays: non-CS behavior at desk
  // scale, in contrast to the iid estimates above.
  std::vector<std::function<bool(const Value&)>> sets;
  for (int k = 1; k <= 5; ++k) {
    sets.push_back([k](const Value& v) {
      const double x = as_real(v);
      return x > 0.0 && x < std::exp2(-k);
    });
  }
  ProcessParams params;
  params.epsilon = 0.2;
  const auto make = [&params](std::uint64_t) {
    return make_process("bursty", params, 0);
  };
  const auto est = cs_diagnostic(make, sets, 8192, 2);
  REQUIRE(est.size() == 5);
  for (double e : est) CHECK(e >= 0.1);
}
