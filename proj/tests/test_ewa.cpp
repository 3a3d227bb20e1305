#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <vector>

#include "metreg/ewa.hpp"
#include "metreg/rng.hpp"
#include "metreg/space.hpp"

using namespace metreg;

namespace {

LossFn zero_one = [](const Value& a, const Value& b) {
  return value_equal(a, b) ? 0.0 : 1.0;
};

std::vector<Value> label_values(std::int64_t n) {
  std::vector<Value> out;
  for (std::int64_t i = 0; i < n; ++i) out.emplace_back(i);
  return out;
}

}  // namespace

TEST_CASE("tuned horizon and rate: worked example") {
  // sup-loss 1, two candidates, accuracy 1/2 -> horizon 2, rate sqrt(4 ln 2).
  CHECK(hedge_horizon(1.0, 2, 0.5) == 2);
  CHECK(hedge_rate(1.0, 2, 2) == doctest::Approx(std::sqrt(4.0 * std::log(2.0))).epsilon(1e-12));
  CHECK(hedge_rate(1.0, 2, 2) == doctest::Approx(1.6651092223153954).epsilon(1e-12));
  CHECK(hedge_horizon(2.0, 16, 0.25) == nudged_ceil(4.0 * std::log(16.0) / 0.125));
}

TEST_CASE("fixed-rate forecaster: mixture regret bound holds exactly") {
  for (std::int64_t n : {2, 4, 16}) {
    for (std::uint64_t seq = 0; seq < 25; ++seq) {
      const std::int64_t T = 1000;
      const double eta = hedge_rate(1.0, static_cast<std::size_t>(n), T);
      HedgeState hedge(label_values(n), eta);
      RngStream adv(child_stream(31337, "adv", seq * 100 + static_cast<std::uint64_t>(n)));
      double mixture_total = 0.0;
      for (std::int64_t t = 0; t < T; ++t) {
        // Adversarial-ish stream: biased label with occasional switches.
        const std::int64_t hot = (t / 137) % n;
        const std::int64_t y = adv.uniform() < 0.6
                                   ? hot
                                   : static_cast<std::int64_t>(adv.uniform() * n);
        mixture_total += hedge.mixture_loss(zero_one, Value{y});
        hedge.update(zero_one, Value{y});
      }
      const double budget = hedge_regret_budget(1.0, static_cast<std::size_t>(n), eta, T);
      REQUIRE(mixture_total <= hedge.min_cumulative() + budget + 1e-9);
    }
  }
}

TEST_CASE("fixed-rate forecaster: weights concentrate on the leader") {
  HedgeState hedge(label_values(3), 0.8);
  for (int t = 0; t < 50; ++t) hedge.update(zero_one, Value{std::int64_t{2}});
  const auto w = hedge.weights();
  CHECK(w[2] > 0.999);
  CHECK(hedge.min_cumulative() == 0.0);
  RngStream rng(derive_seed(8, "pick"));
  for (int i = 0; i < 20; ++i) CHECK(hedge.sample(rng) == 2);
}

TEST_CASE("growing forecaster: frozen rate and posterior mass") {
  GrowingHedge g(100);
  CHECK(g.eta() == doctest::Approx(0.30348542587702925).epsilon(1e-14));

  // Nothing seen: deterministic label 0.
  CHECK(g.success_mass(0) == 1.0);
  CHECK(g.success_mass(7) == 0.0);

  for (int i = 0; i < 99; ++i) g.observe(7);
  g.observe(3);
  const double eta = g.eta();
  const double w7 = std::exp(99.0 * eta), w3 = std::exp(1.0 * eta);
  CHECK(g.success_mass(7) == doctest::Approx(w7 / (w7 + w3)).epsilon(1e-12));
  CHECK(g.success_mass(3) == doctest::Approx(w3 / (w7 + w3)).epsilon(1e-12));
  CHECK(g.success_mass(12) == 0.0);

  RngStream rng(derive_seed(9, "g"));
  int sevens = 0;
  for (int i = 0; i < 200; ++i) sevens += g.sample(rng) == 7 ? 1 : 0;
  CHECK(sevens >= 195);  // mass on 7 is > 0.999999
}

TEST_CASE("growing forecaster: deterministic score bound") {
  for (std::int64_t t0 : {10, 100, 1000}) {
    for (std::uint64_t seq = 0; seq < 30; ++seq) {
      GrowingHedge g(t0);
      RngStream adv(child_stream(555, "labels", seq * 10 + static_cast<std::uint64_t>(t0)));
      const std::int64_t T = t0;
      double score = 0.0;
      std::map<std::int64_t, std::int64_t> hits;
      for (std::int64_t t = 0; t < T; ++t) {
        // Small alphabet with a drifting favourite.
        const std::int64_t y = adv.uniform() < 0.5 ? (t * 3) / T
                                                   : static_cast<std::int64_t>(adv.uniform() * 6);
        score += g.success_mass(y);
        g.observe(y);
        ++hits[y];
      }
      std::int64_t best = 0;
      for (const auto& [y, c] : hits) best = std::max(best, c);
      REQUIRE(score >= static_cast<double>(best) - g.score_budget(T) - 1e-9);
    }
  }
}

TEST_CASE("mean estimation: activation schedule on the real line") {
  auto line = make_space("real-line");
  MeanEstLearner learner(line, child_stream(1, "learner"));

  // Dense prefix 0, 1, -1, 1/2, ...; anchor losses 0, 1, 1, 1/2.
  // Joining times: max(e^i, e^loss) ceiled -> 1, 3, 8, 21.
  CHECK(learner.activation_time(0) == 1);

  // Walk ten rounds so the pool covers every index i <= ln 10.
  for (int t = 1; t <= 10; ++t) {
    learner.predict(Value{0.0});
    learner.observe(Value{0.0});
  }
  CHECK(learner.activation_time(1) == 3);
  CHECK(learner.activation_time(2) == 8);
  CHECK(learner.active_indices() == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("mean estimation: opening prediction is the anchor") {
  auto line = make_space("real-line");
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    MeanEstLearner learner(line, child_stream(seed, "learner"));
    CHECK(as_real(learner.predict(Value{0.0})) == 0.0);
  }
}

TEST_CASE("mean estimation: locks onto a constant stream") {
  // The 1/(4 sqrt t) rate concentrates slowly (off-leader mass decays like
  // exp(-sqrt(t)/4)), so check a long-run average plus a tail window.
  auto line = make_space("real-line");
  MeanEstLearner learner(line, child_stream(42, "learner"));
  double total = 0.0, tail = 0.0;
  const int T = 2000;
  for (int t = 1; t <= T; ++t) {
    const Value yhat = learner.predict(Value{0.0});
    const double l = std::abs(as_real(yhat) - 1.0);
    total += l;
    if (t > T - 500) tail += l;
    learner.observe(Value{1.0});
  }
  CHECK(total / T <= 0.1);
  CHECK(tail / 500 <= 0.05);
}

TEST_CASE("mean estimation: identical seeds replay identical predictions") {
  auto line = make_space("real-line");
  std::vector<double> a, b;
  for (auto* sink : {&a, &b}) {
    MeanEstLearner learner(line, child_stream(17, "learner"));
    RngStream adv(child_stream(17, "adv"));
    for (int t = 1; t <= 300; ++t) {
      sink->push_back(as_real(learner.predict(Value{0.0})));
      learner.observe(Value{std::floor(adv.uniform() * 3.0)});
    }
  }
  CHECK(a == b);
}
