#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "metreg/rng.hpp"
#include "metreg/space.hpp"
#include "metreg/value.hpp"

using namespace metreg;

TEST_CASE("nudged_ceil handles exact integers and float dust") {
  CHECK(nudged_ceil(2.0) == 2);
  CHECK(nudged_ceil(2.0 + 1e-13) == 2);  // dust above an integer stays put
  CHECK(nudged_ceil(2.1) == 3);
  CHECK(nudged_ceil(0.0) == 0);
  CHECK(nudged_ceil(std::exp(1.0)) == 3);
  CHECK(nudged_ceil(std::exp(2.0)) == 8);
  CHECK(nudged_ceil(std::exp(3.0)) == 21);
  CHECK(nudged_ceil(std::log(2.0) / 0.5) == 2);
}

TEST_CASE("power_loss matches |d|^alpha") {
  CHECK(power_loss(2.0, 1.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(power_loss(2.0, 2.0) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(power_loss(3.0, 1.5) == doctest::Approx(std::pow(3.0, 1.5)).epsilon(1e-15));
  CHECK(power_loss(0.0, 2.0) == 0.0);
}

TEST_CASE("relaxed triangle constant: closed form and worked values") {
  // alpha = 1, eps = 1: c = (1 + 1/((2)^1 - 1))^1 = 2
  CHECK(relaxed_triangle_constant(1.0, 1.0) == doctest::Approx(2.0).epsilon(1e-12));
  // alpha = 2, eps = 1: c = (1 + 1/(sqrt(2)-1))^2 = (2 + sqrt(2))^2
  const double c21 = (2.0 + std::sqrt(2.0)) * (2.0 + std::sqrt(2.0));
  CHECK(relaxed_triangle_constant(2.0, 1.0) == doctest::Approx(c21).epsilon(1e-12));
  CHECK_THROWS_AS(relaxed_triangle_constant(0.5, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(relaxed_triangle_constant(2.0, 0.0), std::invalid_argument);

  // c <= (4*alpha/eps)^alpha over the whole eps-in-(0,1] parameter grid
  for (double alpha : {1.0, 1.5, 2.0, 3.0}) {
    for (double eps : {0.05, 0.25, 0.5, 1.0}) {
      const double c = relaxed_triangle_constant(alpha, eps);
      const double cap = std::pow(4.0 * alpha / eps, alpha);
      CHECK(c <= cap * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("power-weighted triangle inequalities hold on random draws") {
  RngStream rng(derive_seed(20260817, "identity-scan"));
  int checked = 0;
  for (double alpha : {1.0, 1.5, 2.0, 3.0}) {
    const double pow2 = std::pow(2.0, alpha - 1.0);
    for (double eps : {0.25, 0.5, 1.0}) {
      const double c = relaxed_triangle_constant(alpha, eps);
      for (int rep = 0; rep < 900; ++rep) {
        const double a = 10.0 * rng.uniform();
        const double b = 10.0 * rng.uniform();
        const double lhs = std::pow(a + b, alpha);
        const double slack = 1.0 + 1e-12;
        CHECK(lhs <= pow2 * (std::pow(a, alpha) + std::pow(b, alpha)) * slack + 1e-12);
        CHECK(lhs <= ((1.0 + eps) * std::pow(a, alpha) + c * std::pow(b, alpha)) * slack + 1e-12);
        ++checked;
      }
    }
  }
  CHECK(checked == 4 * 3 * 900);
}

// ---- Pathological discrete space ------------------------------------------

TEST_CASE("pathological partition: block boundaries and sizes") {
  const auto p1 = patho_partition(1);
  CHECK(p1.n_k == 1);
  CHECK(p1.i_begin == 1);
  CHECK(p1.i_end == 5);
  CHECK(p1.j_begin == 5);
  CHECK(p1.j_end == 7);

  const auto p2 = patho_partition(2);
  CHECK(p2.n_k == 7);
  CHECK(p2.i_end == 15);
  CHECK(p2.j_end == 19);

  CHECK(patho_partition(3).n_k == 19);
  CHECK(patho_partition(4).n_k == 39);
  CHECK(patho_partition(5).n_k == 71);

  for (int k = 1; k <= 10; ++k) {
    const auto p = patho_partition(k);
    CHECK(p.i_end - p.i_begin == 4ll * k);
    CHECK(p.j_end - p.j_begin == (1ll << k));
    CHECK(p.j_end == patho_partition(k + 1).n_k);  // blocks tile the integers
  }
}

TEST_CASE("pathological loss: frozen examples in block 1") {
  CHECK(patho_loss(1, 5) == 0.5);
  CHECK(patho_loss(3, 5) == 1.0);
  CHECK(patho_loss(1, 6) == 1.0);
  CHECK(patho_loss(3, 6) == 0.5);
  CHECK(patho_loss(5, 6) == 1.0);
  CHECK(patho_loss(0, 1) == 1.0);
  CHECK(patho_loss(4, 4) == 0.0);
}

TEST_CASE("pathological loss: metric axioms, exhaustive below 71") {
  constexpr std::int64_t N = 71;  // covers blocks 1..4 completely
  for (std::int64_t i = 0; i < N; ++i) {
    for (std::int64_t j = 0; j < N; ++j) {
      const double d = patho_loss(i, j);
      CHECK((d == 0.0 || d == 0.5 || d == 1.0));
      CHECK((d == 0.0) == (i == j));
      CHECK(d == patho_loss(j, i));
    }
  }
  for (std::int64_t i = 0; i < N; ++i)
    for (std::int64_t j = 0; j < N; ++j)
      for (std::int64_t m = 0; m < N; ++m)
        CHECK(patho_loss(i, j) <= patho_loss(i, m) + patho_loss(m, j) + 1e-15);
}

TEST_CASE("pathological block lookup") {
  CHECK(patho_block_of(0) == 0);
  CHECK(patho_block_of(1) == 1);
  CHECK(patho_block_of(6) == 1);
  CHECK(patho_block_of(7) == 2);
  CHECK(patho_block_of(18) == 2);
  CHECK(patho_block_of(19) == 3);
  CHECK(patho_block_of(70) == 4);
  CHECK(patho_block_of(71) == 5);
}

// ---- Concrete spaces --------------------------------------------------------

TEST_CASE("real line: distances, losses, unboundedness") {
  RealLine line1(1.0);
  RealLine line2(2.0);
  CHECK(line1.loss(1.0, -1.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(line2.loss(1.0, -1.0) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(!line1.diameter().has_value());
  CHECK_THROWS_AS(line1.sup_loss(), MissingCapability);
  CHECK(!line1.has_net());
  CHECK_THROWS_AS(line1.epsilon_net(0.5), MissingCapability);
  CHECK(as_real(line1.anchor()) == 0.0);
}

TEST_CASE("real line: dense enumeration prefix is the signed dyadics") {
  RealLine line(1.0);
  const std::vector<double> want = {0.0,  1.0,   -1.0,  0.5, -0.5, 2.0, -2.0,
                                    0.25, -0.25, 3.0,  -3.0, 0.125, -0.125, 1.5};
  for (std::size_t i = 0; i < want.size(); ++i)
    CHECK(as_real(line.dense_value(i)) == want[i]);
  // No repeats in a long prefix, and every dyadic grid point eventually shows up.
  std::set<double> seen;
  for (std::size_t i = 0; i < 500; ++i) seen.insert(as_real(line.dense_value(i)));
  CHECK(seen.size() == 500);
  CHECK(seen.count(0.75) == 1);
  CHECK(seen.count(-2.5) == 1);
}

TEST_CASE("unit interval: nets cover and dense prefix is dyadic") {
  UnitInterval seg(1.0);
  CHECK(seg.sup_loss() == 1.0);
  const std::vector<double> want = {0.0, 1.0, 0.5, 0.25, 0.75, 0.125, 0.375, 0.625, 0.875};
  for (std::size_t i = 0; i < want.size(); ++i)
    CHECK(as_real(seg.dense_value(i)) == want[i]);

  RngStream rng(derive_seed(7, "interval-net"));
  for (double eps : {0.5, 0.25, 0.1, 0.05}) {
    const auto net = seg.epsilon_net(eps);
    CHECK(!net.empty());
    for (const auto& v : net) {
      const double x = as_real(v);
      CHECK(x >= 0.0);
      CHECK(x <= 1.0);
    }
    for (int rep = 0; rep < 1000; ++rep) {
      const double x = rng.uniform();
      double best = 1e300;
      for (const auto& v : net) best = std::min(best, seg.distance(x, v));
      CHECK(best <= eps + 1e-12);
    }
  }
}

TEST_CASE("unit disk: geometry, nets, dense prefix") {
  UnitDisk disk(1.0);
  CHECK(disk.sup_loss() == 2.0);
  const Vec2 a{1.0, 0.0};
  const Vec2 b{-0.5, std::sqrt(3.0) / 2.0};
  CHECK(disk.distance(a, b) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-14));

  // Dense enumeration starts at the center, then the unit circle axis points.
  const Vec2 d0 = as_vec2(disk.dense_value(0));
  CHECK(d0.x == 0.0);
  CHECK(d0.y == 0.0);
  const Vec2 d1 = as_vec2(disk.dense_value(1));
  CHECK(d1.x == 1.0);
  CHECK(d1.y == 0.0);
  const Vec2 d2 = as_vec2(disk.dense_value(2));
  CHECK(d2.x == 0.0);
  CHECK(d2.y == 1.0);
  const Vec2 d3 = as_vec2(disk.dense_value(3));
  CHECK(d3.x == -1.0);
  const Vec2 d5 = as_vec2(disk.dense_value(5));
  CHECK(d5.x == 0.5);
  CHECK(d5.y == 0.0);

  // Repeat calls are stable, long prefix has no duplicates and stays inside.
  std::set<std::pair<double, double>> seen;
  for (std::size_t i = 0; i < 300; ++i) {
    const Vec2 v = as_vec2(disk.dense_value(i));
    const Vec2 again = as_vec2(disk.dense_value(i));
    CHECK(v.x == again.x);
    CHECK(v.y == again.y);
    CHECK(v.x * v.x + v.y * v.y <= 1.0 + 1e-12);
    seen.insert({v.x, v.y});
  }
  CHECK(seen.size() == 300);

  RngStream rng(derive_seed(7, "disk-net"));
  for (double eps : {0.5, 0.25, 0.1}) {
    const auto net = disk.epsilon_net(eps);
    CHECK(!net.empty());
    for (const auto& v : net) {
      const Vec2 p = as_vec2(v);
      CHECK(p.x * p.x + p.y * p.y <= 1.0 + 1e-12);
    }
    for (int rep = 0; rep < 1000; ++rep) {
      // Rejection-sample a point of the disk.
      double x, y;
      do {
        x = 2.0 * rng.uniform() - 1.0;
        y = 2.0 * rng.uniform() - 1.0;
      } while (x * x + y * y > 1.0);
      double best = 1e300;
      for (const auto& v : net) best = std::min(best, disk.distance(Vec2{x, y}, v));
      CHECK(best <= eps + 1e-12);
    }
  }
}

TEST_CASE("finite label spaces use the 0-1 loss") {
  FiniteLabels labels(3);
  CHECK(labels.size() == 3);
  CHECK(labels.sup_loss() == 1.0);
  CHECK(labels.distance(std::int64_t{0}, std::int64_t{0}) == 0.0);
  CHECK(labels.distance(std::int64_t{0}, std::int64_t{2}) == 1.0);
  const auto net = labels.epsilon_net(0.1);
  CHECK(net.size() == 3);
  CHECK(!labels.has_dense_sequence());
  CHECK_THROWS_AS(labels.dense_value(0), MissingCapability);
}

TEST_CASE("countable classification space") {
  CountableClassification cls;
  CHECK(cls.sup_loss() == 1.0);
  CHECK(cls.distance(std::int64_t{4}, std::int64_t{4}) == 0.0);
  CHECK(cls.distance(std::int64_t{4}, std::int64_t{9}) == 1.0);
  CHECK(as_index(cls.dense_value(17)) == 17);
  CHECK(!cls.has_net());
}

TEST_CASE("pathological space wraps the partition loss") {
  PathologicalSpace patho;
  CHECK(patho.sup_loss() == 1.0);
  CHECK(patho.distance(std::int64_t{1}, std::int64_t{5}) == 0.5);
  CHECK(as_index(patho.dense_value(12)) == 12);
  CHECK(!patho.has_net());
}

TEST_CASE("space registry resolves every published name") {
  for (const char* name : {"real-line", "real-line-a2", "unit-interval", "unit-disk",
                           "labels-2", "labels-3", "labels-10",
                           "countable-classification", "pathological"}) {
    const auto space = make_space(name);
    REQUIRE(space != nullptr);
    CHECK(space->name() == name);
  }
  CHECK(make_space("real-line-a2")->alpha() == 2.0);
  CHECK_THROWS_AS(make_space("no-such-space"), std::invalid_argument);
}

// ---- RNG -----------------------------------------------------------------

TEST_CASE("seed derivation is stable and name-sensitive") {
  CHECK(derive_seed(42, "learner") == derive_seed(42, "learner"));
  CHECK(derive_seed(42, "learner") != derive_seed(42, "adversary"));
  CHECK(derive_seed(42, "learner", 0) != derive_seed(42, "learner", 1));
  CHECK(derive_seed(42, "learner") != derive_seed(43, "learner"));
}

TEST_CASE("rng streams are deterministic and well-ranged") {
  RngStream a(derive_seed(99, "x"));
  RngStream b(derive_seed(99, "x"));
  for (int i = 0; i < 100; ++i) CHECK(a.raw() == b.raw());
  RngStream c(derive_seed(99, "x"));
  for (int i = 0; i < 1000; ++i) {
    const double u = c.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("inverse-CDF index sampling") {
  RngStream rng(derive_seed(5, "weights"));
  const std::vector<double> point_mass = {0.0, 1.0, 0.0};
  for (int i = 0; i < 20; ++i) CHECK(rng.sample_index(point_mass) == 1);

  // Empirical frequencies approach the weights.
  const std::vector<double> w = {1.0, 3.0};
  int ones = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) ones += rng.sample_index(w) == 1 ? 1 : 0;
  CHECK(std::abs(static_cast<double>(ones) / n - 0.75) < 0.02);

  CHECK_THROWS_AS(rng.sample_index({0.0, 0.0}), std::invalid_argument);
}
