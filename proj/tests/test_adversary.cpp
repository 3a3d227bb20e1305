#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <vector>

#include "metreg/adversary.hpp"
#include "metreg/rng.hpp"
#include "metreg/space.hpp"

using namespace metreg;

TEST_CASE("triangle: geometry and closed-form fixed losses") {
  for (int k = 0; k < 3; ++k) {
    const Vec2 v = TriangleAdversary::vertex(k);
    CHECK(std::abs(std::hypot(v.x, v.y) - 1.0) <= 1e-15);
  }
  // Side length sqrt(3); a fixed vertex misses 2 of 3 draws.
  CHECK(std::abs(TriangleAdversary::fixed_vertex_expected_loss() -
                 2.0 * std::sqrt(3.0) / 3.0) <= 1e-12);
  CHECK(TriangleAdversary::center_step_loss() == 1.0);

  auto disk = make_space("unit-disk");
  const Value center = Vec2{0.0, 0.0};
  for (int k = 0; k < 3; ++k) {
    CHECK(std::abs(disk->loss(center, Value{TriangleAdversary::vertex(k)}) -
                   1.0) <= 1e-15);
  }
}

TEST_CASE("triangle: empirical frequencies and obliviousness") {
  TriangleAdversary adv(child_stream(21, "tri"));
  std::vector<int> counts(3, 0);
  const int T = 100000;
  for (int t = 0; t < T; ++t) {
    const Value y = adv.respond(Value{0.0}, Value{0.0});
    const Vec2 v = as_vec2(y);
    for (int k = 0; k < 3; ++k) {
      const Vec2 u = TriangleAdversary::vertex(k);
      if (u.x == v.x && u.y == v.y) ++counts[k];
    }
  }
  CHECK(counts[0] + counts[1] + counts[2] == T);
  for (int k = 0; k < 3; ++k)
    CHECK(std::abs(counts[k] / static_cast<double>(T) - 1.0 / 3.0) <= 0.01);

  // Oblivious: the emitted sequence ignores the prediction argument.
  TriangleAdversary a1(child_stream(22, "tri")), a2(child_stream(22, "tri"));
  for (int t = 0; t < 500; ++t) {
    const Value y1 = a1.respond(Value{0.0}, Value{0.0});
    const Value y2 = a2.respond(Value{0.0}, Value{Vec2{0.9, -0.9}});
    CHECK(value_equal(y1, y2));
  }
  CHECK(adv.oblivious());
}

TEST_CASE("patho: hindsight comparator pays exactly 1/2 per step") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    PathoAdversary adv(3, child_stream(seed, "patho"));
    const PathoPartition part = patho_partition(3);
    CHECK(adv.comparator() >= part.j_begin);
    CHECK(adv.comparator() < part.j_end);
    for (int u = 1; u <= 3; ++u) {
      const std::int64_t y_u = adv.response_at(u);
      CHECK(y_u >= part.i_begin + 4 * (u - 1));
      CHECK(y_u < part.i_begin + 4 * u);
      CHECK(patho_loss(y_u, adv.comparator()) == 0.5);
    }
  }
}

TEST_CASE("patho: exhaustive fixed-prediction floor at k = 3") {
  // Over the four bit pairs, every fixed prediction has expected step loss
  // >= 3/4, with equality exactly on the step's own I-slot and all of J_3.
  const int k = 3;
  const PathoPartition part = patho_partition(k);
  const std::int64_t limit = patho_partition(k + 1).n_k;  // 39
  CHECK(limit == 39);
  for (int u = 1; u <= k; ++u) {
    double min_seen = 2.0;
    for (std::int64_t y = 0; y < limit; ++y) {
      const double e = patho_fixed_expected_step_loss(k, u, y);
      min_seen = std::min(min_seen, e);
      const bool own_slot = y >= part.i_begin + 4 * (u - 1) &&
                            y < part.i_begin + 4 * u;
      const bool in_j = y >= part.j_begin && y < part.j_end;
      if (own_slot || in_j) {
        CHECK(e == 0.75);
      } else {
        CHECK(e == 1.0);
      }
    }
    CHECK(min_seen == 0.75);
  }
}

TEST_CASE("patho: comparator minimizes realized loss for every realization") {
  const int k = 3;
  const PathoPartition part = patho_partition(k);
  const std::int64_t limit = patho_partition(k + 1).n_k;
  for (int bits = 0; bits < 64; ++bits) {
    std::vector<std::int64_t> ys;
    std::int64_t jstar = part.j_begin;
    for (int u = 1; u <= k; ++u) {
      const int b = (bits >> (2 * (u - 1))) & 1;
      const int c = (bits >> (2 * (u - 1) + 1)) & 1;
      ys.push_back(part.i_begin + 4 * (u - 1) + 2 * b + c);
      if (b) jstar += std::int64_t{1} << (u - 1);
    }
    double best_fixed = 1e9;
    for (std::int64_t y = 0; y < limit; ++y) {
      double cum = 0.0;
      for (std::int64_t y_u : ys) cum += patho_loss(y_u, y);
      best_fixed = std::min(best_fixed, cum);
      if (y == jstar) CHECK(cum == 1.5);
    }
    CHECK(best_fixed == 1.5);
  }
}

TEST_CASE("log-domain reals: codecs, arithmetic, cancellation") {
  CHECK(logreal_from(0.0).sign == 0);
  CHECK(logreal_from(-8.0).sign == -1);
  CHECK(logreal_from(-8.0).log2_abs == 3.0);
  CHECK(logreal_to_double(logreal_pow2(1, 10.0)) == 1024.0);
  CHECK(logreal_to_double(logreal_pow2(-1, 0.0)) == -1.0);
  CHECK_THROWS_AS(logreal_to_double(logreal_pow2(1, 2000.0)), LogDomainError);

  // log2(2^4 + 2^0) = log2 17.
  CHECK(std::abs(log2_add(4.0, 0.0) - std::log2(17.0)) <= 1e-14);
  // log2(2^5 - 2^3) = log2 24.
  CHECK(std::abs(log2_sub(5.0, 3.0) - std::log2(24.0)) <= 1e-14);
  // Well-separated near-cancellation still carries the right magnitude:
  // 2^100 (1 + x) - 2^100 = 2^100 x.
  const double x = 1e-10;
  const double p = 100.0 + std::log2(1.0 + x);
  CHECK(std::abs(log2_sub(p, 100.0) - (100.0 + std::log2(x))) <= 1e-3);
  // Sub-precision differences are refused rather than returning noise.
  CHECK_THROWS_AS(log2_sub(100.0 + 1e-13, 100.0), LogDomainError);
  CHECK_THROWS_AS(log2_sub(3.0, 3.0), LogDomainError);

  // |1 - (-16)|^1 = 17 via mixed signs.
  const LogReal one = logreal_from(1.0);
  const LogReal neg16 = logreal_pow2(-1, 4.0);
  const LogReal l = logreal_loss(one, neg16, 1.0);
  CHECK(l.sign == 1);
  CHECK(std::abs(l.log2_abs - std::log2(17.0)) <= 1e-14);
  // Equal values have zero loss.
  CHECK(logreal_loss(neg16, neg16, 2.0).sign == 0);

  CHECK(logreal_less(logreal_pow2(-1, 50.0), logreal_pow2(-1, 10.0)));
  CHECK(logreal_less(logreal_pow2(-1, 10.0), logreal_from(0.0)));
  CHECK(logreal_less(logreal_from(0.0), logreal_pow2(1, 10.0)));
  CHECK(logreal_less(logreal_pow2(1, 10.0), logreal_pow2(1, 50.0)));
}

TEST_CASE("superexp: beta, exact magnitude ratios, sign replay") {
  SuperexpAdversary a2(2.0, 6, child_stream(31, "se"));
  CHECK(a2.beta() == 4.0);
  SuperexpAdversary a15(1.5, 6, child_stream(31, "se"));
  CHECK(a15.beta() == 6.0);
  for (int t = 1; t < 6; ++t) {
    CHECK(a2.value_at(t + 1).log2_abs / a2.value_at(t).log2_abs == 4.0);
    CHECK(a15.value_at(t + 1).log2_abs / a15.value_at(t).log2_abs == 6.0);
  }
  SuperexpAdversary b(2.0, 6, child_stream(31, "se"));
  for (int t = 1; t <= 6; ++t) CHECK(b.value_at(t).sign == a2.value_at(t).sign);
}

TEST_CASE("superexp: one late sign mistake dominates the whole prefix") {
  for (double alpha : {1.5, 2.0}) {
    for (int T = 3; T <= 6; ++T) {
      const SuperexpDominance d = superexp_dominance(alpha, T);
      CHECK(d.dominates);
      CHECK(d.lhs_log2 > d.rhs_log2);
    }
  }
  // Pinned instance alpha=2, T=4: lhs = (alpha-1) beta^4 + log2 alpha = 257
  // exactly; rhs = log2 4 + log2 sum_{t<4} (1+2^(4^t))^2, just above 130.
  const SuperexpDominance d = superexp_dominance(2.0, 4);
  CHECK(d.lhs_log2 == 257.0);
  // The t=3 term 2^128 dominates the sum; the smaller terms sit ~88 bits
  // down and vanish at double precision, so the rhs rounds to exactly 130.
  CHECK(d.rhs_log2 >= 130.0);
  CHECK(d.rhs_log2 < 130.000001);
}

TEST_CASE("crf: spike schedule and noiseless responses") {
  CHECK(CrfAdversary::spike_time(1) == 2);
  CHECK(CrfAdversary::spike_time(2) == 6);
  CHECK(CrfAdversary::spike_time(3) == 14);
  CHECK(CrfAdversary::spike_time(4) == 30);
  CHECK(CrfAdversary::spike_time(9) == 1022);

  CrfAdversary adv(1.0, 2046, child_stream(41, "crf"));
  CHECK(adv.spike_count() == 10);
  CHECK(adv.spike_index_at(14).value() == 3);
  CHECK_FALSE(adv.spike_index_at(13).has_value());
  CHECK_FALSE(adv.spike_index_at(15).has_value());
  CHECK_FALSE(adv.spike_index_at(1).has_value());

  for (std::int64_t t = 1; t <= 2046; ++t) {
    const auto k = adv.spike_index_at(t);
    if (!k) {
      CHECK(adv.response_value(t) == 0.0);
    } else if (adv.bit(*k)) {
      CHECK(adv.response_value(t) == std::exp2(*k));  // alpha = 1
      CHECK(adv.anchor_loss_at(t) == std::exp2(*k));
    } else {
      CHECK(adv.response_value(t) == 0.0);
    }
  }
}

TEST_CASE("crf: first-moment average never exceeds (T+1)/T") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    CrfAdversary adv(1.0, 2046, child_stream(seed, "crf"));
    for (std::int64_t T = 2; T <= 2046; ++T) {
      const double avg = adv.first_moment_average(T);
      CHECK(avg <= (static_cast<double>(T) + 1.0) / static_cast<double>(T));
    }
    // Exact identity at the spike times themselves.
    double spikes = 0.0;
    for (int k = 1; k <= adv.spike_count(); ++k) {
      if (adv.bit(k)) spikes += std::exp2(k);
      CHECK(adv.first_moment_average(CrfAdversary::spike_time(k)) ==
            spikes / static_cast<double>(CrfAdversary::spike_time(k)));
    }
  }
}

TEST_CASE("crf: per-spike floor over the fair bit") {
  // Metric loss (alpha = 1): (|p| + |p - y_k|)/2 >= y_k / 2 = 2^k / 2 for
  // every prediction p, with equality on [0, y_k].
  for (int k = 1; k <= 5; ++k) {
    const double y_k = std::exp2(k);
    double min_seen = 1e18;
    for (double p = -2.0 * y_k; p <= 2.0 * y_k; p += y_k / 64.0)
      min_seen = std::min(min_seen, crf_spike_expected_loss(p, k, 1.0));
    CHECK(std::abs(min_seen - std::exp2(k) / 2.0) <= 1e-9);
    CHECK(crf_spike_expected_loss(y_k / 2.0, k, 1.0) == std::exp2(k) / 2.0);
  }
  // Squared loss (alpha = 2, c_l = 2): the floor is l(y_0,y_k)/(2 c_l).
  for (int k = 1; k <= 5; ++k) {
    const double y_k = std::exp2(k / 2.0);
    double min_seen = 1e18;
    for (double p = -y_k; p <= 2.0 * y_k; p += y_k / 512.0)
      min_seen = std::min(min_seen, crf_spike_expected_loss(p, k, 2.0));
    CHECK(std::abs(min_seen - std::exp2(k) / 4.0) <= 1e-6 * std::exp2(k));
  }
}

TEST_CASE("empirical integrability tail averages") {
  // Bounded responses with M above the bound: the indicator never fires.
  std::vector<double> bounded(1000, 0.7);
  CHECK(empirical_integrability_tail(bounded, 1.0) == 0.0);

  // Exponential(1) anchor losses: E[Z 1[Z >= 5]] = 6 e^-5.
  RngStream rng(child_stream(51, "exp"));
  std::vector<double> zs;
  for (int t = 0; t < 100000; ++t) zs.push_back(-std::log1p(-rng.uniform()));
  const double expect = 6.0 * std::exp(-5.0);
  CHECK(std::abs(empirical_integrability_tail(zs, 5.0) - expect) <= 0.01);

  // CRF responses at T = t_k with M = 2^m: exactly the spikes >= m fire.
  CrfAdversary adv(1.0, 510, child_stream(52, "crf"));
  const int kmax = adv.spike_count();
  CHECK(kmax == 8);
  const std::int64_t T = CrfAdversary::spike_time(kmax);
  std::vector<double> losses;
  for (std::int64_t t = 1; t <= T; ++t) losses.push_back(adv.anchor_loss_at(t));
  for (int m = 1; m <= kmax; ++m) {
    double expected = 0.0;
    for (int l = m; l <= kmax; ++l)
      if (adv.bit(l)) expected += std::exp2(l);
    expected /= static_cast<double>(T);
    CHECK(empirical_integrability_tail(losses, std::exp2(m)) == expected);
    CHECK(expected <= 1.0);
  }
}
