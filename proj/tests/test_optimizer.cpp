#include "macstate/optimizer.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace macstate;
using doctest::Approx;

namespace {

SearchConfig small_cfg() {
  SearchConfig c;
  c.weight_count = 9;
  c.restarts = 4;
  c.local_steps = 150;
  c.threads = 2;
  return c;
}

} // namespace

TEST_CASE("search configuration") {
  SearchConfig c;
  CHECK_NOTHROW(c.validate());
  c.weight_count = 1;
  CHECK_THROWS_AS(c.validate(), InputError);
  c = {};
  c.tol = 0.5;
  CHECK_THROWS_AS(c.validate(), InputError);
  c = {};
  c.u_card = 0;
  CHECK_THROWS_AS(c.validate(), InputError);

  const auto a = sweep_angles(5);
  REQUIRE(a.size() == 5);
  CHECK(a.front() == 0.0);
  CHECK(a.back() == Approx(std::acos(-1.0) / 2));
  for (std::size_t k = 1; k < a.size(); ++k)
    CHECK(a[k] > a[k - 1]);
  // Symmetric about pi/4.
  CHECK(a[1] + a[3] == Approx(std::acos(-1.0) / 2));
}

TEST_CASE("cardinality caps") {
  const auto ch = build_switch_bsc(0.01);
  // min(2*2*2 + 3, 2*2 + 4)
  CHECK(cardinality_cap(ch, CoopMode::one_way) == 8);
  SearchConfig c = small_cfg();
  c.u_card = 9;
  CHECK_THROWS_AS(PolicyModel(ch, {CoopMode::one_way, 0.2}, InputConstraint::none(), c),
                  InputError);
  c.u_card = 8;
  CHECK_NOTHROW(PolicyModel(ch, {CoopMode::one_way, 0.2}, InputConstraint::none(), c));
}

TEST_CASE("coordinate ascent on a toy model") {
  // One row of width 3; pentagon a1 = p0, a2 = p2, a12 = 1. The best mu=(1,1)
  // value is 1, reached whenever p1 = 0.
  PentagonModel m;
  m.blocks = {{1, 3}};
  m.repair = [](std::span<double>) {};
  m.pentagon = [](std::span<const double> p) { return Pentagon{p[0], p[2], 1.0, true}; };
  CHECK(m.parameter_count() == 3);
  const auto cfg = small_cfg();
  const auto out = coordinate_ascent(m, 1.0, 1.0, cfg, 0, 7);
  CHECK(out.value == Approx(1.0).epsilon(1e-6));
  const auto again = coordinate_ascent(m, 1.0, 1.0, cfg, 0, 7);
  CHECK(again.params == out.params);
  const auto r1 = coordinate_ascent(m, 1.0, 0.0, cfg, 2, 9);
  CHECK(r1.value == Approx(1.0).epsilon(1e-6));
}

TEST_CASE("message-only switch channel without noise") {
  // I(U;S) = 0 forces a fixed input split, so max R1 = min(1/2 + c12, 1).
  const auto ch = build_switch_bsc(0.0);
  for (double c12 : {0.0, 0.3, 0.7}) {
    const auto res = trace_boundary(ch, {CoopMode::message_only, c12},
                                    InputConstraint::none(), small_cfg());
    CHECK(res.region.max_r1() == Approx(std::min(0.5 + c12, 1.0)).epsilon(1e-5));
    CHECK(res.region.max_r2() == Approx(0.5).epsilon(1e-5));
    CHECK(res.region.support(1, 1) == Approx(1.0).epsilon(1e-5));
  }
}

TEST_CASE("binary inputs with |U| = 1") {
  const auto ch = build_switch_bsc(0.01);
  auto cfg = small_cfg();
  cfg.u_card = 1;
  const double cap = 1.0 - oracle::hb(0.01);
  const auto res = trace_boundary(ch, {CoopMode::one_way, 0.0}, InputConstraint::none(), cfg);
  // Each encoder owns half the uses of a BSC(0.01).
  CHECK(res.region.max_r1() == Approx(0.5 * cap).epsilon(1e-6));
  CHECK(res.region.max_r2() == Approx(0.5 * cap).epsilon(1e-6));
  CHECK(res.region.max_equal_rate() == Approx(0.5 * cap).epsilon(1e-6));
  const auto eq = max_equal_rate(res);
  REQUIRE(eq.policy);
  CHECK_FALSE(eq.partner);
}

TEST_CASE("traced boundaries: witnesses, constraints, thread independence") {
  const auto ch = build_switch_bsc(0.01);
  const auto constr = InputConstraint::both(0.25, 0.25);
  const CoopConfig coop{CoopMode::one_way, 0.2};
  auto cfg = small_cfg();
  cfg.threads = 1;
  const auto one = trace_boundary(ch, coop, constr, cfg);
  cfg.threads = 3;
  const auto three = trace_boundary(ch, coop, constr, cfg);
  REQUIRE(one.region.frontier.size() == three.region.frontier.size());
  for (std::size_t k = 0; k < one.region.frontier.size(); ++k)
    CHECK(one.region.frontier[k] == three.region.frontier[k]);

  REQUIRE(one.witnesses.size() == one.region.frontier.size());
  for (const auto &w : one.witnesses) {
    CHECK_NOTHROW(validate_policy(ch, w.policy));
    const auto j = assemble_joint(ch, w.policy);
    CHECK(pentagon_one_way(j, 0.2).contains(w.vertex, 1e-9));
    CHECK(conditional_mutual_information(j, {axis::U}, {axis::S1}) <= 0.2 + 1e-9);
    CHECK(expected_weight(w.policy, ch, 1) <= 0.25 + 1e-9);
    CHECK(expected_weight(w.policy, ch, 2) <= 0.25 + 1e-9);
  }
  for (const auto &d : one.diagnostics)
    CHECK(d.restart_spread >= 0.0);

  const auto w = optimize_weighted(ch, coop, constr, 1.0, 1.0, cfg);
  CHECK(w.feasible);
  CHECK(w.value == Approx(w.pentagon.support(1.0, 1.0)).epsilon(1e-12));
  CHECK_THROWS_AS(optimize_weighted(ch, coop, constr, 0.0, 0.0, cfg), InputError);
}

TEST_CASE("closed form matches the general pentagon on its policy family") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 25; ++t) {
    const double pz = 0.05 * (t % 5), p1 = 0.05 + 0.2 * u(rng);
    const double a = u(rng), b = u(rng), x0 = u(rng), x1 = u(rng);
    const double c12 = 1.0;
    const auto cf = closed_form_pentagon(pz, p1, 1.0, c12, a, b, x0, x1);
    const auto ch = build_switch_bsc(pz);
    AuxPolicy pol;
    pol.mode = CoopMode::one_way;
    pol.u_given = {axis::U, CondPmf({2}, 2, {1 - a, a, 1 - b, b}), {axis::S1}};
    const double q1 = std::min(2 * p1, 0.5);
    pol.x1_given = {axis::X1, CondPmf({2, 2}, 2, {1 - q1, q1, 1 - q1, q1, 1, 0, 1, 0}),
                    {axis::S1, axis::U}};
    pol.x2_given = {axis::X2, CondPmf({2}, 2, {1 - x0, x0, 1 - x1, x1}), {axis::U}};
    const auto gen = pentagon_one_way(assemble_joint(ch, pol), c12);
    CHECK(expected_weight(pol, ch, 1) == Approx(q1 / 2));
    REQUIRE(cf.feasible);
    CHECK(cf.a1 == Approx(gen.a1).epsilon(1e-9));
    CHECK(cf.a2 == Approx(gen.a2).epsilon(1e-9));
    CHECK(cf.a12 == Approx(gen.a12).epsilon(1e-9));
  }
}

TEST_CASE("closed-form region at pz = 0") {
  // Unconstrained with full cooperation: R1 + R2 <= 1 and R1 <= 1.
  SearchConfig cfg = small_cfg();
  const auto r = closed_form_example_region(0.0, 0.5, 1.0, 1.0, cfg);
  CHECK(r.max_r1() == Approx(1.0).epsilon(1e-6));
  CHECK(r.max_r2() == Approx(0.5).epsilon(1e-6));
  CHECK(r.support(1, 1) == Approx(1.0).epsilon(1e-6));
  // Literal allocation spends less of encoder 1's budget.
  const auto lit = closed_form_example_region(0.0, 0.1, 0.1, 0.0, cfg, WeightAllocation::literal);
  const auto con = closed_form_example_region(0.0, 0.1, 0.1, 0.0, cfg);
  CHECK(lit.max_r1() == Approx(0.5 * oracle::hb(0.1)).epsilon(1e-6));
  CHECK(con.max_r1() == Approx(0.5 * oracle::hb(0.2)).epsilon(1e-6));
  CHECK_THROWS_AS(closed_form_example_region(1.5, 0.1, 0.1, 0.0, cfg), InputError);
}

TEST_CASE("weighted optimum examples with |U| = 1") {
  const double pz = 0.01;
  const auto ch = build_switch_bsc(pz);
  const auto constr = InputConstraint::both(0.25, 0.25);
  auto cfg = small_cfg();
  cfg.u_card = 1;
  cfg.restarts = 6;
  const double hz = oracle::hb(pz);
  auto conv = [pz](double p) { return p * (1 - pz) + (1 - p) * pz; };

  // mu = (0,1): best I(X2;Y|X1,S) under P(X2=1) <= 1/4.
  const auto r2 = optimize_weighted(ch, {CoopMode::one_way, 0.0}, constr, 0.0, 1.0, cfg);
  CHECK(r2.value == Approx(0.5 * (oracle::hb(conv(0.25)) - hz)).epsilon(1e-6));

  // mu = (1,1): brute force over P(X1=1|S=0), P(X1=1|S=1), P(X2=1) on a grid.
  double brute = 0.0;
  for (int i = 0; i <= 50; ++i)
    for (int k = 0; k <= 50; ++k)
      for (int d = 0; d <= 25; ++d) {
        const double a = i / 50.0, b = k / 50.0, x2 = d / 100.0;
        if (0.5 * (a + b) > 0.25 + 1e-12)
          continue;
        brute = std::max(brute, 0.5 * (oracle::hb(conv(a)) - hz) + 0.5 * (oracle::hb(conv(x2)) - hz));
      }
  const auto sum = optimize_weighted(ch, {CoopMode::one_way, 0.0}, constr, 1.0, 1.0, cfg);
  CHECK(sum.value >= brute - 1e-9);
  CHECK(sum.value <= brute + 1e-3);
}

TEST_CASE("useless channel has zero equal rate") {
  const auto res = max_equal_rate(build_switch_bsc(0.5), {CoopMode::one_way, 0.0},
                                  InputConstraint::none(), small_cfg());
  CHECK(res.rate == Approx(0.0).epsilon(1e-12));
}
