#include "macstate/channel_io.hpp"
#include "macstate/rateregion.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace macstate;
using doctest::Approx;

namespace {

std::vector<double> vec(std::span<const double> s) { return {s.begin(), s.end()}; }

struct RandomOneWay {
  MacChannel ch;
  AuxPolicy pol;
  oracle::Table table;
};

// Random channel with |S| = 2, binary inputs, |Y| = 3 and a random one-way
// policy with |U| = nu.
RandomOneWay random_one_way(std::mt19937_64 &rng, std::size_t nu) {
  RandomOneWay r;
  const auto ps = oracle::random_rows(rng, 1, 2);
  const auto ky = oracle::random_rows(rng, 8, 3, 0.3);
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < 8; ++i)
    rows.emplace_back(ky.begin() + 3 * i, ky.begin() + 3 * i + 3);
  r.ch = make_channel(2, 1, 2, 2, 3, ps, rows);
  r.pol.mode = CoopMode::one_way;
  r.pol.u_given = {axis::U, CondPmf({2}, nu, oracle::random_rows(rng, 2, nu, 0.2)), {axis::S1}};
  r.pol.x1_given = {axis::X1, CondPmf({2, nu}, 2, oracle::random_rows(rng, 2 * nu, 2, 0.2)),
                    {axis::S1, axis::U}};
  r.pol.x2_given = {axis::X2, CondPmf({nu}, 2, oracle::random_rows(rng, nu, 2, 0.2)), {axis::U}};
  r.table = oracle::one_way_joint(ps, nu, 2, 2, 3, vec(r.pol.u_given.table.table()),
                                  vec(r.pol.x1_given.table.table()),
                                  vec(r.pol.x2_given.table.table()), ky);
  return r;
}

} // namespace

TEST_CASE("pentagon geometry") {
  const Pentagon p{0.6, 0.5, 0.8, true};
  const auto v = p.vertices();
  REQUIRE(v.size() == 5);
  CHECK(v[1] == RatePoint{0.6, 0.0});
  CHECK(v[2].r2 == Approx(0.2));
  CHECK(v[3].r1 == Approx(0.3));
  CHECK(v[4] == RatePoint{0.0, 0.5});
  CHECK(p.support(1, 1) == Approx(0.8));
  CHECK(p.support(1, 0) == Approx(0.6));
  CHECK(p.contains({0.4, 0.4}, 0));
  CHECK_FALSE(p.contains({0.45, 0.4}, 1e-6));
  CHECK_FALSE(Pentagon::infeasible().contains({0, 0}, 1));
  CHECK(Pentagon::infeasible().support(1, 1) == 0.0);
  // Inactive sum constraint: a rectangle.
  const Pentagon rect{0.3, 0.2, 1.0, true};
  CHECK(rect.vertices()[2] == RatePoint{0.3, 0.2});
  CHECK(rect.vertices()[3] == RatePoint{0.3, 0.2});
}

TEST_CASE("one-way pentagon agrees with the direct-sum oracle") {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 30; ++t) {
    const auto r = random_one_way(rng, 1 + t % 3);
    const double c12 = 0.1 * (t % 7);
    const auto got = pentagon_one_way(assemble_joint(r.ch, r.pol), c12);
    const auto want = oracle::one_way_pentagon(r.table, c12);
    REQUIRE(got.feasible == want.feasible);
    if (!want.feasible)
      continue;
    CHECK(got.a1 == Approx(want.a1).epsilon(1e-10));
    CHECK(got.a2 == Approx(want.a2).epsilon(1e-10));
    CHECK(got.a12 == Approx(want.a12).epsilon(1e-10));
  }
}

TEST_CASE("setting formulas on the switch channel") {
  const auto ch = build_switch_bsc(0.0);
  const auto uniform = independent_policy(ch, CoopMode::one_way, Pmf::uniform(2), Pmf::uniform(2));
  const auto j = assemble_joint(ch, uniform);
  SUBCASE("no auxiliary: noiseless time sharing") {
    // Each input sees Y half the time: a1 = a2 = 1/2, a12 = 1.
    const auto p = pentagon_one_way(j, 0.0);
    CHECK(p.a1 == Approx(0.5));
    CHECK(p.a2 == Approx(0.5));
    CHECK(p.a12 == Approx(1.0));
    const auto m = pentagon_message_only(j, 0.3);
    CHECK(m.a1 == Approx(0.8));
    CHECK(m.a12 == Approx(1.0));
    CHECK(pentagon_state_only(j, 0.3).a1 == Approx(0.5));
  }
  SUBCASE("state copy needs I(U;S) = 1 bit") {
    const auto sc = assemble_joint(ch, state_copy_policy(ch, Pmf::uniform(2), Pmf::uniform(2)));
    CHECK_FALSE(pentagon_one_way(sc, 0.5).feasible);
    CHECK_FALSE(pentagon_state_only(sc, 0.99).feasible);
    const auto full = pentagon_one_way(sc, 1.0);
    CHECK(full.feasible);
    CHECK(full.a1 == Approx(0.5));
    CHECK_THROWS_AS(pentagon_message_only(sc, 1.0), InputError);
  }
  SUBCASE("mode guards") {
    // A one-way joint is a split joint with |V| = 1.
    CHECK(pentagon_split(j, 0.1, 0.0).a1 == Approx(0.6));
    const auto two = make_channel(2, 2, 2, 2, 2, {0.25, 0.25, 0.25, 0.25},
                                  std::vector<std::vector<double>>(16, {0.5, 0.5}));
    AuxPolicy tw;
    tw.mode = CoopMode::two_way;
    tw.u_given = {axis::U, CondPmf({2}, 1, {1, 1}), {axis::S1}};
    tw.v_given = Factor{axis::V, CondPmf({2, 1}, 1, {1, 1}), {axis::S2, axis::U}};
    tw.x1_given = {axis::X1, CondPmf({2, 1, 1}, 2, {0.5, 0.5, 0.5, 0.5}),
                   {axis::S1, axis::U, axis::V}};
    tw.x2_given = {axis::X2, CondPmf({2, 1, 1}, 2, {0.5, 0.5, 0.5, 0.5}),
                   {axis::S2, axis::U, axis::V}};
    const auto jt = assemble_joint(two, tw);
    CHECK_THROWS_AS(pentagon_one_way(jt, 0.1), InputError);
    CHECK(pentagon_two_way(jt, 0.1, 0.1).a12 == 0.0);
    CHECK_THROWS_AS(pentagon_for(JointPmf({{"Y", 2}}, {0.5, 0.5}), CoopConfig{}), InputError);
  }
}

TEST_CASE("pentagon_from_terms per mode") {
  RegionTerms t{0.3, 0.1, 0.4, 0.35, 0.6, 0.7};
  auto p = pentagon_from_terms(t, {CoopMode::one_way, 0.5});
  CHECK(p.a1 == Approx(0.6));
  CHECK(p.a2 == Approx(0.35));
  CHECK(p.a12 == Approx(0.7));
  CHECK_FALSE(pentagon_from_terms(t, {CoopMode::one_way, 0.2}).feasible);
  CoopConfig two{CoopMode::two_way, 0.3};
  two.c21 = 0.2;
  p = pentagon_from_terms(t, two);
  CHECK(p.a1 == Approx(0.4));
  CHECK(p.a2 == Approx(0.45));
  CHECK(p.a12 == Approx(0.7));
  CoopConfig split{CoopMode::split};
  split.c12m = 0.05;
  split.c12s = 0.3;
  p = pentagon_from_terms(t, split);
  CHECK(p.a1 == Approx(0.45));
  CHECK(p.a12 == Approx(0.65));
  p = pentagon_from_terms(t, {CoopMode::state_only, 0.3});
  CHECK(p.a12 == Approx(0.6));
  p = pentagon_from_terms(t, {CoopMode::message_only, 0.0});
  CHECK(p.feasible);
  CHECK(p.a1 == Approx(0.4));
  // Negative bounds clamp at zero.
  p = pentagon_from_terms({0.5, 0, 0, 0, 0, 0}, {CoopMode::one_way, 0.5});
  CHECK(p.a1 == 0.0);
}

TEST_CASE("hull of pentagon unions") {
  SUBCASE("two pentagons") {
    const std::vector<Pentagon> ps{{0.9, 0.2, 1.0, true}, {0.3, 0.7, 0.9, true},
                                   Pentagon::infeasible()};
    const auto h = hull_union_traced(ps);
    const auto &f = h.region.frontier;
    REQUIRE(f.size() >= 3);
    CHECK(f.front() == RatePoint{0.0, 0.7});
    CHECK(f.back() == RatePoint{0.9, 0.0});
    CHECK(h.region.max_r1() == Approx(0.9));
    CHECK(h.region.max_r2() == Approx(0.7));
    for (std::size_t k = 0; k < f.size(); ++k) {
      if (k > 0)
        CHECK(f[k].r1 >= f[k - 1].r1);
      CHECK(ps[h.source[k]].contains(f[k], 1e-12));
    }
    // Concave: slopes strictly decrease.
    for (std::size_t k = 2; k < f.size(); ++k) {
      const double s0 = (f[k - 1].r2 - f[k - 2].r2) / (f[k - 1].r1 - f[k - 2].r1);
      const double s1 = (f[k].r2 - f[k - 1].r2) / (f[k].r1 - f[k - 1].r1);
      CHECK(s1 < s0);
    }
  }
  SUBCASE("degenerate inputs") {
    CHECK(hull_union(std::vector<Pentagon>{}).empty());
    CHECK(hull_union(std::vector<Pentagon>{Pentagon::infeasible()}).empty());
    const auto origin = hull_union(std::vector<Pentagon>{{0, 0, 0, true}});
    REQUIRE(origin.frontier.size() == 1);
    CHECK(origin.max_equal_rate() == 0.0);
  }
  SUBCASE("grid containment against the support-function oracle") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 5; ++t) {
      std::vector<Pentagon> ps;
      for (int k = 0; k < 6; ++k) {
        const double a1 = u(rng), a2 = u(rng);
        ps.push_back({a1, a2, std::max(a1, a2) + u(rng) * std::min(a1, a2), true});
      }
      const auto region = hull_union(ps);
      for (int i = 0; i <= 40; ++i)
        for (int k = 0; k <= 40; ++k) {
          const RatePoint q{i / 40.0, k / 40.0};
          const bool in = region_contains(region, q, 0.0);
          // The oracle's direction fan over-approximates by ~1e-7.
          if (!in && distance_to_region(region, q) < 1e-5)
            continue;
          CHECK(oracle::in_hull(ps, q, 1e-9) == in);
        }
    }
  }
}

TEST_CASE("equal rate, distances and comparison") {
  const std::vector<Pentagon> a{{0.8, 0.4, 1.0, true}};
  const std::vector<Pentagon> b{{0.4, 0.8, 1.0, true}};
  const auto ra = hull_union(a), rb = hull_union(b);
  CHECK(ra.max_equal_rate() == Approx(0.4));
  CHECK(hull_union(std::vector<Pentagon>{{0.8, 0.8, 1.0, true}}).max_equal_rate() == Approx(0.5));
  CHECK(distance_to_region(ra, {0.5, 0.2}) == 0.0);
  CHECK(distance_to_region(ra, {0.9, 0.0}) == Approx(0.1));
  CHECK(distance_to_region(ra, {0.6, 0.6}) == Approx(0.2));
  // b's corner (0.2, 0.8) sits 0.4 above a.
  CHECK(directed_gap(rb, ra) == Approx(0.4));
  CHECK(hausdorff_distance(ra, rb) == Approx(0.4));
  CHECK(region_compare(ra, rb, 1e-6).verdict == Comparison::crossing);
  const auto small = hull_union(std::vector<Pentagon>{{0.3, 0.3, 0.5, true}});
  CHECK(region_compare(small, ra, 1e-6).verdict == Comparison::a_subset_b);
  CHECK(region_compare(ra, small, 1e-6).verdict == Comparison::b_subset_a);
  CHECK(region_compare(ra, ra, 0.0).verdict == Comparison::equal);
  CHECK(region_compare(ra, hull_union(std::vector<Pentagon>{{0.8001, 0.4, 1.0, true}}), 1e-3)
            .verdict == Comparison::equal);
  CHECK_THROWS_AS(region_compare(ra, RateRegion{}, 1e-3), InputError);
}

TEST_CASE("region CSV round trip") {
  const auto r = hull_union(std::vector<Pentagon>{{0.9, 0.2, 1.0, true}, {0.3, 0.7, 0.9, true}});
  std::ostringstream os;
  write_region_csv(os, r, {"macstate test", "mode=one_way, c12=0"});
  const std::string text = os.str();
  CHECK(text.rfind("# macstate test\n# mode=one_way, c12=0\nr1,r2\n", 0) == 0);
  std::istringstream is(text);
  const auto back = read_region_csv(is);
  REQUIRE(back.frontier.size() == r.frontier.size());
  for (std::size_t k = 0; k < r.frontier.size(); ++k) {
    CHECK(back.frontier[k].r1 == Approx(r.frontier[k].r1).epsilon(1e-6));
    CHECK(back.frontier[k].r2 == Approx(r.frontier[k].r2).epsilon(1e-6));
  }
  std::istringstream bad("r1,r2\n0.1;0.2\n");
  CHECK_THROWS_AS(read_region_csv(bad), InputError);
}

TEST_CASE("per-policy reduction identities") {
  // Two-way with |S2| = |V| = 1 and c21 = 0 gives the one-way pentagon.
  std::mt19937_64 rng(8);
  for (int t = 0; t < 10; ++t) {
    const auto r = random_one_way(rng, 2);
    AuxPolicy tw = r.pol;
    tw.mode = CoopMode::two_way;
    tw.v_given = Factor{axis::V, CondPmf({1, 2}, 1, {1, 1}), {axis::S2, axis::U}};
    tw.x1_given = {axis::X1, CondPmf({2, 2, 1}, 2, vec(r.pol.x1_given.table.table())),
                   {axis::S1, axis::U, axis::V}};
    tw.x2_given = {axis::X2, CondPmf({1, 2, 1}, 2, vec(r.pol.x2_given.table.table())),
                   {axis::S2, axis::U, axis::V}};
    CoopConfig two{CoopMode::two_way, 0.4};
    const auto a = pentagon_for(assemble_joint(r.ch, tw), two);
    const auto b = pentagon_one_way(assemble_joint(r.ch, r.pol), 0.4);
    REQUIRE(a.feasible == b.feasible);
    CHECK(std::abs(a.a1 - b.a1) < 1e-10);
    CHECK(std::abs(a.a2 - b.a2) < 1e-10);
    CHECK(std::abs(a.a12 - b.a12) < 1e-10);
  }
  // Encoder 1 ignored and R1 = 0: the one-way bound on R2 is the
  // point-to-point I(X2;Y|S) with X2 ~ P(x2).
  const auto ch = build_switch_bsc(0.1);
  std::vector<std::vector<double>> rows;
  for (std::size_t s = 0; s < 2; ++s)
    for (std::size_t a = 0; a < 2; ++a)
      for (std::size_t b = 0; b < 2; ++b) {
        const auto row = ch.kernel.row(s * 4 + 0 * 2 + b);
        rows.push_back({row[0], row[1]});
      }
  const auto deaf = make_channel(2, 1, 2, 2, 2, {0.5, 0.5}, rows);
  const auto pol = independent_policy(deaf, CoopMode::one_way, Pmf::uniform(2), Pmf({0.7, 0.3}));
  const auto p = pentagon_one_way(assemble_joint(deaf, pol), 0.0);
  const double conv = 0.3 * 0.9 + 0.7 * 0.1;
  CHECK(p.a1 == Approx(0.0).epsilon(1e-12));
  CHECK(p.a2 == Approx(0.5 * (oracle::hb(conv) - oracle::hb(0.1))).epsilon(1e-10));
}
