#include "macstate/rateregion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

namespace macstate {

namespace {

constexpr double kFeasibilitySlack = 1e-12;
constexpr double kStructureTol = 1e-9;
constexpr double kDedup = 1e-9;

const std::vector<std::string> kState{axis::S1, axis::S2};

std::vector<std::string> join(std::initializer_list<std::vector<std::string>> parts) {
  std::vector<std::string> out;
  for (const auto &p : parts)
    out.insert(out.end(), p.begin(), p.end());
  return out;
}

void require_axes(const JointPmf &j) {
  for (const auto &n : {axis::S1, axis::S2, axis::U, axis::V, axis::X1, axis::X2, axis::Y})
    if (!j.has_axis(n))
      throw InputError("joint is missing axis " + n);
}

void require_structure(const JointPmf &j, CoopMode mode) {
  require_axes(j);
  const std::string name(to_string(mode));
  if (mode != CoopMode::two_way && j.axis(axis::S2).size != 1)
    throw InputError(name + " pentagon needs a joint with a single state axis");
  if (is_one_way_family(mode)) {
    if (j.axis(axis::V).size != 1)
      throw InputError(name + " pentagon needs a joint without a V auxiliary");
    if (conditional_mutual_information(j, {axis::X2}, {axis::X1, axis::S1}, {axis::U}) >
        kStructureTol)
      throw InputError(name + " pentagon: joint violates X2 - U - (X1,S)");
  }
  if (mode == CoopMode::split &&
      conditional_mutual_information(j, {axis::V}, {axis::U, axis::S1}) > kStructureTol)
    throw InputError("split pentagon: V must be independent of (U,S)");
}

double cross(RatePoint o, RatePoint a, RatePoint b) {
  return (a.r1 - o.r1) * (b.r2 - o.r2) - (a.r2 - o.r2) * (b.r1 - o.r1);
}

double dist_segment(RatePoint p, RatePoint a, RatePoint b) {
  const double dx = b.r1 - a.r1, dy = b.r2 - a.r2;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0)
    t = std::clamp(((p.r1 - a.r1) * dx + (p.r2 - a.r2) * dy) / len2, 0.0, 1.0);
  const double ex = a.r1 + t * dx - p.r1, ey = a.r2 + t * dy - p.r2;
  return std::sqrt(ex * ex + ey * ey);
}

} // namespace

std::vector<RatePoint> Pentagon::vertices() const {
  if (!feasible)
    return {};
  const double x1 = std::min(a1, a12);
  const double y2 = std::min(a2, a12);
  return {{0.0, 0.0},
          {x1, 0.0},
          {x1, std::max(0.0, std::min(a2, a12 - a1))},
          {std::max(0.0, std::min(a1, a12 - a2)), y2},
          {0.0, y2}};
}

double Pentagon::support(double mu1, double mu2) const {
  double best = 0.0;
  for (const auto &v : vertices())
    best = std::max(best, mu1 * v.r1 + mu2 * v.r2);
  return best;
}

bool Pentagon::contains(RatePoint p, double tol) const {
  if (!feasible)
    return false;
  return p.r1 >= -tol && p.r2 >= -tol && p.r1 <= a1 + tol && p.r2 <= a2 + tol &&
         p.r1 + p.r2 <= a12 + tol;
}

RegionTerms region_terms(const JointPmf &j, CoopMode mode) {
  require_axes(j);
  using namespace axis;
  const std::vector<std::string> aux{U, V};
  RegionTerms t;
  if (mode == CoopMode::two_way) {
    t.coop_u = conditional_mutual_information(j, {U}, {S1}, {S2});
    t.coop_v = conditional_mutual_information(j, {V}, {S2}, {S1, U});
  } else {
    t.coop_u = conditional_mutual_information(j, {U}, kState);
  }
  t.r1 = conditional_mutual_information(j, {X1}, {Y}, join({{X2}, kState, aux}));
  t.r2 = conditional_mutual_information(j, {X2}, {Y}, join({{X1}, kState, aux}));
  t.sum_aux = conditional_mutual_information(j, {X1, X2}, {Y}, join({kState, aux}));
  t.sum_outer = mode == CoopMode::split
                    ? conditional_mutual_information(j, {X1, X2}, {Y}, join({kState, {U}}))
                    : conditional_mutual_information(j, {X1, X2}, {Y}, kState);
  return t;
}

Pentagon pentagon_from_terms(const RegionTerms &t, const CoopConfig &coop) {
  Pentagon p;
  switch (coop.mode) {
  case CoopMode::one_way:
    p.feasible = t.coop_u <= coop.c12 + kFeasibilitySlack;
    p.a1 = t.r1 + coop.c12 - t.coop_u;
    p.a2 = t.r2;
    p.a12 = std::min(t.sum_aux + coop.c12 - t.coop_u, t.sum_outer);
    break;
  case CoopMode::two_way:
    p.feasible = t.coop_u <= coop.c12 + kFeasibilitySlack &&
                 t.coop_v <= coop.c21 + kFeasibilitySlack;
    p.a1 = t.r1 + coop.c12 - t.coop_u;
    p.a2 = t.r2 + coop.c21 - t.coop_v;
    p.a12 = std::min(t.sum_aux + coop.c12 + coop.c21 - t.coop_u - t.coop_v,
                     t.sum_outer);
    break;
  case CoopMode::split:
    p.feasible = t.coop_u <= coop.c12s + kFeasibilitySlack;
    p.a1 = t.r1 + coop.c12m;
    p.a2 = t.r2;
    p.a12 = std::min(t.sum_aux + coop.c12m, t.sum_outer);
    break;
  case CoopMode::state_only:
    p.feasible = t.coop_u <= coop.c12 + kFeasibilitySlack;
    p.a1 = t.r1;
    p.a2 = t.r2;
    p.a12 = t.sum_aux;
    break;
  case CoopMode::message_only:
    p.feasible = true;
    p.a1 = t.r1 + coop.c12;
    p.a2 = t.r2;
    p.a12 = std::min(t.sum_aux + coop.c12, t.sum_outer);
    break;
  }
  if (!p.feasible)
    return Pentagon::infeasible();
  p.a1 = std::max(0.0, p.a1);
  p.a2 = std::max(0.0, p.a2);
  p.a12 = std::max(0.0, p.a12);
  return p;
}

Pentagon pentagon_one_way(const JointPmf &j, double c12) {
  require_structure(j, CoopMode::one_way);
  return pentagon_from_terms(region_terms(j, CoopMode::one_way),
                             {CoopMode::one_way, c12});
}

Pentagon pentagon_two_way(const JointPmf &j, double c12, double c21) {
  require_structure(j, CoopMode::two_way);
  CoopConfig c{CoopMode::two_way, c12};
  c.c21 = c21;
  return pentagon_from_terms(region_terms(j, CoopMode::two_way), c);
}

Pentagon pentagon_split(const JointPmf &j, double c12m, double c12s) {
  require_structure(j, CoopMode::split);
  CoopConfig c{CoopMode::split};
  c.c12m = c12m;
  c.c12s = c12s;
  return pentagon_from_terms(region_terms(j, CoopMode::split), c);
}

Pentagon pentagon_state_only(const JointPmf &j, double c12) {
  require_structure(j, CoopMode::state_only);
  return pentagon_from_terms(region_terms(j, CoopMode::state_only),
                             {CoopMode::state_only, c12});
}

Pentagon pentagon_message_only(const JointPmf &j, double c12) {
  require_structure(j, CoopMode::message_only);
  const auto t = region_terms(j, CoopMode::message_only);
  if (t.coop_u >= kStructureTol)
    throw InputError("message_only pentagon needs I(U;S) = 0");
  return pentagon_from_terms(t, {CoopMode::message_only, c12});
}

Pentagon pentagon_for(const JointPmf &j, const CoopConfig &coop) {
  switch (coop.mode) {
  case CoopMode::one_way: return pentagon_one_way(j, coop.c12);
  case CoopMode::two_way: return pentagon_two_way(j, coop.c12, coop.c21);
  case CoopMode::split: return pentagon_split(j, coop.c12m, coop.c12s);
  case CoopMode::state_only: return pentagon_state_only(j, coop.c12);
  case CoopMode::message_only: return pentagon_message_only(j, coop.c12);
  }
  throw InputError("unknown mode");
}

double RateRegion::max_r1() const {
  return frontier.empty() ? 0.0 : frontier.back().r1;
}

double RateRegion::max_r2() const {
  return frontier.empty() ? 0.0 : frontier.front().r2;
}

double RateRegion::support(double mu1, double mu2) const {
  double best = 0.0;
  for (const auto &p : frontier)
    best = std::max(best, mu1 * p.r1 + mu2 * p.r2);
  return best;
}

double RateRegion::max_equal_rate() const {
  for (std::size_t k = 0; k + 1 < frontier.size(); ++k) {
    const auto p = frontier[k], q = frontier[k + 1];
    const double fp = p.r2 - p.r1, fq = q.r2 - q.r1;
    if (fp >= 0.0 && fq <= 0.0) {
      const double t = fp == fq ? 0.0 : fp / (fp - fq);
      return p.r1 + t * (q.r1 - p.r1);
    }
  }
  return 0.0;
}

std::vector<RatePoint> RateRegion::polygon() const {
  std::vector<RatePoint> poly{{0.0, 0.0}};
  for (auto it = frontier.rbegin(); it != frontier.rend(); ++it)
    if (!(*it == poly.back()))
      poly.push_back(*it);
  return poly;
}

HullResult hull_union_traced(std::span<const Pentagon> pentagons) {
  struct Tagged {
    RatePoint p;
    std::size_t src;
  };
  std::vector<Tagged> pts;
  for (std::size_t i = 0; i < pentagons.size(); ++i)
    for (const auto &v : pentagons[i].vertices())
      pts.push_back({v, i});
  HullResult out;
  if (pts.empty())
    return out;

  // Ties on r1 put the higher point first so the chain starts at (0, max R2)
  // and ends with the drop to (max R1, 0).
  std::stable_sort(pts.begin(), pts.end(), [](const Tagged &a, const Tagged &b) {
    if (a.p.r1 != b.p.r1)
      return a.p.r1 < b.p.r1;
    return a.p.r2 > b.p.r2;
  });
  std::vector<Tagged> hull;
  for (const auto &t : pts) {
    if (!hull.empty() && std::abs(hull.back().p.r1 - t.p.r1) <= kDedup &&
        std::abs(hull.back().p.r2 - t.p.r2) <= kDedup)
      continue;
    while (hull.size() >= 2 &&
           cross(hull[hull.size() - 2].p, hull.back().p, t.p) >= -1e-15)
      hull.pop_back();
    hull.push_back(t);
  }
  for (const auto &t : hull) {
    out.region.frontier.push_back(t.p);
    out.source.push_back(t.src);
  }
  return out;
}

RateRegion hull_union(std::span<const Pentagon> pentagons) {
  return hull_union_traced(pentagons).region;
}

double distance_to_region(const RateRegion &r, RatePoint p) {
  if (r.empty())
    return std::numeric_limits<double>::infinity();
  const auto poly = r.polygon();
  if (poly.size() >= 3) {
    bool inside = true;
    for (std::size_t k = 0; k < poly.size() && inside; ++k)
      inside = cross(poly[k], poly[(k + 1) % poly.size()], p) >= 0.0;
    if (inside)
      return 0.0;
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < poly.size(); ++k)
    best = std::min(best, dist_segment(p, poly[k], poly[(k + 1) % poly.size()]));
  return best;
}

bool region_contains(const RateRegion &r, RatePoint p, double tol) {
  return distance_to_region(r, p) <= tol;
}

double directed_gap(const RateRegion &a, const RateRegion &b) {
  // Distance to a convex set is convex, so its maximum over a polygon sits
  // on a vertex.
  double gap = 0.0;
  for (const auto &v : a.frontier)
    gap = std::max(gap, distance_to_region(b, v));
  return gap;
}

double hausdorff_distance(const RateRegion &a, const RateRegion &b) {
  return std::max(directed_gap(a, b), directed_gap(b, a));
}

std::string_view to_string(Comparison c) {
  switch (c) {
  case Comparison::equal: return "equal";
  case Comparison::a_subset_b: return "a_subset_b";
  case Comparison::b_subset_a: return "b_subset_a";
  case Comparison::crossing: return "crossing";
  }
  return "?";
}

CompareResult region_compare(const RateRegion &a, const RateRegion &b, double tol) {
  if (a.empty() || b.empty())
    throw InputError("region_compare needs two nonempty regions");
  CompareResult res;
  res.a_outside_b = directed_gap(a, b);
  res.b_outside_a = directed_gap(b, a);
  const bool a_in_b = res.a_outside_b <= tol;
  const bool b_in_a = res.b_outside_a <= tol;
  if (a_in_b && b_in_a)
    res.verdict = Comparison::equal;
  else if (a_in_b)
    res.verdict = Comparison::a_subset_b;
  else if (b_in_a)
    res.verdict = Comparison::b_subset_a;
  else
    res.verdict = Comparison::crossing;
  return res;
}

void write_region_csv(std::ostream &os, const RateRegion &r,
                      const std::vector<std::string> &header) {
  for (const auto &h : header)
    os << "# " << h << '\n';
  os << "r1,r2\n";
  char buf[64];
  for (const auto &p : r.frontier) {
    // +0.0 folds negative zero
    std::snprintf(buf, sizeof buf, "%.6f,%.6f\n", p.r1 + 0.0, p.r2 + 0.0);
    os << buf;
  }
}

RateRegion read_region_csv(std::istream &is) {
  RateRegion r;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#' || line == "r1,r2")
      continue;
    std::istringstream row(line);
    RatePoint p;
    char comma = 0;
    if (!(row >> p.r1 >> comma >> p.r2) || comma != ',')
      throw InputError("malformed region row: " + line);
    r.frontier.push_back(p);
  }
  return r;
}

} // namespace macstate
