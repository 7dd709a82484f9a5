// Switch channel closed form with binary U.
//
// Parameters: P(U=1|S=0), P(U=1|S=1), P(X2=1|U=0), P(X2=1|U=1). Encoder 1
// sends only in S=0 slots. The search runs on a box: m = P(U=1), a signed
// fraction of the largest state-dependence the budget allows, the spent X2
// weight and how it splits between the two U letters. Both constraints then
// become faces of the box.

#include "macstate/optimizer.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace macstate {

namespace {

double hb(double p) { return binary_entropy(std::clamp(p, 0.0, 1.0)); }

double mutual_us(double m, double d) {
  return hb(m) - 0.5 * (hb(m + d) + hb(m - d));
}

// Largest |P(U=1|S=0) - m| keeping I(U;S) <= c12.
double max_shift(double m, double c12) {
  const double hi = std::min(m, 1.0 - m);
  if (mutual_us(m, hi) <= c12)
    return hi;
  double lo = 0.0, up = hi;
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + up);
    (mutual_us(m, mid) <= c12 ? lo : up) = mid;
  }
  return lo;
}

struct Box {
  std::array<double, 4> z{}; // m, tau in [0,1] -> [-1,1], omega, sigma
};

struct Problem {
  double pz, p1, p2, c12;
  WeightAllocation alloc;

  Pentagon eval(const Box &b) const {
    const double m = b.z[0];
    const double d = (2.0 * b.z[1] - 1.0) * max_shift(m, c12);
    const double u0 = std::clamp(m + d, 0.0, 1.0), u1 = std::clamp(m - d, 0.0, 1.0);
    const double w = b.z[2] * std::min(p2, 1.0);
    double x0 = w, x1 = w;
    if (m > 0.0 && m < 1.0) {
      const double lo = std::max(0.0, (w - (1.0 - m)) / m), hi = std::min(1.0, w / m);
      x1 = lo + b.z[3] * (hi - lo);
      x0 = std::clamp((w - m * x1) / (1.0 - m), 0.0, 1.0);
    }
    return closed_form_pentagon(pz, p1, p2, c12, u0, u1, x0, x1, alloc);
  }
};

double value(const Pentagon &p, double mu1, double mu2) {
  return p.feasible ? p.support(mu1, mu2) : -1.0;
}

} // namespace

Pentagon closed_form_pentagon(double pz, double p1, double p2, double c12,
                              double u1_given_s0, double u1_given_s1,
                              double x2_given_u0, double x2_given_u1,
                              WeightAllocation alloc) {
  const double a = u1_given_s0, b = u1_given_s1;
  const double pu1 = 0.5 * (a + b);
  const double ius = hb(pu1) - 0.5 * (hb(a) + hb(b));
  const double w2 = (1.0 - pu1) * x2_given_u0 + pu1 * x2_given_u1;
  Pentagon p;
  p.feasible = ius <= c12 + 1e-12 && w2 <= p2 + 1e-12;
  const double q1 =
      std::min(alloc == WeightAllocation::concentrated ? 2.0 * p1 : p1, 0.5);
  const double hz = hb(pz);
  const double t1 = 0.5 * (hb(bernoulli_convolve(q1, pz)) - hz);
  const double t2 = 0.5 * ((1.0 - b) * hb(bernoulli_convolve(x2_given_u0, pz)) +
                           b * hb(bernoulli_convolve(x2_given_u1, pz)) - hz);
  const double x2_s1 = (1.0 - b) * x2_given_u0 + b * x2_given_u1;
  const double outer = t1 + 0.5 * (hb(bernoulli_convolve(x2_s1, pz)) - hz);
  p.a1 = std::max(0.0, t1 + c12 - ius);
  p.a2 = std::max(0.0, t2);
  p.a12 = std::max(0.0, std::min(t1 + t2 + c12 - ius, outer));
  return p;
}

RateRegion closed_form_example_region(double pz, double p1, double p2, double c12,
                                      const SearchConfig &cfg, WeightAllocation alloc) {
  if (!(pz >= 0.0 && pz <= 1.0) || !(p1 >= 0.0) || !(p2 >= 0.0) || !(c12 >= 0.0))
    throw InputError("closed form: pz in [0,1], nonnegative p1, p2, c12");
  cfg.validate();
  const Problem prob{pz, p1, p2, c12, alloc};
  const auto angles = sweep_angles(cfg.weight_count);

  constexpr int G = 17;
  std::vector<std::pair<Box, Pentagon>> grid;
  grid.reserve(G * G * G * G);
  Box b;
  for (int i = 0; i < G; ++i)
    for (int j = 0; j < G; ++j)
      for (int k = 0; k < G; ++k)
        for (int l = 0; l < G; ++l) {
          b.z = {i / (G - 1.0), j / (G - 1.0), k / (G - 1.0), l / (G - 1.0)};
          grid.emplace_back(b, prob.eval(b));
        }

  std::vector<Pentagon> pents;
  for (double th : angles) {
    const double mu1 = std::cos(th), mu2 = std::sin(th);
    std::size_t best = 0;
    for (std::size_t g = 1; g < grid.size(); ++g)
      if (value(grid[g].second, mu1, mu2) > value(grid[best].second, mu1, mu2))
        best = g;
    // Compass search on the box.
    Box cur = grid[best].first;
    double fcur = value(grid[best].second, mu1, mu2);
    Pentagon pcur = grid[best].second;
    for (double step = 0.5 / (G - 1.0); step > 1e-10;) {
      bool moved = false;
      for (int c = 0; c < 4; ++c)
        for (double sgn : {1.0, -1.0}) {
          Box nb = cur;
          nb.z[c] = std::clamp(nb.z[c] + sgn * step, 0.0, 1.0);
          const auto p = prob.eval(nb);
          const double f = value(p, mu1, mu2);
          if (f > fcur + 1e-15) {
            cur = nb, fcur = f, pcur = p;
            moved = true;
          }
        }
      if (!moved)
        step *= 0.5;
    }
    if (pcur.feasible)
      pents.push_back(pcur);
  }
  return hull_union(pents);
}

} // namespace macstate
