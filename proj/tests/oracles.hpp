#pragma once

// Independent reference computations for the tests. Nothing here calls the
// library's marginalization or information code: joints are plain arrays and
// every measure is a direct sum.

#include "macstate/rateregion.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

namespace oracle {

/// Dense joint over axes of the given sizes, last axis fastest.
struct Table {
  std::vector<std::size_t> sizes;
  std::vector<double> p;

  std::vector<std::size_t> coords(std::size_t cell) const {
    std::vector<std::size_t> c(sizes.size());
    for (std::size_t a = sizes.size(); a-- > 0;) {
      c[a] = cell % sizes[a];
      cell /= sizes[a];
    }
    return c;
  }
};

inline std::vector<std::size_t> key(const std::vector<std::size_t> &c, unsigned mask) {
  std::vector<std::size_t> k;
  for (std::size_t a = 0; a < c.size(); ++a)
    if (mask & (1u << a))
      k.push_back(c[a]);
  return k;
}

/// I(A;B|C) = sum p(a,b,c) log2 [p(a,b,c) p(c) / (p(a,c) p(b,c))], axes given
/// as bit masks.
inline double cmi(const Table &t, unsigned a, unsigned b, unsigned c) {
  std::map<std::vector<std::size_t>, double> pabc, pac, pbc, pc;
  for (std::size_t i = 0; i < t.p.size(); ++i) {
    if (t.p[i] == 0.0)
      continue;
    const auto x = t.coords(i);
    pabc[key(x, a | b | c)] += t.p[i];
    pac[key(x, a | c)] += t.p[i];
    pbc[key(x, b | c)] += t.p[i];
    pc[key(x, c)] += t.p[i];
  }
  double s = 0.0;
  for (std::size_t i = 0; i < t.p.size(); ++i) {
    if (t.p[i] == 0.0)
      continue;
    const auto x = t.coords(i);
    const double v = pabc[key(x, a | b | c)];
    s += t.p[i] * std::log2(v * pc[key(x, c)] / (pac[key(x, a | c)] * pbc[key(x, b | c)]));
  }
  return s;
}

/// Hb with 0 log 0 = 0, written out.
inline double hb(double p) {
  double h = 0.0;
  if (p > 0.0)
    h -= p * std::log2(p);
  if (p < 1.0)
    h -= (1.0 - p) * std::log2(1.0 - p);
  return h;
}

/// Axis bits for (S, U, X1, X2, Y) tables.
enum : unsigned { S = 1, U = 2, X1 = 4, X2 = 8, Y = 16 };

/// One-way joint P(s)P(u|s)P(x1|s,u)P(x2|u)P(y|s,x1,x2) over (S,U,X1,X2,Y).
/// Tables are row-major: pu[s][u], px1[(s,u)][x1], px2[u][x2],
/// ky[(s,x1,x2)][y].
inline Table one_way_joint(const std::vector<double> &ps, std::size_t nu, std::size_t nx1,
                           std::size_t nx2, std::size_t ny, const std::vector<double> &pu,
                           const std::vector<double> &px1, const std::vector<double> &px2,
                           const std::vector<double> &ky) {
  const std::size_t ns = ps.size();
  Table t{{ns, nu, nx1, nx2, ny}, {}};
  for (std::size_t s = 0; s < ns; ++s)
    for (std::size_t u = 0; u < nu; ++u)
      for (std::size_t a = 0; a < nx1; ++a)
        for (std::size_t b = 0; b < nx2; ++b)
          for (std::size_t y = 0; y < ny; ++y)
            t.p.push_back(ps[s] * pu[s * nu + u] * px1[(s * nu + u) * nx1 + a] *
                          px2[u * nx2 + b] * ky[((s * nx1 + a) * nx2 + b) * ny + y]);
  return t;
}

/// One-way pentagon straight from the rate formulas on an oracle table.
inline macstate::Pentagon one_way_pentagon(const Table &t, double c12) {
  macstate::Pentagon p;
  const double ius = cmi(t, U, S, 0);
  p.feasible = ius <= c12 + 1e-12;
  p.a1 = std::max(0.0, cmi(t, X1, Y, X2 | S | U) + c12 - ius);
  p.a2 = std::max(0.0, cmi(t, X2, Y, X1 | S | U));
  p.a12 = std::max(0.0, std::min(cmi(t, X1 | X2, Y, S | U) + c12 - ius, cmi(t, X1 | X2, Y, S)));
  return p;
}

/// Pentagon membership written as the three inequalities.
inline bool in_pentagon(const macstate::Pentagon &p, macstate::RatePoint q, double tol) {
  return p.feasible && q.r1 >= -tol && q.r2 >= -tol && q.r1 <= p.a1 + tol &&
         q.r2 <= p.a2 + tol && q.r1 + q.r2 <= p.a12 + tol;
}

/// Membership in the convex hull of a pentagon union: q is in the hull iff
/// for every direction mu the support of the union is at least mu.q. Checked
/// on a dense fan of directions.
inline bool in_hull(const std::vector<macstate::Pentagon> &ps, macstate::RatePoint q,
                    double tol, int fan = 2000) {
  if (q.r1 < -tol || q.r2 < -tol)
    return false;
  for (int k = 0; k <= fan; ++k) {
    const double th = 1.5707963267948966 * k / fan;
    const double m1 = std::cos(th), m2 = std::sin(th);
    double best = 0.0;
    for (const auto &p : ps)
      for (const auto &v : p.vertices())
        if (p.feasible)
          best = std::max(best, m1 * v.r1 + m2 * v.r2);
    if (m1 * q.r1 + m2 * q.r2 > best + tol)
      return false;
  }
  return true;
}

/// Random row-stochastic table: rows x width.
inline std::vector<double> random_rows(std::mt19937_64 &rng, std::size_t rows,
                                       std::size_t width, double zero_prob = 0.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> t(rows * width);
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::size_t i = 0; i < width; ++i) {
      t[r * width + i] = u(rng) < zero_prob ? 0.0 : -std::log(1.0 - u(rng));
      s += t[r * width + i];
    }
    if (s == 0.0) {
      t[r * width] = 1.0;
      s = 1.0;
    }
    for (std::size_t i = 0; i < width; ++i)
      t[r * width + i] /= s;
  }
  return t;
}

} // namespace oracle
