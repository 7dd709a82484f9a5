#pragma once

// Per-policy pentagons for every cooperation setting and their union as a
// convex rate region in the (R1, R2) plane.

#include "macstate/macmodel.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace macstate {

struct RatePoint {
  double r1 = 0.0;
  double r2 = 0.0;
  bool operator==(const RatePoint &) const = default;
};

/// {R1 <= a1, R2 <= a2, R1 + R2 <= a12, R >= 0}. An infeasible pentagon
/// (cooperation budget exceeded) is a value, not an error, and is empty.
struct Pentagon {
  double a1 = 0.0;
  double a2 = 0.0;
  double a12 = 0.0;
  bool feasible = false;

  static Pentagon infeasible() { return {}; }
  /// Corners in counter-clockwise order starting at the origin; coincident
  /// corners are repeated rather than dropped.
  std::vector<RatePoint> vertices() const;
  /// max of mu1*r1 + mu2*r2 over the pentagon (0 when infeasible).
  double support(double mu1, double mu2) const;
  bool contains(RatePoint p, double tol) const;
};

/// Information quantities a setting's pentagon is built from. Which
/// conditioning each term uses depends on the mode:
///   coop_u:    I(U;S) one-way family and split, I(U;S1|S2) two-way
///   coop_v:    I(V;S2|S1,U) two-way, else 0
///   r1, r2:    I(X1;Y|X2,S,U,V), I(X2;Y|X1,S,U,V)
///   sum_aux:   I(X1,X2;Y|S,U,V)
///   sum_outer: I(X1,X2;Y|S), or I(X1,X2;Y|S,U) for split
struct RegionTerms {
  double coop_u = 0.0;
  double coop_v = 0.0;
  double r1 = 0.0;
  double r2 = 0.0;
  double sum_aux = 0.0;
  double sum_outer = 0.0;
};

/// Computes the terms from an assembled joint over (S1,S2,U,V,X1,X2,Y).
RegionTerms region_terms(const JointPmf &j, CoopMode mode);

/// Applies a mode's rate formulas to precomputed terms. Bounds are clamped
/// at zero.
Pentagon pentagon_from_terms(const RegionTerms &t, const CoopConfig &coop);

Pentagon pentagon_one_way(const JointPmf &j, double c12);
Pentagon pentagon_two_way(const JointPmf &j, double c12, double c21);
Pentagon pentagon_split(const JointPmf &j, double c12m, double c12s);
Pentagon pentagon_state_only(const JointPmf &j, double c12);
/// Requires I(U;S) < 1e-9 in `j`.
Pentagon pentagon_message_only(const JointPmf &j, double c12);

/// Dispatches on coop.mode.
Pentagon pentagon_for(const JointPmf &j, const CoopConfig &coop);

/// Upper-right frontier of a convex, down-closed region: sorted by
/// increasing r1, from (0, max R2) to (max R1, 0). A region holding only
/// the origin has the single frontier point (0, 0); an empty region has no
/// points.
struct RateRegion {
  std::vector<RatePoint> frontier;

  bool empty() const { return frontier.empty(); }
  double max_r1() const;
  double max_r2() const;
  /// Support function max mu.r over the region.
  double support(double mu1, double mu2) const;
  /// Largest r with (r, r) in the region.
  double max_equal_rate() const;
  /// Closed polygon (counter-clockwise, starting at the origin).
  std::vector<RatePoint> polygon() const;
};

struct HullResult {
  RateRegion region;
  /// Index of the input pentagon each frontier vertex came from.
  std::vector<std::size_t> source;
};

RateRegion hull_union(std::span<const Pentagon> pentagons);
HullResult hull_union_traced(std::span<const Pentagon> pentagons);

/// Euclidean distance from p to the region (0 inside).
double distance_to_region(const RateRegion &r, RatePoint p);
bool region_contains(const RateRegion &r, RatePoint p, double tol);

/// Largest distance from a point of `a` to `b`.
double directed_gap(const RateRegion &a, const RateRegion &b);
double hausdorff_distance(const RateRegion &a, const RateRegion &b);

enum class Comparison { equal, a_subset_b, b_subset_a, crossing };
std::string_view to_string(Comparison c);

struct CompareResult {
  Comparison verdict = Comparison::equal;
  double a_outside_b = 0.0; ///< directed_gap(a, b)
  double b_outside_a = 0.0; ///< directed_gap(b, a)
};

/// Regions are compared through the frontier vertices of each against the
/// other; containment tolerates `tol` bits.
CompareResult region_compare(const RateRegion &a, const RateRegion &b, double tol);

/// Writes `#`-prefixed header lines, a column header, then r1,r2 rows with
/// six decimals.
void write_region_csv(std::ostream &os, const RateRegion &r,
                      const std::vector<std::string> &header);
RateRegion read_region_csv(std::istream &is);

} // namespace macstate
