#pragma once

// Boundary tracing for the cooperation regions.
//
// A region is convex, so its frontier is recovered from the support
// function: for each direction mu the best policy maximizes the largest
// mu-weighted rate pair of its pentagon. The policy space is a stack of
// conditional tables; each row lives on a probability simplex and is
// searched by random-restart coordinate ascent (mass moved between pairs of
// letters, geometric step decay). Cooperation budgets and input weight caps
// are enforced by a repair step after every move, so every evaluated policy
// is feasible.

#include "macstate/macmodel.hpp"
#include "macstate/rateregion.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace macstate {

struct SearchConfig {
  std::size_t u_card = 2;
  std::size_t v_card = 2;
  std::size_t weight_count = 65;
  std::size_t restarts = 24;
  std::size_t local_steps = 400;
  double initial_step = 0.25;
  double step_decay = 0.5;
  double tol = 1e-7;
  std::uint64_t seed = 1;
  /// Worker threads; 0 reads MACSTATE_THREADS, falling back to the
  /// hardware concurrency.
  std::size_t threads = 0;

  void validate() const;
};

/// |U| <= min(|X1||X2||S|+3, |Y||S|+4) for the one-way family. The same
/// expression, with S = (S1,S2), caps |U| and |V| in the two-way and split
/// settings.
std::size_t cardinality_cap(const MacChannel &ch, CoopMode mode);

/// Chebyshev-Lobatto angles in [0, pi/2]; dense near both axes.
std::vector<double> sweep_angles(std::size_t count);

/// Flat parameter vector made of blocks of simplex rows.
struct SimplexBlock {
  std::size_t rows = 1;
  std::size_t width = 1;
};

/// A searchable family of pentagons: parameter layout, a repair map that
/// projects any point of the product of simplices onto the feasible set, and
/// the pentagon of a (feasible) parameter vector.
struct PentagonModel {
  std::vector<SimplexBlock> blocks;
  std::function<void(std::span<double>)> repair;
  std::function<Pentagon(std::span<const double>)> pentagon;

  std::size_t parameter_count() const;
};

struct SearchOutcome {
  std::vector<double> params;
  double value = 0.0;
  Pentagon pentagon;
};

/// One restart of the coordinate ascent maximizing pentagon.support(mu).
/// Restart 0 starts from uniform rows, later restarts from random ones.
/// Deterministic in (model, mu, cfg, restart, stream).
SearchOutcome coordinate_ascent(const PentagonModel &model, double mu1, double mu2,
                                const SearchConfig &cfg, std::size_t restart,
                                std::uint64_t stream);

struct DirectionTrace {
  double mu1 = 0.0;
  double mu2 = 0.0;
  SearchOutcome best;
  /// Best minus worst restart objective.
  double restart_spread = 0.0;
};

struct ModelTrace {
  std::vector<DirectionTrace> directions;
  /// Every restart's final point, direction-major, then one polish run per
  /// direction.
  std::vector<SearchOutcome> all;
};

/// Runs cfg.restarts restarts for each of cfg.weight_count directions, then
/// polishes each direction from the best point found for it by any run.
/// Work units run concurrently; the reduction is sequential and ties go to
/// the lexicographically smaller parameter vector, so results do not depend
/// on the thread count.
ModelTrace trace_model(const PentagonModel &model, const SearchConfig &cfg);

/// Searchable model for a channel/cooperation/constraint triple.
class PolicyModel {
public:
  PolicyModel(const MacChannel &ch, const CoopConfig &coop,
              const InputConstraint &constr, const SearchConfig &cfg);

  const PentagonModel &model() const { return model_; }
  AuxPolicy to_policy(std::span<const double> params) const;

private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
  PentagonModel model_;
};

struct WeightedResult {
  bool feasible = false;
  double value = 0.0;
  AuxPolicy policy;
  Pentagon pentagon;
};

WeightedResult optimize_weighted(const MacChannel &ch, const CoopConfig &coop,
                                 const InputConstraint &constr, double mu1,
                                 double mu2, const SearchConfig &cfg);

struct Witness {
  RatePoint vertex;
  AuxPolicy policy;
  Pentagon pentagon;
};

struct BoundaryResult {
  RateRegion region;
  /// One per frontier vertex, in frontier order.
  std::vector<Witness> witnesses;
  std::vector<DirectionTrace> diagnostics;
};

BoundaryResult trace_boundary(const MacChannel &ch, const CoopConfig &coop,
                              const InputConstraint &constr,
                              const SearchConfig &cfg);

struct EqualRateResult {
  double rate = 0.0;
  /// Policy whose pentagon holds (rate, rate), or the first of the two
  /// frontier witnesses time-shared to reach it.
  std::optional<AuxPolicy> policy;
  std::optional<AuxPolicy> partner;
  /// Time-sharing weight of `partner` (0 when a single policy suffices).
  double share = 0.0;
};

EqualRateResult max_equal_rate(const MacChannel &ch, const CoopConfig &coop,
                               const InputConstraint &constr,
                               const SearchConfig &cfg);
EqualRateResult max_equal_rate(const BoundaryResult &traced);

/// How the closed-form switch-channel formulas spend encoder 1's weight
/// budget. `concentrated` puts all ones on S=0 slots (P(X1=1|S=0) =
/// min(2 p1, 1/2)); `literal` uses P(X1=1|S=0) = p1.
enum class WeightAllocation { concentrated, literal };

/// Region of the switch channel from its specialized closed form, searched
/// over binary U: P(u|s) and P(x2|u). Independent of the general joint
/// assembly path.
RateRegion closed_form_example_region(double pz, double p1, double p2, double c12,
                                      const SearchConfig &cfg,
                                      WeightAllocation alloc = WeightAllocation::concentrated);

/// Closed-form pentagon for one binary-U policy; exposed for tests.
Pentagon closed_form_pentagon(double pz, double p1, double p2, double c12,
                              double u1_given_s0, double u1_given_s1,
                              double x2_given_u0, double x2_given_u1,
                              WeightAllocation alloc = WeightAllocation::concentrated);

/// Reads MACSTATE_THREADS (>= 1) or returns the hardware concurrency.
std::size_t default_thread_count();

} // namespace macstate
