#pragma once

// State-dependent two-user MAC, cooperation settings and the auxiliary
// policies whose product with the channel gives each setting's joint law.

#include "macstate/probcore.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace macstate {

namespace axis {
inline const std::string S1 = "S1";
inline const std::string S2 = "S2";
inline const std::string U = "U";
inline const std::string V = "V";
inline const std::string X1 = "X1";
inline const std::string X2 = "X2";
inline const std::string Y = "Y";
} // namespace axis

/// Channel P(y|x1,x2,s1,s2) with state law P(s1,s2). One-way settings use a
/// single state axis, encoded as |S2| = 1.
struct MacChannel {
  std::size_t s1_size = 1;
  std::size_t s2_size = 1;
  std::size_t x1_size = 2;
  std::size_t x2_size = 2;
  std::size_t y_size = 2;
  /// Flattened over (s1, s2), s2 fastest.
  Pmf state_pmf = Pmf::uniform(1);
  /// Parents (s1, s2, x1, x2), lexicographic row order.
  CondPmf kernel = CondPmf({1, 1, 2, 2}, 2, std::vector<double>(8, 0.5));
};

enum class CoopMode { one_way, two_way, split, state_only, message_only };

std::string_view to_string(CoopMode m);
/// Parses "one_way", "two_way", "split", "state_only", "message_only".
CoopMode parse_mode(std::string_view s);
/// True for the modes that share the single-state, single-auxiliary layout.
bool is_one_way_family(CoopMode m);

struct CoopConfig {
  CoopMode mode = CoopMode::one_way;
  double c12 = 0.0;  ///< one_way, state_only, message_only, two_way
  double c21 = 0.0;  ///< two_way only
  double c12m = 0.0; ///< split: message link
  double c12s = 0.0; ///< split: state link

  /// Throws InputError for negative/non-finite rates or rates set on a
  /// field the mode does not use.
  void validate() const;
};

/// Upper bounds on the expected fraction of ones at each encoder.
struct InputConstraint {
  double p1 = 1.0;
  double p2 = 1.0;
  bool active1 = false;
  bool active2 = false;

  static InputConstraint none() { return {}; }
  static InputConstraint both(double p1, double p2) { return {p1, p2, true, true}; }
  void validate() const;
};

/// Auxiliary and input conditionals for one mode's factorization. Each
/// factor lists its parent axes; the admissible parent sets are:
///   one_way / state_only: U|S1, X1|S1,U, X2|U
///   message_only:         U|-,  X1|S1,U, X2|U
///   two_way:              U|S1, V|S2,U, X1|S1,U,V, X2|S2,U,V
///   split:                U|S1, V|-,   X1|S1,U,V, X2|U,V
struct AuxPolicy {
  CoopMode mode = CoopMode::one_way;
  Factor u_given;
  std::optional<Factor> v_given;
  Factor x1_given;
  Factor x2_given;

  std::size_t u_card() const { return u_given.table.out_size(); }
  std::size_t v_card() const { return v_given ? v_given->table.out_size() : 1; }
};

/// Expected parent lists for a mode, in the order listed above.
struct PolicyLayout {
  std::vector<std::string> u_parents;
  std::optional<std::vector<std::string>> v_parents;
  std::vector<std::string> x1_parents;
  std::vector<std::string> x2_parents;
};
PolicyLayout policy_layout(CoopMode mode);

/// Throws InputError naming the first violated invariant.
void validate_channel(const MacChannel &ch);

/// Throws InputError if the policy's parent structure or sizes do not match
/// `mode` on this channel.
void validate_policy(const MacChannel &ch, const AuxPolicy &pol);

/// Y = (1-S) X1 xor S X2 xor Z with S ~ Bernoulli(1/2), Z ~ Bernoulli(pz).
MacChannel build_switch_bsc(double pz);

/// Full joint over (S1, S2, U, V, X1, X2, Y); V has size 1 when the mode has
/// no second auxiliary.
JointPmf assemble_joint(const MacChannel &ch, const AuxPolicy &pol);

/// P(X_enc = 1) under the assembled joint. Binary input alphabets only.
double expected_weight(const AuxPolicy &pol, const MacChannel &ch, int encoder);

/// Policy with |U| = |V| = 1 and the given unconditional input laws.
AuxPolicy independent_policy(const MacChannel &ch, CoopMode mode,
                             const Pmf &x1, const Pmf &x2);

/// One-way policy with U = S (|U| = |S1|) and input laws that ignore U.
AuxPolicy state_copy_policy(const MacChannel &ch, const Pmf &x1, const Pmf &x2);

} // namespace macstate
