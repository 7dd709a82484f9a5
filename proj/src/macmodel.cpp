#include "macstate/macmodel.hpp"

#include <cmath>
#include <sstream>

namespace macstate {

namespace {

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

std::size_t axis_size(const MacChannel &ch, std::size_t u, std::size_t v,
                      const std::string &name) {
  if (name == axis::S1) return ch.s1_size;
  if (name == axis::S2) return ch.s2_size;
  if (name == axis::U) return u;
  if (name == axis::V) return v;
  if (name == axis::X1) return ch.x1_size;
  if (name == axis::X2) return ch.x2_size;
  if (name == axis::Y) return ch.y_size;
  throw InputError("unknown axis: " + name);
}

void check_factor(const MacChannel &ch, std::size_t u, std::size_t v,
                  const Factor &f, const std::string &axis_name,
                  const std::vector<std::string> &parents) {
  if (f.axis != axis_name)
    throw InputError("policy factor for " + axis_name + " is labelled " + f.axis);
  if (f.parents != parents) {
    std::string want;
    for (const auto &p : parents)
      want += (want.empty() ? "" : ",") + p;
    throw InputError("policy factor " + axis_name + " must be conditioned on {" +
                     want + "}");
  }
  for (std::size_t k = 0; k < parents.size(); ++k)
    if (f.table.parent_sizes()[k] != axis_size(ch, u, v, parents[k]))
      throw InputError("policy factor " + axis_name + ": parent " + parents[k] +
                       " has wrong size");
  if (f.table.out_size() != axis_size(ch, u, v, axis_name))
    throw InputError("policy factor " + axis_name + ": wrong output alphabet");
}

Factor constant_factor(const MacChannel &ch, std::size_t u, std::size_t v,
                       const std::string &name,
                       const std::vector<std::string> &parents, const Pmf &row) {
  std::vector<std::size_t> sizes;
  std::size_t rows = 1;
  for (const auto &p : parents) {
    sizes.push_back(axis_size(ch, u, v, p));
    rows *= sizes.back();
  }
  std::vector<double> table;
  for (std::size_t r = 0; r < rows; ++r)
    table.insert(table.end(), row.probs().begin(), row.probs().end());
  return {name, CondPmf(std::move(sizes), row.size(), std::move(table)), parents};
}

} // namespace

std::string_view to_string(CoopMode m) {
  switch (m) {
  case CoopMode::one_way: return "one_way";
  case CoopMode::two_way: return "two_way";
  case CoopMode::split: return "split";
  case CoopMode::state_only: return "state_only";
  case CoopMode::message_only: return "message_only";
  }
  return "?";
}

CoopMode parse_mode(std::string_view s) {
  for (CoopMode m : {CoopMode::one_way, CoopMode::two_way, CoopMode::split,
                     CoopMode::state_only, CoopMode::message_only})
    if (to_string(m) == s)
      return m;
  throw InputError("unknown cooperation mode: " + std::string(s));
}

bool is_one_way_family(CoopMode m) {
  return m == CoopMode::one_way || m == CoopMode::state_only ||
         m == CoopMode::message_only;
}

void CoopConfig::validate() const {
  auto check = [](double v, const char *name) {
    if (!finite_nonneg(v))
      throw InputError(std::string(name) + " must be a finite nonnegative rate");
  };
  check(c12, "c12");
  check(c21, "c21");
  check(c12m, "c12m");
  check(c12s, "c12s");
  auto unused = [&](double v, const char *name) {
    if (v != 0.0)
      throw InputError(std::string(name) + " is not used by mode " +
                       std::string(to_string(mode)));
  };
  switch (mode) {
  case CoopMode::split:
    unused(c12, "c12");
    unused(c21, "c21");
    break;
  case CoopMode::two_way:
    unused(c12m, "c12m");
    unused(c12s, "c12s");
    break;
  default:
    unused(c21, "c21");
    unused(c12m, "c12m");
    unused(c12s, "c12s");
  }
}

void InputConstraint::validate() const {
  if (!(p1 >= 0.0 && p1 <= 1.0))
    throw InputError("constraint p1 must lie in [0,1]");
  if (!(p2 >= 0.0 && p2 <= 1.0))
    throw InputError("constraint p2 must lie in [0,1]");
}

PolicyLayout policy_layout(CoopMode mode) {
  using namespace axis;
  switch (mode) {
  case CoopMode::one_way:
  case CoopMode::state_only:
    return {{S1}, std::nullopt, {S1, U}, {U}};
  case CoopMode::message_only:
    return {{}, std::nullopt, {S1, U}, {U}};
  case CoopMode::two_way:
    return {{S1}, std::vector<std::string>{S2, U}, {S1, U, V}, {S2, U, V}};
  case CoopMode::split:
    return {{S1}, std::vector<std::string>{}, {S1, U, V}, {U, V}};
  }
  throw InputError("unknown mode");
}

void validate_channel(const MacChannel &ch) {
  for (std::size_t s : {ch.s1_size, ch.s2_size, ch.x1_size, ch.x2_size, ch.y_size})
    if (s == 0)
      throw InputError("channel alphabet of size 0");
  if (ch.state_pmf.size() != ch.s1_size * ch.s2_size)
    throw InputError("state_pmf has " + std::to_string(ch.state_pmf.size()) +
                     " entries, expected s1_size*s2_size = " +
                     std::to_string(ch.s1_size * ch.s2_size));
  const std::vector<std::size_t> parents{ch.s1_size, ch.s2_size, ch.x1_size,
                                         ch.x2_size};
  if (ch.kernel.parent_sizes() != parents)
    throw InputError("kernel must be conditioned on (s1,s2,x1,x2) with matching sizes");
  if (ch.kernel.out_size() != ch.y_size)
    throw InputError("kernel rows must range over y_size letters");
}

void validate_policy(const MacChannel &ch, const AuxPolicy &pol) {
  validate_channel(ch);
  if (pol.mode != CoopMode::two_way && ch.s2_size != 1)
    throw InputError(std::string(to_string(pol.mode)) +
                     " mode needs a single state axis (s2_size = 1)");
  const auto layout = policy_layout(pol.mode);
  if (layout.v_parents.has_value() != pol.v_given.has_value())
    throw InputError(pol.v_given ? "policy carries V but mode " +
                                       std::string(to_string(pol.mode)) + " has none"
                                 : "policy is missing the V factor");
  const std::size_t u = pol.u_card();
  const std::size_t v = pol.v_card();
  check_factor(ch, u, v, pol.u_given, axis::U, layout.u_parents);
  if (pol.v_given)
    check_factor(ch, u, v, *pol.v_given, axis::V, *layout.v_parents);
  check_factor(ch, u, v, pol.x1_given, axis::X1, layout.x1_parents);
  check_factor(ch, u, v, pol.x2_given, axis::X2, layout.x2_parents);
}

MacChannel build_switch_bsc(double pz) {
  if (!(pz >= 0.0 && pz <= 1.0))
    throw InputError("pz must lie in [0,1]");
  MacChannel ch;
  ch.s1_size = 2;
  ch.s2_size = 1;
  ch.x1_size = ch.x2_size = ch.y_size = 2;
  ch.state_pmf = Pmf({0.5, 0.5});
  std::vector<double> k;
  for (std::size_t s = 0; s < 2; ++s)
    for (std::size_t x1 = 0; x1 < 2; ++x1)
      for (std::size_t x2 = 0; x2 < 2; ++x2) {
        const std::size_t through = s == 0 ? x1 : x2;
        k.push_back(through == 0 ? 1.0 - pz : pz);
        k.push_back(through == 1 ? 1.0 - pz : pz);
      }
  ch.kernel = CondPmf({2, 1, 2, 2}, 2, std::move(k));
  return ch;
}

JointPmf assemble_joint(const MacChannel &ch, const AuxPolicy &pol) {
  validate_policy(ch, pol);

  // P(s1) and P(s2|s1) from the flattened state law.
  std::vector<double> ps1(ch.s1_size, 0.0);
  for (std::size_t a = 0; a < ch.s1_size; ++a)
    for (std::size_t b = 0; b < ch.s2_size; ++b)
      ps1[a] += ch.state_pmf[a * ch.s2_size + b];
  double total = 0.0;
  for (double p : ps1)
    total += p;
  for (double &p : ps1)
    p /= total;
  std::vector<double> ps2;
  for (std::size_t a = 0; a < ch.s1_size; ++a) {
    double row = 0.0;
    for (std::size_t b = 0; b < ch.s2_size; ++b)
      row += ch.state_pmf[a * ch.s2_size + b];
    for (std::size_t b = 0; b < ch.s2_size; ++b)
      ps2.push_back(row > 0.0 ? ch.state_pmf[a * ch.s2_size + b] / row
                              : 1.0 / static_cast<double>(ch.s2_size));
  }
  for (std::size_t a = 0; a < ch.s1_size; ++a) {
    double s = 0.0;
    for (std::size_t b = 0; b < ch.s2_size; ++b)
      s += ps2[a * ch.s2_size + b];
    for (std::size_t b = 0; b < ch.s2_size; ++b)
      ps2[a * ch.s2_size + b] /= s;
  }

  std::vector<Factor> f;
  f.push_back({axis::S1, CondPmf({}, ch.s1_size, std::move(ps1)), {}});
  f.push_back({axis::S2, CondPmf({ch.s1_size}, ch.s2_size, std::move(ps2)), {axis::S1}});
  f.push_back(pol.u_given);
  if (pol.v_given)
    f.push_back(*pol.v_given);
  else
    f.push_back({axis::V, CondPmf({}, 1, {1.0}), {}});
  f.push_back(pol.x1_given);
  f.push_back(pol.x2_given);
  f.push_back({axis::Y, ch.kernel, {axis::S1, axis::S2, axis::X1, axis::X2}});
  return joint_from_factors(f);
}

double expected_weight(const AuxPolicy &pol, const MacChannel &ch, int encoder) {
  if (encoder != 1 && encoder != 2)
    throw InputError("encoder must be 1 or 2");
  const std::size_t size = encoder == 1 ? ch.x1_size : ch.x2_size;
  if (size != 2)
    throw InputError("expected weight needs a binary input alphabet");
  const auto j = assemble_joint(ch, pol);
  const auto m = marginalize(j, {encoder == 1 ? axis::X1 : axis::X2});
  return m.probs()[1];
}

AuxPolicy independent_policy(const MacChannel &ch, CoopMode mode, const Pmf &x1,
                             const Pmf &x2) {
  const auto layout = policy_layout(mode);
  AuxPolicy pol;
  pol.mode = mode;
  const Pmf one = Pmf::point_mass(1, 0);
  pol.u_given = constant_factor(ch, 1, 1, axis::U, layout.u_parents, one);
  if (layout.v_parents)
    pol.v_given = constant_factor(ch, 1, 1, axis::V, *layout.v_parents, one);
  pol.x1_given = constant_factor(ch, 1, 1, axis::X1, layout.x1_parents, x1);
  pol.x2_given = constant_factor(ch, 1, 1, axis::X2, layout.x2_parents, x2);
  validate_policy(ch, pol);
  return pol;
}

AuxPolicy state_copy_policy(const MacChannel &ch, const Pmf &x1, const Pmf &x2) {
  const std::size_t s = ch.s1_size;
  std::vector<double> u;
  for (std::size_t a = 0; a < s; ++a)
    for (std::size_t b = 0; b < s; ++b)
      u.push_back(a == b ? 1.0 : 0.0);
  AuxPolicy pol;
  pol.mode = CoopMode::one_way;
  pol.u_given = {axis::U, CondPmf({s}, s, std::move(u)), {axis::S1}};
  pol.x1_given = constant_factor(ch, s, 1, axis::X1, {axis::S1, axis::U}, x1);
  pol.x2_given = constant_factor(ch, s, 1, axis::X2, {axis::U}, x2);
  validate_policy(ch, pol);
  return pol;
}

} // namespace macstate
