#pragma once

// Finite-alphabet probability tables and information measures.
//
// Every quantity is in bits. Tables are dense; the alphabets this toolkit
// deals with are small (a handful of letters per axis), so a product space
// rarely exceeds 10^5 cells.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace macstate {

/// Raised for malformed inputs: invalid tables, unknown axes, bad parameters.
class InputError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr double kPmfTolerance = 1e-12;
inline constexpr double kJointTolerance = 1e-10;

/// Number of letters of a finite alphabet; letters are 0..size-1.
class Alphabet {
public:
  explicit Alphabet(std::size_t size);
  std::size_t size() const { return size_; }
  bool operator==(const Alphabet &) const = default;

private:
  std::size_t size_;
};

class Pmf {
public:
  /// Validates nonnegativity and unit mass within kPmfTolerance.
  explicit Pmf(std::vector<double> probs);

  static Pmf uniform(std::size_t size);
  static Pmf point_mass(std::size_t size, std::size_t letter);

  Alphabet alphabet() const { return Alphabet(probs_.size()); }
  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const { return probs_; }

private:
  std::vector<double> probs_;
};

/// Conditional table P(out | parents). Parent tuples are flattened
/// lexicographically (first parent most significant); row r holds the
/// distribution of the output given parent tuple r.
class CondPmf {
public:
  /// Single-letter output, no parents.
  CondPmf() : CondPmf({}, 1, {1.0}) {}
  CondPmf(std::vector<std::size_t> parent_sizes, std::size_t out_size,
          std::vector<double> table);

  /// Unconditional table wrapped as a CondPmf with no parents.
  static CondPmf from_pmf(const Pmf &p);

  const std::vector<std::size_t> &parent_sizes() const { return parent_sizes_; }
  std::size_t out_size() const { return out_size_; }
  std::size_t row_count() const { return table_.size() / out_size_; }
  std::span<const double> row(std::size_t r) const {
    return {table_.data() + r * out_size_, out_size_};
  }
  std::span<const double> table() const { return table_; }
  /// Row index of a parent tuple.
  std::size_t row_index(std::span<const std::size_t> parents) const;

private:
  std::vector<std::size_t> parent_sizes_;
  std::size_t out_size_;
  std::vector<double> table_;
};

struct Axis {
  std::string name;
  std::size_t size = 1;
  bool operator==(const Axis &) const = default;
};

/// Dense joint distribution over named axes. The last axis varies fastest.
class JointPmf {
public:
  JointPmf(std::vector<Axis> axes, std::vector<double> probs);

  const std::vector<Axis> &axes() const { return axes_; }
  std::span<const double> probs() const { return probs_; }
  std::size_t cell_count() const { return probs_.size(); }

  bool has_axis(const std::string &name) const;
  /// Position of a named axis; throws InputError if absent.
  std::size_t axis_index(const std::string &name) const;
  const Axis &axis(const std::string &name) const { return axes_[axis_index(name)]; }

  /// Decodes a flat cell index into per-axis letters.
  std::vector<std::size_t> coordinates(std::size_t cell) const;
  double at(std::span<const std::size_t> letters) const;

private:
  std::vector<Axis> axes_;
  std::vector<double> probs_;
  std::vector<std::size_t> strides_;
};

double entropy(const Pmf &p);
/// Entropy of a nonnegative table that sums to one (not validated).
double entropy(std::span<const double> probs);
double binary_entropy(double p);
/// Parameter of the mod-2 sum of independent Bernoulli(p) and Bernoulli(q).
double bernoulli_convolve(double p, double q);

/// One factor of a product-form joint: the named axis drawn from `table`
/// given the listed parent axes (which must already be defined).
struct Factor {
  std::string axis;
  CondPmf table;
  std::vector<std::string> parents;
};

JointPmf joint_from_factors(const std::vector<Factor> &factors);

/// Sums out every axis not in `keep`. Kept axes retain their original order.
JointPmf marginalize(const JointPmf &j, const std::vector<std::string> &keep);

/// Conditional distribution of `out` given `given`, as a CondPmf whose
/// parents appear in the order listed. Rows with zero conditioning mass are
/// returned uniform.
CondPmf conditional(const JointPmf &j, const std::string &out,
                    const std::vector<std::string> &given);

double entropy_of(const JointPmf &j, const std::vector<std::string> &axes);

/// I(A;B|C) in bits; `c` may be empty. Axis sets must be disjoint.
double conditional_mutual_information(const JointPmf &j,
                                      const std::vector<std::string> &a,
                                      const std::vector<std::string> &b,
                                      const std::vector<std::string> &c = {});

} // namespace macstate
