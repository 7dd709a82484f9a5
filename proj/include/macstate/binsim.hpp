#pragma once

// Monte-Carlo run of the one-way cooperation scheme at small blocklength:
// a binned U codebook, first-typical-word selection in the bin named by the
// cooperation index, superposed X1/X2 codewords and an exhaustive
// joint-typicality decoder that knows the state sequence.
//
// Finite-n choices:
//   message counts        M = max(1, floor(2^{n R}))
//   u-words               N_u = max(1, floor(2^{n c12}))
//   bins                  N_b = max(1, floor(2^{n (c12 - I(U;S) - eps/2)})), <= N_u
//   message split         M1a = min(N_b, M1), M1b = max(1, floor(M1 / M1a))
// Words are assigned to bins in contiguous runs whose sizes differ by at most
// one. X2 words are a fixed codebook indexed by (u-word, m2); X1 words are
// drawn per trial from P(x1|u,s) indexed by (u-word, m1b).

#include "macstate/macmodel.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <vector>

namespace macstate {

/// Raised when a request exceeds the simulator's memory/time guard.
class ResourceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kMaxBlocklength = 20;
inline constexpr double kMaxExponent = 20.0;      ///< per codebook, in bits
inline constexpr double kMaxCandidateBits = 22.0; ///< decoder search space

using Sequence = std::vector<std::uint8_t>;

struct SimParams {
  std::size_t n = 8;
  double r1 = 0.0;
  double r2 = 0.0;
  double c12 = 0.0;
  double eps = 0.5;
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  MacChannel channel;
  AuxPolicy policy;
  /// 0 reads MACSTATE_THREADS.
  std::size_t threads = 0;

  /// InputError for bad values, ResourceError past the guards.
  void validate() const;
};

/// One sequence per axis of `j`, all of the same length. True iff every
/// cell's empirical frequency lies within eps * p(cell) of p(cell) (so
/// zero-probability cells must not occur).
bool is_jointly_typical(const std::vector<Sequence> &seqs, const JointPmf &j, double eps);

struct Codebook {
  std::size_t n = 0;
  std::size_t u_count = 1;
  std::size_t bin_count = 1;
  std::size_t m1a = 1, m1b = 1, m2 = 1;
  double i_us = 0.0;
  /// Flattened u_count x n.
  std::vector<std::uint8_t> u_words;
  /// bin b holds words [bin_start[b], bin_start[b+1]).
  std::vector<std::size_t> bin_start;
  std::uint64_t seed = 0;

  std::span<const std::uint8_t> u_word(std::size_t k) const {
    return {u_words.data() + k * n, n};
  }
  std::size_t bin_size(std::size_t b) const { return bin_start[b + 1] - bin_start[b]; }
};

Codebook build_codebooks(const SimParams &p);

/// X2 word for (u-word index, m2).
Sequence x2_word(const SimParams &p, const Codebook &cb, std::size_t j, std::size_t m2);
/// X1 word of one trial for (u-word index, m1b) given the state sequence.
Sequence x1_word(const SimParams &p, const Codebook &cb, std::uint64_t trial,
                 std::size_t j, std::size_t m1b, const Sequence &s);

struct Encoded {
  Sequence x1, x2;
  std::size_t coop_index = 0; ///< selected u-word
  bool coverage_ok = true;
};

/// m1 in [0, m1a*m1b) splits as m1a_index = m1 / m1b, m1b_index = m1 % m1b.
Encoded encode(const SimParams &p, const Codebook &cb, std::uint64_t trial,
               std::size_t m1, std::size_t m2, const Sequence &s);

struct Decoded {
  std::optional<std::pair<std::size_t, std::size_t>> messages; ///< (m1, m2)
  std::size_t hits = 0;
  /// First hit in search order that differs from `truth`, when requested.
  std::optional<std::pair<std::size_t, std::size_t>> first_wrong;
};

Decoded decode(const SimParams &p, const Codebook &cb, std::uint64_t trial,
               const Sequence &y, const Sequence &s,
               std::optional<std::pair<std::size_t, std::size_t>> truth = std::nullopt);

struct ErrorBreakdown {
  std::size_t coverage = 0;  ///< encoder found no typical u-word
  std::size_t atypical = 0;  ///< transmitted tuple not jointly typical
  std::size_t m2_only = 0;   ///< competing hit differs in m2 only
  std::size_t m1b_only = 0;
  std::size_t m1b_m2 = 0;
  std::size_t m1a = 0;       ///< competing hit in another bin
  std::size_t total() const { return coverage + atypical + m2_only + m1b_only + m1b_m2 + m1a; }
};

struct SimResult {
  double error_rate = 0.0;
  std::size_t errors = 0;
  std::size_t trials = 0;
  double ci95_halfwidth = 0.0;
  ErrorBreakdown breakdown;
  Codebook shape; ///< words cleared; counts only
};

SimResult estimate_error(const SimParams &p);

void write_sim_csv_header(std::ostream &os);
void write_sim_csv_row(std::ostream &os, const SimParams &p, const SimResult &r);

} // namespace macstate
