#include "macstate/binsim.hpp"

#include "detail.hpp"
#include "macstate/optimizer.hpp"
#include "macstate/rateregion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

namespace macstate {

using detail::splitmix;

namespace {

enum Tag : std::uint64_t { kTagU = 1, kTagX1 = 2, kTagX2 = 3, kTagTrial = 4 };

double hash_uniform(std::uint64_t seed, std::uint64_t tag, std::uint64_t a,
                    std::uint64_t b, std::uint64_t c, std::uint64_t d = 0) {
  std::uint64_t h = splitmix(seed ^ (tag << 56));
  h = splitmix(h ^ a);
  h = splitmix(h ^ b);
  h = splitmix(h ^ c);
  h = splitmix(h ^ d);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

std::uint8_t draw(std::span<const double> row, double u) {
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < row.size(); ++k) {
    acc += row[k];
    if (u < acc)
      return static_cast<std::uint8_t>(k);
  }
  // Last letter with positive mass.
  for (std::size_t k = row.size(); k-- > 0;)
    if (row[k] > 0.0)
      return static_cast<std::uint8_t>(k);
  return 0;
}

std::size_t floor_pow2(double bits) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::exp2(bits) + 1e-9)));
}

// Count bounds per cell: n p (1-eps) <= N <= n p (1+eps).
class Typical {
public:
  Typical(const JointPmf &j, std::size_t n, double eps) {
    for (double p : j.probs()) {
      const double np = static_cast<double>(n) * p;
      lo_.push_back(p > 0.0 ? static_cast<int>(std::ceil(np * (1.0 - eps) - 1e-9)) : 0);
      hi_.push_back(p > 0.0 ? static_cast<int>(std::floor(np * (1.0 + eps) + 1e-9)) : 0);
    }
    for (const auto &a : j.axes())
      sizes_.push_back(a.size);
  }

  // cell(t) gives the flat cell index of position t.
  template <typename Cell> bool check(std::size_t n, Cell cell) const {
    thread_local std::vector<int> counts;
    counts.assign(lo_.size(), 0);
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t c = cell(t);
      if (++counts[c] > hi_[c])
        return false;
    }
    for (std::size_t c = 0; c < lo_.size(); ++c)
      if (counts[c] < lo_[c])
        return false;
    return true;
  }

  const std::vector<std::size_t> &sizes() const { return sizes_; }

private:
  std::vector<int> lo_, hi_;
  std::vector<std::size_t> sizes_;
};

// Marginals of the policy joint used by the scheme.
struct SchemeLaw {
  JointPmf su;   // (S1, U)
  JointPmf full; // (S1, U, X1, X2, Y)
  std::vector<double> pu;
  std::size_t nu, nx1, nx2, ny;

  explicit SchemeLaw(const SimParams &p)
      : su(marginalize(assemble_joint(p.channel, p.policy), {axis::S1, axis::U})),
        full(marginalize(assemble_joint(p.channel, p.policy),
                         {axis::S1, axis::U, axis::X1, axis::X2, axis::Y})) {
    nu = p.policy.u_card();
    nx1 = p.channel.x1_size;
    nx2 = p.channel.x2_size;
    ny = p.channel.y_size;
    const auto m = marginalize(full, {axis::U});
    pu.assign(m.probs().begin(), m.probs().end());
  }
};

struct Context {
  const SimParams &p;
  const Codebook &cb;
  SchemeLaw law;
  Typical su_typ, full_typ;

  Context(const SimParams &p_, const Codebook &cb_)
      : p(p_), cb(cb_), law(p_), su_typ(law.su, p_.n, p_.eps),
        full_typ(law.full, p_.n, p_.eps) {}

  // First word of bin b typical with s; falls back to the bin's first word.
  std::pair<std::size_t, bool> select(std::size_t b, const Sequence &s) const {
    for (std::size_t k = cb.bin_start[b]; k < cb.bin_start[b + 1]; ++k) {
      const auto u = cb.u_word(k);
      if (su_typ.check(p.n, [&](std::size_t t) { return s[t] * law.nu + u[t]; }))
        return {k, true};
    }
    return {cb.bin_start[b], false};
  }

  bool typical(const Sequence &s, std::span<const std::uint8_t> u, const Sequence &x1,
               const Sequence &x2, const Sequence &y) const {
    return full_typ.check(p.n, [&](std::size_t t) {
      return (((s[t] * law.nu + u[t]) * law.nx1 + x1[t]) * law.nx2 + x2[t]) * law.ny + y[t];
    });
  }
};

} // namespace

void SimParams::validate() const {
  if (n < 1)
    throw InputError("blocklength must be >= 1");
  if (!(eps > 0.0 && eps < 1.0))
    throw InputError("eps must lie in (0,1)");
  if (trials < 1)
    throw InputError("trials must be >= 1");
  for (double r : {r1, r2, c12})
    if (!(r >= 0.0) || !std::isfinite(r))
      throw InputError("rates must be nonnegative and finite");
  validate_channel(channel);
  if (!is_one_way_family(policy.mode) || channel.s2_size != 1)
    throw InputError("simulation needs a one-way policy on a single-state channel");
  validate_policy(channel, policy);
  if (policy.u_card() > 256 || channel.x1_size > 256 || channel.x2_size > 256 ||
      channel.s1_size > 256 || channel.y_size > 256)
    throw InputError("simulation alphabets are limited to 256 letters");
  const double dn = static_cast<double>(n);
  if (n > kMaxBlocklength)
    throw ResourceError("blocklength " + std::to_string(n) + " exceeds the guard " +
                        std::to_string(kMaxBlocklength));
  if (dn * r1 > kMaxExponent || dn * r2 > kMaxExponent || dn * c12 > kMaxExponent)
    throw ResourceError("codebook size exceeds 2^20 words");
  if (dn * (r1 + r2) > kMaxCandidateBits)
    throw ResourceError("decoder search space exceeds 2^22 candidates");
}

bool is_jointly_typical(const std::vector<Sequence> &seqs, const JointPmf &j, double eps) {
  if (seqs.size() != j.axes().size())
    throw InputError("need one sequence per axis");
  if (!(eps > 0.0))
    throw InputError("eps must be positive");
  const std::size_t n = seqs.empty() ? 0 : seqs.front().size();
  for (std::size_t a = 0; a < seqs.size(); ++a) {
    if (seqs[a].size() != n)
      throw InputError("sequence length mismatch");
    for (auto v : seqs[a])
      if (v >= j.axes()[a].size)
        throw InputError("sequence letter outside its alphabet");
  }
  if (n == 0)
    throw InputError("empty sequences");
  const Typical typ(j, n, eps);
  return typ.check(n, [&](std::size_t t) {
    std::size_t c = 0;
    for (std::size_t a = 0; a < seqs.size(); ++a)
      c = c * j.axes()[a].size + seqs[a][t];
    return c;
  });
}

Codebook build_codebooks(const SimParams &p) {
  p.validate();
  const SchemeLaw law(p);
  Codebook cb;
  cb.n = p.n;
  cb.seed = p.seed;
  const double dn = static_cast<double>(p.n);
  cb.i_us = std::max(0.0, conditional_mutual_information(law.su, {axis::U}, {axis::S1}));
  cb.u_count = floor_pow2(dn * p.c12);
  cb.bin_count = std::min(cb.u_count, floor_pow2(dn * (p.c12 - cb.i_us - p.eps / 2.0)));
  const std::size_t m1 = floor_pow2(dn * p.r1);
  cb.m1a = std::min(cb.bin_count, m1);
  cb.m1b = std::max<std::size_t>(1, m1 / cb.m1a);
  cb.m2 = floor_pow2(dn * p.r2);
  for (std::size_t b = 0; b <= cb.bin_count; ++b)
    cb.bin_start.push_back(b * cb.u_count / cb.bin_count);
  cb.u_words.resize(cb.u_count * p.n);
  for (std::size_t k = 0; k < cb.u_count; ++k)
    for (std::size_t t = 0; t < p.n; ++t)
      cb.u_words[k * p.n + t] = draw(law.pu, hash_uniform(p.seed, kTagU, k, t, 0));
  return cb;
}

Sequence x2_word(const SimParams &p, const Codebook &cb, std::size_t j, std::size_t m2) {
  const auto u = cb.u_word(j);
  Sequence x(p.n);
  for (std::size_t t = 0; t < p.n; ++t)
    x[t] = draw(p.policy.x2_given.table.row(u[t]), hash_uniform(p.seed, kTagX2, j, m2, t));
  return x;
}

Sequence x1_word(const SimParams &p, const Codebook &cb, std::uint64_t trial,
                 std::size_t j, std::size_t m1b, const Sequence &s) {
  const auto u = cb.u_word(j);
  const std::size_t nu = p.policy.u_card();
  Sequence x(p.n);
  for (std::size_t t = 0; t < p.n; ++t)
    x[t] = draw(p.policy.x1_given.table.row(s[t] * nu + u[t]),
                hash_uniform(p.seed, kTagX1, trial, j, m1b, t));
  return x;
}

namespace {

Encoded encode_ctx(const Context &cx, std::uint64_t trial, std::size_t m1, std::size_t m2,
                   const Sequence &s) {
  const auto &cb = cx.cb;
  if (m1 >= cb.m1a * cb.m1b || m2 >= cb.m2)
    throw InputError("message index out of range");
  if (s.size() != cx.p.n)
    throw InputError("state sequence length mismatch");
  const auto [j, ok] = cx.select(m1 / cb.m1b, s);
  return {x1_word(cx.p, cb, trial, j, m1 % cb.m1b, s), x2_word(cx.p, cb, j, m2), j, ok};
}

Decoded decode_ctx(const Context &cx, std::uint64_t trial, const Sequence &y,
                   const Sequence &s,
                   std::optional<std::pair<std::size_t, std::size_t>> truth) {
  const auto &cb = cx.cb;
  if (y.size() != cx.p.n || s.size() != cx.p.n)
    throw InputError("sequence length mismatch");
  Decoded out;
  std::vector<Sequence> x2s(cb.m2);
  for (std::size_t a = 0; a < cb.m1a; ++a) {
    const std::size_t j = cx.select(a, s).first;
    const auto u = cb.u_word(j);
    for (std::size_t m = 0; m < cb.m2; ++m)
      x2s[m] = x2_word(cx.p, cb, j, m);
    for (std::size_t b = 0; b < cb.m1b; ++b) {
      const auto x1 = x1_word(cx.p, cb, trial, j, b, s);
      for (std::size_t m = 0; m < cb.m2; ++m) {
        if (!cx.typical(s, u, x1, x2s[m], y))
          continue;
        const std::pair<std::size_t, std::size_t> hit{a * cb.m1b + b, m};
        if (++out.hits == 1)
          out.messages = hit;
        if (truth && hit != *truth && !out.first_wrong)
          out.first_wrong = hit;
        if (out.hits >= 2 && (!truth || out.first_wrong)) {
          out.messages.reset();
          return out;
        }
      }
    }
  }
  if (out.hits != 1)
    out.messages.reset();
  return out;
}

} // namespace

Encoded encode(const SimParams &p, const Codebook &cb, std::uint64_t trial, std::size_t m1,
               std::size_t m2, const Sequence &s) {
  const Context cx(p, cb);
  return encode_ctx(cx, trial, m1, m2, s);
}

Decoded decode(const SimParams &p, const Codebook &cb, std::uint64_t trial,
               const Sequence &y, const Sequence &s,
               std::optional<std::pair<std::size_t, std::size_t>> truth) {
  const Context cx(p, cb);
  return decode_ctx(cx, trial, y, s, truth);
}

SimResult estimate_error(const SimParams &p) {
  const auto cb = build_codebooks(p);
  const Context cx(p, cb);
  const auto &ch = p.channel;

  // 0 = correct, else 1 + index into the breakdown fields.
  std::vector<std::uint8_t> outcome(p.trials);
  const std::size_t threads = p.threads > 0 ? p.threads : default_thread_count();
  detail::parallel_for(p.trials, threads, [&](std::size_t trial) {
    std::mt19937_64 rng(splitmix(splitmix(p.seed ^ (kTagTrial << 56)) ^ trial));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Sequence s(p.n), y(p.n);
    for (auto &v : s)
      v = draw(ch.state_pmf.probs(), unif(rng));
    const std::size_t m1 = std::uniform_int_distribution<std::size_t>(0, cb.m1a * cb.m1b - 1)(rng);
    const std::size_t m2 = std::uniform_int_distribution<std::size_t>(0, cb.m2 - 1)(rng);
    const auto enc = encode_ctx(cx, trial, m1, m2, s);
    for (std::size_t t = 0; t < p.n; ++t)
      y[t] = draw(ch.kernel.row((s[t] * ch.x1_size + enc.x1[t]) * ch.x2_size + enc.x2[t]),
                  unif(rng));
    const auto dec = decode_ctx(cx, trial, y, s, std::pair{m1, m2});
    if (dec.messages && *dec.messages == std::pair{m1, m2}) {
      outcome[trial] = 0;
      return;
    }
    if (!enc.coverage_ok) {
      outcome[trial] = 1;
    } else if (!cx.typical(s, cb.u_word(enc.coop_index), enc.x1, enc.x2, y)) {
      outcome[trial] = 2;
    } else {
      const auto [w1, w2] = *dec.first_wrong;
      const bool diff_a = w1 / cb.m1b != m1 / cb.m1b, diff_b = w1 % cb.m1b != m1 % cb.m1b,
                 diff_2 = w2 != m2;
      outcome[trial] = diff_a ? 6 : diff_b && diff_2 ? 5 : diff_b ? 4 : 3;
    }
  });

  SimResult r;
  r.trials = p.trials;
  for (auto o : outcome) {
    switch (o) {
    case 1: ++r.breakdown.coverage; break;
    case 2: ++r.breakdown.atypical; break;
    case 3: ++r.breakdown.m2_only; break;
    case 4: ++r.breakdown.m1b_only; break;
    case 5: ++r.breakdown.m1b_m2; break;
    case 6: ++r.breakdown.m1a; break;
    default: break;
    }
  }
  r.errors = r.breakdown.total();
  r.error_rate = static_cast<double>(r.errors) / static_cast<double>(p.trials);
  r.ci95_halfwidth =
      1.96 * std::sqrt(r.error_rate * (1.0 - r.error_rate) / static_cast<double>(p.trials));
  r.shape = cb;
  r.shape.u_words.clear();
  return r;
}

void write_sim_csv_header(std::ostream &os) {
  os << "n,r1,r2,c12,eps,trials,error_rate,ci95,coverage_fail,confusion\n";
}

void write_sim_csv_row(std::ostream &os, const SimParams &p, const SimResult &r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%zu,%.6f,%.6f,%.6f,%.6f,%zu,%.6f,%.6f,%zu,%zu\n", p.n, p.r1,
                p.r2, p.c12, p.eps, r.trials, r.error_rate, r.ci95_halfwidth,
                r.breakdown.coverage, r.errors - r.breakdown.coverage);
  os << buf;
}

} // namespace macstate
