#include "macstate/optimizer.hpp"

#include "detail.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <random>

namespace macstate {

using detail::parallel_for;
using detail::splitmix;

namespace {

constexpr double kImprove = 1e-14;
constexpr double kPolishStep = 0.125;
constexpr int kBisections = 60;

double entropy_acc(std::span<const double> p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0)
      h -= v * std::log2(v);
  return h;
}

// Axis bits of the (S1,S2,U,V,X1,X2,Y) product.
enum : unsigned { bS1 = 1, bS2 = 2, bU = 4, bV = 8, bX1 = 16, bX2 = 32, bY = 64 };

// Dense marginalization of a product space, precompiled as one index map per
// axis subset.
class MaskedSpace {
public:
  MaskedSpace(std::vector<std::size_t> sizes, std::vector<std::vector<std::size_t>> coords)
      : sizes_(std::move(sizes)), coords_(std::move(coords)) {}

  // Registers a subset and returns its slot.
  std::size_t add(unsigned mask) {
    for (std::size_t k = 0; k < masks_.size(); ++k)
      if (masks_[k] == mask)
        return k;
    std::size_t size = 1;
    for (std::size_t a = 0; a < sizes_.size(); ++a)
      if (mask & (1u << a))
        size *= sizes_[a];
    std::vector<std::uint32_t> map(coords_.size());
    for (std::size_t c = 0; c < coords_.size(); ++c) {
      std::size_t idx = 0;
      for (std::size_t a = 0; a < sizes_.size(); ++a)
        if (mask & (1u << a))
          idx = idx * sizes_[a] + coords_[c][a];
      map[c] = static_cast<std::uint32_t>(idx);
    }
    masks_.push_back(mask);
    maps_.push_back(std::move(map));
    msize_.push_back(size);
    return masks_.size() - 1;
  }

  // Entropy of every registered subset under cell masses `p`.
  void entropies(std::span<const double> p, std::vector<double> &scratch,
                 std::vector<double> &out) const {
    out.resize(masks_.size());
    for (std::size_t k = 0; k < masks_.size(); ++k) {
      scratch.assign(msize_[k], 0.0);
      const auto &map = maps_[k];
      for (std::size_t c = 0; c < p.size(); ++c)
        scratch[map[c]] += p[c];
      out[k] = entropy_acc(scratch);
    }
  }

private:
  std::vector<std::size_t> sizes_;
  std::vector<std::vector<std::size_t>> coords_;
  std::vector<unsigned> masks_;
  std::vector<std::vector<std::uint32_t>> maps_;
  std::vector<std::size_t> msize_;
};

// I(A;B|C) = H(AC) + H(BC) - H(ABC) - H(C), as four entropy slots.
struct CmiSlots {
  std::size_t ac, bc, abc, c;
  double eval(const std::vector<double> &h) const { return h[ac] + h[bc] - h[abc] - h[c]; }
};

CmiSlots cmi_slots(MaskedSpace &sp, unsigned a, unsigned b, unsigned c) {
  return {sp.add(a | c), sp.add(b | c), sp.add(a | b | c), sp.add(c)};
}

std::size_t parse_thread_env() {
  const char *env = std::getenv("MACSTATE_THREADS");
  if (env == nullptr || *env == '\0')
    return 0;
  char *end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1)
    throw InputError(std::string("MACSTATE_THREADS must be a positive integer, got '") +
                     env + "'");
  return static_cast<std::size_t>(v);
}

} // namespace

std::size_t default_thread_count() {
  if (const auto n = parse_thread_env(); n > 0)
    return n;
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

void SearchConfig::validate() const {
  if (u_card < 1 || v_card < 1)
    throw InputError("auxiliary cardinalities must be >= 1");
  if (weight_count < 2)
    throw InputError("weight_count must be >= 2");
  if (restarts < 1)
    throw InputError("restarts must be >= 1");
  if (!(initial_step > 0.0 && initial_step <= 1.0))
    throw InputError("initial_step must lie in (0,1]");
  if (!(step_decay > 0.0 && step_decay < 1.0))
    throw InputError("step_decay must lie in (0,1)");
  if (!(tol > 0.0 && tol < initial_step))
    throw InputError("tol must lie in (0, initial_step)");
}

std::size_t cardinality_cap(const MacChannel &ch, CoopMode) {
  const std::size_t s = ch.s1_size * ch.s2_size;
  return std::min(ch.x1_size * ch.x2_size * s + 3, ch.y_size * s + 4);
}

std::vector<double> sweep_angles(std::size_t count) {
  if (count < 2)
    throw InputError("need at least two directions");
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k)
    out[k] = std::numbers::pi / 4.0 *
             (1.0 - std::cos(std::numbers::pi * static_cast<double>(k) /
                             static_cast<double>(count - 1)));
  out.front() = 0.0;
  out.back() = std::numbers::pi / 2.0;
  return out;
}

std::size_t PentagonModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto &b : blocks)
    n += b.rows * b.width;
  return n;
}

// ---------------------------------------------------------------------------
// Coordinate ascent

namespace {

void normalize_rows(const PentagonModel &m, std::span<double> th) {
  std::size_t off = 0;
  for (const auto &b : m.blocks)
    for (std::size_t r = 0; r < b.rows; ++r, off += b.width) {
      double s = 0.0;
      for (std::size_t i = 0; i < b.width; ++i) {
        th[off + i] = std::max(0.0, th[off + i]);
        s += th[off + i];
      }
      for (std::size_t i = 0; i < b.width; ++i)
        th[off + i] = s > 0.0 ? th[off + i] / s : 1.0 / static_cast<double>(b.width);
    }
}

void random_rows(const PentagonModel &m, std::span<double> th, std::mt19937_64 &rng,
                 double alpha) {
  std::gamma_distribution<double> g(alpha, 1.0);
  for (auto &v : th)
    v = g(rng) + 1e-300;
  normalize_rows(m, th);
}

struct Evaluated {
  double value;
  Pentagon pentagon;
};

Evaluated score(const PentagonModel &m, std::span<const double> th, double mu1,
                double mu2) {
  const auto p = m.pentagon(th);
  if (!p.feasible)
    return {-std::numeric_limits<double>::infinity(), p};
  return {p.support(mu1, mu2), p};
}

} // namespace

namespace {

SearchOutcome ascend(const PentagonModel &model, double mu1, double mu2, const SearchConfig &cfg,
                     std::vector<double> th, double step, std::mt19937_64 &rng) {
  const std::size_t n = th.size();
  model.repair(th);
  auto cur = score(model, th, mu1, mu2);

  std::vector<double> cand(n), start(n), noise(n);
  auto try_cand = [&](bool repaired = false) {
    if (!repaired)
      model.repair(cand);
    const auto e = score(model, cand, mu1, mu2);
    if (e.value > cur.value + kImprove) {
      th.swap(cand);
      cur = e;
      return true;
    }
    return false;
  };

  for (std::size_t it = 0; it < cfg.local_steps; ++it) {
    bool improved = false;
    start = th;
    std::size_t off = 0;
    for (const auto &b : model.blocks) {
      for (std::size_t r = 0; r < b.rows; ++r, off += b.width) {
        if (b.width < 2)
          continue;
        for (std::size_t i = 0; i < b.width; ++i)
          for (std::size_t j = 0; j < b.width; ++j) {
            if (i == j)
              continue;
            const double m = std::min(step, th[off + i]);
            if (m <= 0.0)
              continue;
            cand = th;
            cand[off + i] -= m;
            cand[off + j] += m;
            improved |= try_cand();
          }
      }
    }
    if (improved) {
      // Extrapolate along the sweep's net displacement.
      for (std::size_t k = 0; k < n; ++k)
        cand[k] = 2.0 * th[k] - start[k];
      normalize_rows(model, cand);
      try_cand();
    }
    // Joint random perturbation of every row.
    random_rows(model, noise, rng, 1.0);
    for (std::size_t k = 0; k < n; ++k)
      cand[k] = (1.0 - step) * th[k] + step * noise[k];
    improved |= try_cand();

    if (!improved) {
      step *= cfg.step_decay;
      if (step < cfg.tol)
        break;
    }
  }
  normalize_rows(model, th);
  model.repair(th);
  cur = score(model, th, mu1, mu2);
  return {std::move(th), cur.value, cur.pentagon};
}

} // namespace

SearchOutcome coordinate_ascent(const PentagonModel &model, double mu1, double mu2,
                                const SearchConfig &cfg, std::size_t restart,
                                std::uint64_t stream) {
  std::mt19937_64 rng(splitmix(stream));
  std::vector<double> th(model.parameter_count());
  if (restart == 0)
    random_rows(model, th, rng, 1e6); // essentially uniform, ties broken
  else
    random_rows(model, th, rng, restart % 2 == 1 ? 1.0 : 0.4);
  return ascend(model, mu1, mu2, cfg, std::move(th), cfg.initial_step, rng);
}

namespace {

bool better(const SearchOutcome &a, const SearchOutcome &b) {
  if (a.value != b.value)
    return a.value > b.value;
  return std::lexicographical_compare(a.params.begin(), a.params.end(), b.params.begin(),
                                      b.params.end());
}

std::uint64_t unit_stream(std::uint64_t seed, std::size_t dir, std::size_t restart) {
  return splitmix(splitmix(seed) ^ (static_cast<std::uint64_t>(dir) << 32) ^
                  static_cast<std::uint64_t>(restart));
}

DirectionTrace reduce_runs(double mu1, double mu2, std::span<const SearchOutcome> runs) {
  DirectionTrace d{mu1, mu2, runs.front(), 0.0};
  double worst = runs.front().value;
  for (const auto &r : runs.subspan(1)) {
    if (better(r, d.best))
      d.best = r;
    worst = std::min(worst, r.value);
  }
  d.restart_spread = d.best.value - worst;
  return d;
}

} // namespace

ModelTrace trace_model(const PentagonModel &model, const SearchConfig &cfg) {
  cfg.validate();
  const auto angles = sweep_angles(cfg.weight_count);
  const std::size_t R = cfg.restarts, units = angles.size() * R;
  const std::size_t threads = cfg.threads > 0 ? cfg.threads : default_thread_count();
  ModelTrace out;
  out.all.resize(units);
  parallel_for(units, threads, [&](std::size_t i) {
    const std::size_t d = i / R, r = i % R;
    out.all[i] = coordinate_ascent(model, std::cos(angles[d]), std::sin(angles[d]), cfg,
                                   r, unit_stream(cfg.seed, d, r));
  });

  // Polish: each direction restarts once more from the best point any
  // direction found for its objective, with a short step.
  const std::size_t D = angles.size();
  std::vector<SearchOutcome> polished(D);
  parallel_for(D, threads, [&](std::size_t d) {
    const double mu1 = std::cos(angles[d]), mu2 = std::sin(angles[d]);
    std::size_t from = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < units; ++i) {
      const auto &p = out.all[i].pentagon;
      const double v = p.feasible ? p.support(mu1, mu2) : -1.0;
      if (v > best) {
        best = v;
        from = i;
      }
    }
    std::mt19937_64 rng(splitmix(unit_stream(cfg.seed, d, R)));
    polished[d] = ascend(model, mu1, mu2, cfg, out.all[from].params,
                         cfg.initial_step * kPolishStep, rng);
  });
  std::vector<SearchOutcome> runs;
  for (std::size_t d = 0; d < D; ++d) {
    runs.assign(out.all.begin() + d * R, out.all.begin() + (d + 1) * R);
    runs.push_back(polished[d]);
    out.directions.push_back(reduce_runs(std::cos(angles[d]), std::sin(angles[d]), runs));
  }
  for (auto &p : polished)
    out.all.push_back(std::move(p));
  return out;
}

// ---------------------------------------------------------------------------
// Compiled policy model

struct PolicyModel::Impl {
  MacChannel ch;
  CoopConfig coop;
  InputConstraint constr;
  CoopMode mode;
  std::size_t nu = 1, nv = 1;
  // Block offsets in the parameter vector: U, V, X1, X2.
  std::size_t off_u = 0, off_v = 0, off_x1 = 0, off_x2 = 0;
  std::size_t rows_u = 1, rows_v = 1, rows_x1 = 1, rows_x2 = 1;

  // Full product, nonzero channel cells only.
  struct Cell {
    double c;
    std::uint32_t iu, iv, ix1, ix2;
  };
  std::vector<Cell> cells;
  MaskedSpace full{{}, {}};
  CmiSlots t_coop_u{}, t_coop_v{}, t_r1{}, t_r2{}, t_sum{}, t_outer{};

  // Upstream product (S1,S2,U,V): used by the repair steps.
  struct Up {
    double c;
    std::uint32_t iu, iv, row_x1, row_x2;
    std::uint32_t s1, s2, u;
  };
  std::vector<Up> up;
  MaskedSpace upspace{{}, {}};
  CmiSlots u_coop_u{}, u_coop_v{};

  std::size_t u_row(std::size_t s1) const {
    return mode == CoopMode::message_only ? 0 : s1;
  }
  std::size_t v_row(std::size_t s2, std::size_t u) const {
    return mode == CoopMode::two_way ? s2 * nu + u : 0;
  }
  std::size_t x1_row(std::size_t s1, std::size_t u, std::size_t v) const {
    return (s1 * nu + u) * nv + v;
  }
  std::size_t x2_row(std::size_t s2, std::size_t u, std::size_t v) const {
    if (mode == CoopMode::two_way)
      return (s2 * nu + u) * nv + v;
    return u * nv + v;
  }

  void compile();
  double coop_u_of(std::span<const double> th) const;
  double coop_v_of(std::span<const double> th) const;
  void upstream(std::span<const double> th, std::vector<double> &q) const;
  void repair(std::span<double> th) const;
  Pentagon pentagon(std::span<const double> th) const;
  AuxPolicy policy(std::span<const double> th) const;
};

void PolicyModel::Impl::compile() {
  const std::size_t S1 = ch.s1_size, S2 = ch.s2_size, X1 = ch.x1_size, X2 = ch.x2_size,
                    Y = ch.y_size;
  const bool has_v = mode == CoopMode::two_way || mode == CoopMode::split;
  nv = has_v ? nv : 1;
  rows_u = mode == CoopMode::message_only ? 1 : S1;
  rows_v = mode == CoopMode::two_way ? S2 * nu : 1;
  rows_x1 = S1 * nu * nv;
  rows_x2 = mode == CoopMode::two_way ? S2 * nu * nv : nu * nv;
  off_u = 0;
  off_v = off_u + rows_u * nu;
  off_x1 = off_v + rows_v * nv;
  off_x2 = off_x1 + rows_x1 * X1;

  std::vector<std::vector<std::size_t>> coords, upcoords;
  for (std::size_t s1 = 0; s1 < S1; ++s1)
    for (std::size_t s2 = 0; s2 < S2; ++s2) {
      const double ps = ch.state_pmf[s1 * S2 + s2];
      if (ps == 0.0)
        continue;
      for (std::size_t u = 0; u < nu; ++u)
        for (std::size_t v = 0; v < nv; ++v) {
          const auto iu = off_u + u_row(s1) * nu + u;
          const auto iv = off_v + v_row(s2, u) * nv + v;
          up.push_back({ps, static_cast<std::uint32_t>(iu), static_cast<std::uint32_t>(iv),
                        static_cast<std::uint32_t>(x1_row(s1, u, v)),
                        static_cast<std::uint32_t>(x2_row(s2, u, v)),
                        static_cast<std::uint32_t>(s1), static_cast<std::uint32_t>(s2),
                        static_cast<std::uint32_t>(u)});
          upcoords.push_back({s1, s2, u, v});
          for (std::size_t a = 0; a < X1; ++a)
            for (std::size_t b = 0; b < X2; ++b) {
              const auto krow = ch.kernel.row(((s1 * S2 + s2) * X1 + a) * X2 + b);
              for (std::size_t y = 0; y < Y; ++y) {
                if (krow[y] == 0.0)
                  continue;
                cells.push_back(
                    {ps * krow[y], static_cast<std::uint32_t>(iu),
                     static_cast<std::uint32_t>(iv),
                     static_cast<std::uint32_t>(off_x1 + x1_row(s1, u, v) * X1 + a),
                     static_cast<std::uint32_t>(off_x2 + x2_row(s2, u, v) * X2 + b)});
                coords.push_back({s1, s2, u, v, a, b, y});
              }
            }
        }
    }

  full = MaskedSpace({S1, S2, nu, nv, X1, X2, Y}, std::move(coords));
  const unsigned S = bS1 | bS2, A = bU | bV;
  if (mode == CoopMode::two_way) {
    t_coop_u = cmi_slots(full, bU, bS1, bS2);
    t_coop_v = cmi_slots(full, bV, bS2, bS1 | bU);
  } else {
    t_coop_u = cmi_slots(full, bU, S, 0);
  }
  t_r1 = cmi_slots(full, bX1, bY, bX2 | S | A);
  t_r2 = cmi_slots(full, bX2, bY, bX1 | S | A);
  t_sum = cmi_slots(full, bX1 | bX2, bY, S | A);
  t_outer = cmi_slots(full, bX1 | bX2, bY, mode == CoopMode::split ? S | bU : S);

  upspace = MaskedSpace({S1, S2, nu, nv}, std::move(upcoords));
  if (mode == CoopMode::two_way) {
    u_coop_u = cmi_slots(upspace, bU, bS1, bS2);
    u_coop_v = cmi_slots(upspace, bV, bS2, bS1 | bU);
  } else {
    u_coop_u = cmi_slots(upspace, bU, S, 0);
  }
}

void PolicyModel::Impl::upstream(std::span<const double> th, std::vector<double> &q) const {
  q.resize(up.size());
  for (std::size_t k = 0; k < up.size(); ++k)
    q[k] = up[k].c * th[up[k].iu] * th[up[k].iv];
}

double PolicyModel::Impl::coop_u_of(std::span<const double> th) const {
  thread_local std::vector<double> q, scratch, h;
  upstream(th, q);
  upspace.entropies(q, scratch, h);
  return std::max(0.0, u_coop_u.eval(h));
}

double PolicyModel::Impl::coop_v_of(std::span<const double> th) const {
  thread_local std::vector<double> q, scratch, h;
  upstream(th, q);
  upspace.entropies(q, scratch, h);
  return std::max(0.0, u_coop_v.eval(h));
}

namespace {

// Shrinks rows toward targets until f() <= budget. f is convex along the
// segment and vanishes at the target, hence monotone on it.
template <typename F>
void shrink_to_budget(std::span<double> th, std::span<const double> orig,
                      std::span<const double> target, double budget, F f) {
  auto mix = [&](double lam) {
    for (std::size_t k = 0; k < orig.size(); ++k)
      th[k] = (1.0 - lam) * orig[k] + lam * target[k];
  };
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < kBisections; ++i) {
    const double mid = 0.5 * (lo + hi);
    mix(mid);
    if (f() <= budget)
      hi = mid;
    else
      lo = mid;
  }
  mix(hi);
}

} // namespace

void PolicyModel::Impl::repair(std::span<double> th) const {
  const double budget_u =
      mode == CoopMode::split ? coop.c12s : mode == CoopMode::message_only ? 1e300 : coop.c12;
  thread_local std::vector<double> q, orig, target;

  if (mode != CoopMode::message_only && coop_u_of(th) > budget_u) {
    // Target: every U row equal to the U marginal.
    std::vector<double> pu(nu, 0.0);
    for (std::size_t s1 = 0; s1 < ch.s1_size; ++s1) {
      double ps = 0.0;
      for (std::size_t s2 = 0; s2 < ch.s2_size; ++s2)
        ps += ch.state_pmf[s1 * ch.s2_size + s2];
      for (std::size_t u = 0; u < nu; ++u)
        pu[u] += ps * th[off_u + s1 * nu + u];
    }
    const auto block = th.subspan(off_u, rows_u * nu);
    orig.assign(block.begin(), block.end());
    target.resize(orig.size());
    for (std::size_t r = 0; r < rows_u; ++r)
      for (std::size_t u = 0; u < nu; ++u)
        target[r * nu + u] = pu[u];
    shrink_to_budget(block, orig, target, budget_u, [&] { return coop_u_of(th); });
  }

  if (mode == CoopMode::two_way && coop_v_of(th) > coop.c21) {
    // Target: V row for (s2,u) replaced by P(v|u).
    upstream(th, q);
    std::vector<double> puv(nu * nv, 0.0), pu(nu, 0.0);
    for (std::size_t k = 0; k < up.size(); ++k) {
      puv[up[k].u * nv + (up[k].iv - off_v) % nv] += q[k];
      pu[up[k].u] += q[k];
    }
    const auto block = th.subspan(off_v, rows_v * nv);
    orig.assign(block.begin(), block.end());
    target.resize(orig.size());
    for (std::size_t s2 = 0; s2 < ch.s2_size; ++s2)
      for (std::size_t u = 0; u < nu; ++u)
        for (std::size_t v = 0; v < nv; ++v)
          target[(s2 * nu + u) * nv + v] =
              pu[u] > 0.0 ? puv[u * nv + v] / pu[u] : 1.0 / static_cast<double>(nv);
    shrink_to_budget(block, orig, target, coop.c21, [&] { return coop_v_of(th); });
  }

  // Weight caps: scale P(x=1|.) down uniformly across rows.
  auto cap = [&](bool active, double p, std::size_t off, std::size_t rows, bool first) {
    if (!active)
      return;
    upstream(th, q);
    std::vector<double> mass(rows, 0.0);
    for (std::size_t k = 0; k < up.size(); ++k)
      mass[first ? up[k].row_x1 : up[k].row_x2] += q[k];
    double w = 0.0;
    for (std::size_t r = 0; r < rows; ++r)
      w += mass[r] * th[off + 2 * r + 1];
    if (w <= p)
      return;
    const double f = p / w;
    for (std::size_t r = 0; r < rows; ++r) {
      th[off + 2 * r + 1] *= f;
      th[off + 2 * r] = 1.0 - th[off + 2 * r + 1];
    }
  };
  cap(constr.active1, constr.p1, off_x1, rows_x1, true);
  cap(constr.active2, constr.p2, off_x2, rows_x2, false);
}

Pentagon PolicyModel::Impl::pentagon(std::span<const double> th) const {
  thread_local std::vector<double> p, scratch, h;
  p.resize(cells.size());
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const auto &c = cells[k];
    p[k] = c.c * th[c.iu] * th[c.iv] * th[c.ix1] * th[c.ix2];
  }
  full.entropies(p, scratch, h);
  RegionTerms t;
  t.coop_u = std::max(0.0, t_coop_u.eval(h));
  t.coop_v = mode == CoopMode::two_way ? std::max(0.0, t_coop_v.eval(h)) : 0.0;
  t.r1 = std::max(0.0, t_r1.eval(h));
  t.r2 = std::max(0.0, t_r2.eval(h));
  t.sum_aux = std::max(0.0, t_sum.eval(h));
  t.sum_outer = std::max(0.0, t_outer.eval(h));
  if (mode == CoopMode::message_only)
    t.coop_u = 0.0;
  return pentagon_from_terms(t, coop);
}

AuxPolicy PolicyModel::Impl::policy(std::span<const double> th) const {
  const auto layout = policy_layout(mode);
  auto size_of = [&](const std::string &a) -> std::size_t {
    if (a == axis::S1)
      return ch.s1_size;
    if (a == axis::S2)
      return ch.s2_size;
    if (a == axis::U)
      return nu;
    if (a == axis::V)
      return nv;
    throw InputError("unexpected parent axis " + a);
  };
  auto factor = [&](const std::string &name, const std::vector<std::string> &parents,
                    std::size_t off, std::size_t rows, std::size_t width) {
    std::vector<std::size_t> ps;
    for (const auto &p : parents)
      ps.push_back(size_of(p));
    std::vector<double> tab(th.begin() + static_cast<std::ptrdiff_t>(off),
                            th.begin() + static_cast<std::ptrdiff_t>(off + rows * width));
    for (std::size_t r = 0; r < rows; ++r) {
      double s = 0.0;
      for (std::size_t i = 0; i < width; ++i)
        s += tab[r * width + i];
      for (std::size_t i = 0; i < width; ++i)
        tab[r * width + i] /= s;
    }
    return Factor{name, CondPmf(std::move(ps), width, std::move(tab)), parents};
  };
  AuxPolicy pol;
  pol.mode = mode;
  pol.u_given = factor(axis::U, layout.u_parents, off_u, rows_u, nu);
  if (layout.v_parents)
    pol.v_given = factor(axis::V, *layout.v_parents, off_v, rows_v, nv);
  pol.x1_given = factor(axis::X1, layout.x1_parents, off_x1, rows_x1, ch.x1_size);
  pol.x2_given = factor(axis::X2, layout.x2_parents, off_x2, rows_x2, ch.x2_size);
  return pol;
}

PolicyModel::PolicyModel(const MacChannel &ch, const CoopConfig &coop,
                         const InputConstraint &constr, const SearchConfig &cfg) {
  validate_channel(ch);
  coop.validate();
  constr.validate();
  cfg.validate();
  if (coop.mode != CoopMode::two_way && ch.s2_size != 1)
    throw InputError(std::string(to_string(coop.mode)) + " needs |S2| = 1");
  if ((constr.active1 && ch.x1_size != 2) || (constr.active2 && ch.x2_size != 2))
    throw InputError("weight constraints need binary inputs");
  const auto cap = cardinality_cap(ch, coop.mode);
  const bool has_v = coop.mode == CoopMode::two_way || coop.mode == CoopMode::split;
  if (cfg.u_card > cap || (has_v && cfg.v_card > cap))
    throw InputError("auxiliary cardinality exceeds the bound " + std::to_string(cap));

  auto impl = std::make_shared<Impl>();
  impl->ch = ch;
  impl->coop = coop;
  impl->constr = constr;
  impl->mode = coop.mode;
  impl->nu = cfg.u_card;
  impl->nv = cfg.v_card;
  impl->compile();
  impl_ = impl;

  const auto *p = impl.get();
  model_.blocks = {{p->rows_u, p->nu},
                   {p->rows_v, p->nv},
                   {p->rows_x1, ch.x1_size},
                   {p->rows_x2, ch.x2_size}};
  model_.repair = [impl](std::span<double> th) { impl->repair(th); };
  model_.pentagon = [impl](std::span<const double> th) { return impl->pentagon(th); };
}

AuxPolicy PolicyModel::to_policy(std::span<const double> params) const {
  return impl_->policy(params);
}

// ---------------------------------------------------------------------------
// Public drivers

WeightedResult optimize_weighted(const MacChannel &ch, const CoopConfig &coop,
                                 const InputConstraint &constr, double mu1, double mu2,
                                 const SearchConfig &cfg) {
  if (!(mu1 >= 0.0 && mu2 >= 0.0 && mu1 + mu2 > 0.0))
    throw InputError("weights must be nonnegative and not both zero");
  PolicyModel pm(ch, coop, constr, cfg);
  std::vector<SearchOutcome> runs(cfg.restarts);
  const std::size_t threads = cfg.threads > 0 ? cfg.threads : default_thread_count();
  parallel_for(cfg.restarts, threads, [&](std::size_t r) {
    runs[r] = coordinate_ascent(pm.model(), mu1, mu2, cfg, r, unit_stream(cfg.seed, 0, r));
  });
  const auto d = reduce_runs(mu1, mu2, runs);
  WeightedResult out;
  out.feasible = d.best.pentagon.feasible;
  if (!out.feasible)
    return out;
  out.value = d.best.value;
  out.policy = pm.to_policy(d.best.params);
  out.pentagon = pentagon_for(assemble_joint(ch, out.policy), coop);
  return out;
}

BoundaryResult trace_boundary(const MacChannel &ch, const CoopConfig &coop,
                              const InputConstraint &constr, const SearchConfig &cfg) {
  PolicyModel pm(ch, coop, constr, cfg);
  auto mt = trace_model(pm.model(), cfg);
  std::vector<Pentagon> pents;
  pents.reserve(mt.all.size());
  for (const auto &o : mt.all)
    pents.push_back(o.pentagon);
  auto hull = hull_union_traced(pents);
  BoundaryResult out;
  out.region = std::move(hull.region);
  for (std::size_t k = 0; k < out.region.frontier.size(); ++k) {
    Witness w;
    w.vertex = out.region.frontier[k];
    w.policy = pm.to_policy(mt.all[hull.source[k]].params);
    w.pentagon = pentagon_for(assemble_joint(ch, w.policy), coop);
    out.witnesses.push_back(std::move(w));
  }
  out.diagnostics = std::move(mt.directions);
  return out;
}

EqualRateResult max_equal_rate(const BoundaryResult &traced) {
  EqualRateResult out;
  const auto &f = traced.region.frontier;
  if (f.empty())
    return out;
  out.rate = traced.region.max_equal_rate();
  const RatePoint target{out.rate, out.rate};
  for (const auto &w : traced.witnesses)
    if (w.pentagon.contains(target, 1e-9)) {
      out.policy = w.policy;
      return out;
    }
  for (std::size_t k = 0; k + 1 < f.size(); ++k) {
    const double fp = f[k].r2 - f[k].r1, fq = f[k + 1].r2 - f[k + 1].r1;
    if (fp >= 0.0 && fq <= 0.0) {
      out.policy = traced.witnesses[k].policy;
      out.partner = traced.witnesses[k + 1].policy;
      out.share = fp == fq ? 0.0 : fp / (fp - fq);
      return out;
    }
  }
  return out;
}

EqualRateResult max_equal_rate(const MacChannel &ch, const CoopConfig &coop,
                               const InputConstraint &constr, const SearchConfig &cfg) {
  return max_equal_rate(trace_boundary(ch, coop, constr, cfg));
}

} // namespace macstate
