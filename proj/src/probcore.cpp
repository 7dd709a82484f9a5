#include "macstate/probcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

namespace macstate {

namespace {

void check_row(std::span<const double> row, double tol, const char *what) {
  double sum = 0.0;
  for (double v : row) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw InputError(std::string(what) + ": negative or non-finite entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > tol) {
    std::ostringstream os;
    os << what << ": entries sum to " << sum << ", expected 1";
    throw InputError(os.str());
  }
}

std::size_t product(std::span<const std::size_t> sizes) {
  return std::accumulate(sizes.begin(), sizes.end(), std::size_t{1},
                         std::multiplies<>());
}

// Positions of `names` inside `j`, validated against duplicates.
std::vector<std::size_t> positions(const JointPmf &j,
                                   const std::vector<std::string> &names) {
  std::vector<std::size_t> pos;
  pos.reserve(names.size());
  for (const auto &n : names) {
    std::size_t p = j.axis_index(n);
    if (std::find(pos.begin(), pos.end(), p) != pos.end())
      throw InputError("axis listed twice: " + n);
    pos.push_back(p);
  }
  return pos;
}

struct Projection {
  std::vector<double> marginal;
  std::vector<std::size_t> cell_to_marginal;
};

// Marginal over the axes at `pos` (in that order) plus the cell map.
Projection project(const JointPmf &j, std::span<const std::size_t> pos) {
  const auto &axes = j.axes();
  std::vector<std::size_t> msize(pos.size());
  for (std::size_t k = 0; k < pos.size(); ++k)
    msize[k] = axes[pos[k]].size;
  std::vector<std::size_t> mstride(pos.size(), 1);
  for (std::size_t k = pos.size(); k-- > 1;)
    mstride[k - 1] = mstride[k] * msize[k];

  Projection out;
  out.marginal.assign(product(msize), 0.0);
  out.cell_to_marginal.resize(j.cell_count());

  std::vector<std::size_t> coord(axes.size(), 0);
  auto probs = j.probs();
  for (std::size_t cell = 0; cell < probs.size(); ++cell) {
    std::size_t m = 0;
    for (std::size_t k = 0; k < pos.size(); ++k)
      m += coord[pos[k]] * mstride[k];
    out.cell_to_marginal[cell] = m;
    out.marginal[m] += probs[cell];
    for (std::size_t a = axes.size(); a-- > 0;) {
      if (++coord[a] < axes[a].size)
        break;
      coord[a] = 0;
    }
  }
  return out;
}

} // namespace

Alphabet::Alphabet(std::size_t size) : size_(size) {
  if (size == 0)
    throw InputError("alphabet size must be at least 1");
}

Pmf::Pmf(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty())
    throw InputError("pmf over an empty alphabet");
  check_row(probs_, kPmfTolerance, "pmf");
}

Pmf Pmf::uniform(std::size_t size) {
  Alphabet a(size);
  return Pmf(std::vector<double>(a.size(), 1.0 / static_cast<double>(a.size())));
}

Pmf Pmf::point_mass(std::size_t size, std::size_t letter) {
  if (letter >= size)
    throw InputError("point mass letter outside alphabet");
  std::vector<double> p(size, 0.0);
  p[letter] = 1.0;
  return Pmf(std::move(p));
}

CondPmf::CondPmf(std::vector<std::size_t> parent_sizes, std::size_t out_size,
                 std::vector<double> table)
    : parent_sizes_(std::move(parent_sizes)), out_size_(out_size),
      table_(std::move(table)) {
  Alphabet{out_size_};
  for (std::size_t s : parent_sizes_)
    Alphabet{s};
  if (table_.size() != product(parent_sizes_) * out_size_)
    throw InputError("conditional table has wrong number of entries");
  for (std::size_t r = 0; r < row_count(); ++r) {
    std::string what = "conditional row " + std::to_string(r);
    check_row(row(r), kPmfTolerance, what.c_str());
  }
}

CondPmf CondPmf::from_pmf(const Pmf &p) {
  return CondPmf({}, p.size(), {p.probs().begin(), p.probs().end()});
}

std::size_t CondPmf::row_index(std::span<const std::size_t> parents) const {
  if (parents.size() != parent_sizes_.size())
    throw InputError("wrong number of parent letters");
  std::size_t r = 0;
  for (std::size_t k = 0; k < parents.size(); ++k) {
    if (parents[k] >= parent_sizes_[k])
      throw InputError("parent letter outside alphabet");
    r = r * parent_sizes_[k] + parents[k];
  }
  return r;
}

JointPmf::JointPmf(std::vector<Axis> axes, std::vector<double> probs)
    : axes_(std::move(axes)), probs_(std::move(probs)) {
  std::set<std::string> names;
  std::vector<std::size_t> sizes;
  for (const auto &a : axes_) {
    Alphabet{a.size};
    if (!names.insert(a.name).second)
      throw InputError("duplicate axis name: " + a.name);
    sizes.push_back(a.size);
  }
  if (probs_.size() != product(sizes))
    throw InputError("joint table size does not match axes");
  strides_.assign(axes_.size(), 1);
  for (std::size_t k = axes_.size(); k-- > 1;)
    strides_[k - 1] = strides_[k] * axes_[k].size;
  check_row(probs_, kJointTolerance, "joint");
}

bool JointPmf::has_axis(const std::string &name) const {
  return std::any_of(axes_.begin(), axes_.end(),
                     [&](const Axis &a) { return a.name == name; });
}

std::size_t JointPmf::axis_index(const std::string &name) const {
  for (std::size_t k = 0; k < axes_.size(); ++k)
    if (axes_[k].name == name)
      return k;
  throw InputError("unknown axis: " + name);
}

std::vector<std::size_t> JointPmf::coordinates(std::size_t cell) const {
  std::vector<std::size_t> c(axes_.size());
  for (std::size_t k = 0; k < axes_.size(); ++k) {
    c[k] = cell / strides_[k];
    cell %= strides_[k];
  }
  return c;
}

double JointPmf::at(std::span<const std::size_t> letters) const {
  if (letters.size() != axes_.size())
    throw InputError("wrong number of letters for joint lookup");
  std::size_t cell = 0;
  for (std::size_t k = 0; k < letters.size(); ++k) {
    if (letters[k] >= axes_[k].size)
      throw InputError("letter outside alphabet of axis " + axes_[k].name);
    cell += letters[k] * strides_[k];
  }
  return probs_[cell];
}

double entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs)
    if (p > 0.0)
      h -= p * std::log2(p);
  return h;
}

double entropy(const Pmf &p) { return entropy(p.probs()); }

double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0))
    throw InputError("binary entropy argument outside [0,1]");
  const double q[2] = {p, 1.0 - p};
  return entropy(std::span<const double>(q, 2));
}

double bernoulli_convolve(double p, double q) {
  if (!(p >= 0.0 && p <= 1.0) || !(q >= 0.0 && q <= 1.0))
    throw InputError("bernoulli parameter outside [0,1]");
  return (1.0 - p) * q + (1.0 - q) * p;
}

JointPmf joint_from_factors(const std::vector<Factor> &factors) {
  if (factors.empty())
    throw InputError("joint_from_factors needs at least one factor");

  std::vector<Axis> axes;
  auto find_axis = [&](const std::string &n) -> std::size_t {
    for (std::size_t k = 0; k < axes.size(); ++k)
      if (axes[k].name == n)
        return k;
    return axes.size();
  };
  std::vector<std::vector<std::size_t>> parent_pos(factors.size());
  for (std::size_t f = 0; f < factors.size(); ++f) {
    const auto &fac = factors[f];
    if (fac.parents.size() != fac.table.parent_sizes().size())
      throw InputError("factor " + fac.axis + ": parent count mismatch");
    for (std::size_t k = 0; k < fac.parents.size(); ++k) {
      std::size_t p = find_axis(fac.parents[k]);
      if (p == axes.size())
        throw InputError("factor " + fac.axis + ": dangling parent axis " +
                         fac.parents[k]);
      if (axes[p].size != fac.table.parent_sizes()[k])
        throw InputError("factor " + fac.axis + ": size mismatch on parent " +
                         fac.parents[k]);
      parent_pos[f].push_back(p);
    }
    if (find_axis(fac.axis) != axes.size())
      throw InputError("axis defined twice: " + fac.axis);
    axes.push_back({fac.axis, fac.table.out_size()});
  }

  std::vector<std::size_t> sizes;
  for (const auto &a : axes)
    sizes.push_back(a.size);
  std::vector<double> probs(product(sizes), 0.0);
  std::vector<std::size_t> coord(axes.size(), 0);
  for (double &cell : probs) {
    double p = 1.0;
    for (std::size_t f = 0; f < factors.size() && p > 0.0; ++f) {
      const auto &tab = factors[f].table;
      std::size_t r = 0;
      for (std::size_t k = 0; k < parent_pos[f].size(); ++k)
        r = r * tab.parent_sizes()[k] + coord[parent_pos[f][k]];
      p *= tab.row(r)[coord[f]];
    }
    cell = p;
    for (std::size_t a = axes.size(); a-- > 0;) {
      if (++coord[a] < axes[a].size)
        break;
      coord[a] = 0;
    }
  }
  return JointPmf(std::move(axes), std::move(probs));
}

JointPmf marginalize(const JointPmf &j, const std::vector<std::string> &keep) {
  auto pos = positions(j, keep);
  std::sort(pos.begin(), pos.end());
  std::vector<Axis> axes;
  for (std::size_t p : pos)
    axes.push_back(j.axes()[p]);
  if (axes.empty())
    return JointPmf({}, {1.0});
  return JointPmf(std::move(axes), project(j, pos).marginal);
}

CondPmf conditional(const JointPmf &j, const std::string &out,
                    const std::vector<std::string> &given) {
  std::vector<std::string> names = given;
  names.push_back(out);
  auto pos = positions(j, names);
  auto m = project(j, pos).marginal;
  std::vector<std::size_t> parent_sizes;
  for (std::size_t k = 0; k + 1 < pos.size(); ++k)
    parent_sizes.push_back(j.axes()[pos[k]].size);
  const std::size_t w = j.axes()[pos.back()].size;
  for (std::size_t r = 0; r < m.size() / w; ++r) {
    double mass = 0.0;
    for (std::size_t x = 0; x < w; ++x)
      mass += m[r * w + x];
    for (std::size_t x = 0; x < w; ++x)
      m[r * w + x] = mass > 0.0 ? m[r * w + x] / mass : 1.0 / static_cast<double>(w);
    // renormalize away rounding so the row passes validation
    double s = 0.0;
    for (std::size_t x = 0; x < w; ++x)
      s += m[r * w + x];
    for (std::size_t x = 0; x < w; ++x)
      m[r * w + x] /= s;
  }
  return CondPmf(std::move(parent_sizes), w, std::move(m));
}

double entropy_of(const JointPmf &j, const std::vector<std::string> &axes) {
  auto pos = positions(j, axes);
  return entropy(project(j, pos).marginal);
}

double conditional_mutual_information(const JointPmf &j,
                                      const std::vector<std::string> &a,
                                      const std::vector<std::string> &b,
                                      const std::vector<std::string> &c) {
  auto pa = positions(j, a);
  auto pb = positions(j, b);
  auto pc = positions(j, c);
  std::vector<std::size_t> all;
  all.insert(all.end(), pa.begin(), pa.end());
  all.insert(all.end(), pb.begin(), pb.end());
  all.insert(all.end(), pc.begin(), pc.end());
  std::vector<std::size_t> sorted = all;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw InputError("conditional mutual information: axis sets overlap");
  if (pa.empty() || pb.empty())
    throw InputError("conditional mutual information: empty variable set");

  std::vector<std::size_t> pac = pa, pbc = pb;
  pac.insert(pac.end(), pc.begin(), pc.end());
  pbc.insert(pbc.end(), pc.begin(), pc.end());
  const auto abc = project(j, all);
  const auto ac = project(j, pac);
  const auto bc = project(j, pbc);
  const auto cc = project(j, pc);

  // Each abc-marginal cell maps to one ac/bc/c cell; take any joint cell
  // that lands on it to read the mapping.
  std::vector<std::size_t> rep(abc.marginal.size(), j.cell_count());
  for (std::size_t cell = 0; cell < j.cell_count(); ++cell)
    if (rep[abc.cell_to_marginal[cell]] == j.cell_count())
      rep[abc.cell_to_marginal[cell]] = cell;

  double info = 0.0;
  for (std::size_t m = 0; m < abc.marginal.size(); ++m) {
    const double p = abc.marginal[m];
    if (p <= 0.0)
      continue;
    const std::size_t cell = rep[m];
    const double pac_ = ac.marginal[ac.cell_to_marginal[cell]];
    const double pbc_ = bc.marginal[bc.cell_to_marginal[cell]];
    const double pc_ = cc.marginal[cc.cell_to_marginal[cell]];
    info += p * std::log2(p * pc_ / (pac_ * pbc_));
  }
  return info;
}

} // namespace macstate
