#include "macstate/channel_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace macstate {

using nlohmann::json;

namespace {

template <typename T> T field(const json &doc, const char *name) {
  if (!doc.contains(name))
    throw InputError(std::string("channel spec: missing field '") + name + "'");
  try {
    return doc.at(name).get<T>();
  } catch (const json::exception &) {
    throw InputError(std::string("channel spec: field '") + name +
                     "' has the wrong type");
  }
}

std::size_t size_field(const json &doc, const char *name) {
  const auto v = field<long long>(doc, name);
  if (v < 1)
    throw InputError(std::string("channel spec: field '") + name + "' must be >= 1");
  return static_cast<std::size_t>(v);
}

InputConstraint constraint_from_json(const json &doc) {
  InputConstraint c;
  if (!doc.contains("constraints"))
    return c;
  const auto &k = doc.at("constraints");
  if (!k.is_object())
    throw InputError("channel spec: field 'constraints' must be an object");
  if (k.contains("p1")) {
    c.p1 = field<double>(k, "p1");
    c.active1 = true;
  }
  if (k.contains("p2")) {
    c.p2 = field<double>(k, "p2");
    c.active2 = true;
  }
  try {
    c.validate();
  } catch (const InputError &e) {
    throw InputError(std::string("channel spec: field 'constraints': ") + e.what());
  }
  return c;
}

json factor_to_json(const Factor &f) {
  return {{"axis", f.axis},
          {"parents", f.parents},
          {"parent_sizes", f.table.parent_sizes()},
          {"out_size", f.table.out_size()},
          {"table", std::vector<double>(f.table.table().begin(), f.table.table().end())}};
}

Factor factor_from_json(const json &doc) {
  try {
    auto table = doc.at("table").get<std::vector<double>>();
    // Dumps round to 17 significant digits; renormalize rows before checking.
    const auto out = doc.at("out_size").get<std::size_t>();
    for (std::size_t r = 0; out > 0 && r < table.size() / out; ++r) {
      double s = 0.0;
      for (std::size_t x = 0; x < out; ++x)
        s += table[r * out + x];
      if (s > 0.0 && std::abs(s - 1.0) < 1e-9)
        for (std::size_t x = 0; x < out; ++x)
          table[r * out + x] /= s;
    }
    return {doc.at("axis").get<std::string>(),
            CondPmf(doc.at("parent_sizes").get<std::vector<std::size_t>>(), out,
                    std::move(table)),
            doc.at("parents").get<std::vector<std::string>>()};
  } catch (const json::exception &e) {
    throw InputError(std::string("policy: malformed factor: ") + e.what());
  }
}

} // namespace

MacChannel make_channel(std::size_t s1, std::size_t s2, std::size_t x1,
                        std::size_t x2, std::size_t y, std::vector<double> state,
                        const std::vector<std::vector<double>> &kernel_rows) {
  MacChannel ch;
  ch.s1_size = s1;
  ch.s2_size = s2;
  ch.x1_size = x1;
  ch.x2_size = x2;
  ch.y_size = y;
  if (state.size() != s1 * s2)
    throw InputError("state_pmf has " + std::to_string(state.size()) +
                     " entries, expected " + std::to_string(s1 * s2));
  try {
    ch.state_pmf = Pmf(std::move(state));
  } catch (const InputError &e) {
    throw InputError(std::string("state_pmf: ") + e.what());
  }
  const std::size_t rows = s1 * s2 * x1 * x2;
  if (kernel_rows.size() != rows)
    throw InputError("kernel has " + std::to_string(kernel_rows.size()) +
                     " rows, expected " + std::to_string(rows));
  std::vector<double> flat;
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t a = r / (s2 * x1 * x2), b = r / (x1 * x2) % s2,
                      c = r / x2 % x1, d = r % x2;
    std::ostringstream where;
    where << "kernel row (s1=" << a << ",s2=" << b << ",x1=" << c << ",x2=" << d
          << ")";
    const auto &row = kernel_rows[r];
    if (row.size() != y)
      throw InputError(where.str() + " has " + std::to_string(row.size()) +
                       " entries, expected y_size = " + std::to_string(y));
    double sum = 0.0;
    for (double v : row) {
      if (!(v >= 0.0) || !std::isfinite(v))
        throw InputError(where.str() + " has a negative or non-finite entry");
      sum += v;
    }
    if (std::abs(sum - 1.0) > kPmfTolerance) {
      std::ostringstream os;
      os << where.str() << " sums to " << sum;
      throw InputError(os.str());
    }
    flat.insert(flat.end(), row.begin(), row.end());
  }
  ch.kernel = CondPmf({s1, s2, x1, x2}, y, std::move(flat));
  validate_channel(ch);
  return ch;
}

ChannelSpec channel_from_json(const json &doc) {
  if (!doc.is_object())
    throw InputError("channel spec must be a JSON object");
  ChannelSpec spec;
  spec.constraint = constraint_from_json(doc);
  if (doc.contains("preset")) {
    const auto name = field<std::string>(doc, "preset");
    if (name != "switch_bsc")
      throw InputError("channel spec: unknown preset '" + name + "'");
    const double pz = field<double>(doc, "pz");
    if (!(pz >= 0.0 && pz <= 1.0))
      throw InputError("channel spec: field 'pz' must lie in [0,1]");
    spec.channel = build_switch_bsc(pz);
    return spec;
  }
  // Read in field order so the first missing one is reported.
  const auto s1 = size_field(doc, "s1_size");
  const auto s2 = size_field(doc, "s2_size");
  const auto x1 = size_field(doc, "x1_size");
  const auto x2 = size_field(doc, "x2_size");
  const auto y = size_field(doc, "y_size");
  auto state = field<std::vector<double>>(doc, "state_pmf");
  const auto kernel = field<std::vector<std::vector<double>>>(doc, "kernel");
  spec.channel = make_channel(s1, s2, x1, x2, y, std::move(state), kernel);
  return spec;
}

ChannelSpec load_channel_file(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw InputError("cannot open channel file " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error &e) {
    throw InputError("channel file " + path.string() + " is not valid JSON: " +
                     e.what());
  }
  return channel_from_json(doc);
}

json channel_to_json(const ChannelSpec &spec) {
  const auto &ch = spec.channel;
  json doc = {{"s1_size", ch.s1_size}, {"s2_size", ch.s2_size},
              {"x1_size", ch.x1_size}, {"x2_size", ch.x2_size},
              {"y_size", ch.y_size}};
  doc["state_pmf"] = std::vector<double>(ch.state_pmf.probs().begin(),
                                         ch.state_pmf.probs().end());
  json rows = json::array();
  for (std::size_t r = 0; r < ch.kernel.row_count(); ++r) {
    auto row = ch.kernel.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  doc["kernel"] = rows;
  json c = json::object();
  if (spec.constraint.active1)
    c["p1"] = spec.constraint.p1;
  if (spec.constraint.active2)
    c["p2"] = spec.constraint.p2;
  doc["constraints"] = c;
  return doc;
}

json policy_to_json(const AuxPolicy &pol) {
  json doc = {{"mode", std::string(to_string(pol.mode))},
              {"u", factor_to_json(pol.u_given)},
              {"x1", factor_to_json(pol.x1_given)},
              {"x2", factor_to_json(pol.x2_given)}};
  if (pol.v_given)
    doc["v"] = factor_to_json(*pol.v_given);
  return doc;
}

AuxPolicy policy_from_json(const json &doc) {
  if (!doc.is_object() || !doc.contains("mode") || !doc.contains("u") ||
      !doc.contains("x1") || !doc.contains("x2"))
    throw InputError("policy: expected an object with mode, u, x1, x2");
  AuxPolicy pol;
  pol.mode = parse_mode(doc.at("mode").get<std::string>());
  pol.u_given = factor_from_json(doc.at("u"));
  if (doc.contains("v"))
    pol.v_given = factor_from_json(doc.at("v"));
  pol.x1_given = factor_from_json(doc.at("x1"));
  pol.x2_given = factor_from_json(doc.at("x2"));
  return pol;
}

} // namespace macstate
