#include "cli.hpp"

#include "macstate/binsim.hpp"
#include "macstate/channel_io.hpp"
#include "macstate/optimizer.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

namespace macstate::cli {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::vector<double> parse_list(const std::string &text, const char *what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception &) {
      used = 0;
    }
    if (used == 0 || used != item.size())
      throw InputError(std::string(what) + ": '" + item + "' is not a number");
    out.push_back(v);
  }
  if (out.empty())
    throw InputError(std::string(what) + ": empty list");
  return out;
}

struct ChannelOpts {
  std::string preset;
  std::string file;
  double pz = 0.0;
  double p1 = 1.0, p2 = 1.0;
  CLI::Option *pz_opt = nullptr, *p1_opt = nullptr, *p2_opt = nullptr;

  void add(CLI::App *app) {
    app->add_option("--preset", preset, "code-defined channel (switch_bsc)");
    app->add_option("--channel", file, "channel JSON file");
    pz_opt = app->add_option("--pz", pz, "preset noise parameter");
    p1_opt = app->add_option("--p1", p1, "weight cap of encoder 1");
    p2_opt = app->add_option("--p2", p2, "weight cap of encoder 2");
  }

  ChannelSpec load() const {
    if (preset.empty() == file.empty())
      throw InputError("give exactly one of --preset and --channel");
    ChannelSpec spec;
    if (!file.empty()) {
      spec = load_channel_file(file);
    } else {
      if (pz_opt->count() == 0)
        throw InputError("--preset " + preset + " needs --pz");
      nlohmann::json doc = {{"preset", preset}, {"pz", pz}};
      spec = channel_from_json(doc);
    }
    if (p1_opt->count() > 0) {
      spec.constraint.p1 = p1;
      spec.constraint.active1 = true;
    }
    if (p2_opt->count() > 0) {
      spec.constraint.p2 = p2;
      spec.constraint.active2 = true;
    }
    spec.constraint.validate();
    return spec;
  }

  std::vector<std::string> manifest(const ChannelSpec &spec) const {
    std::vector<std::string> m;
    m.push_back(file.empty() ? "channel: preset=" + preset + " pz=" + fmt(pz)
                             : "channel: file=" + file);
    std::string c = "constraints:";
    if (spec.constraint.active1)
      c += " p1=" + fmt(spec.constraint.p1);
    if (spec.constraint.active2)
      c += " p2=" + fmt(spec.constraint.p2);
    if (!spec.constraint.active1 && !spec.constraint.active2)
      c += " none";
    m.push_back(c);
    return m;
  }
};

struct SearchOpts {
  SearchConfig cfg;
  void add(CLI::App *app) {
    app->add_option("--u-card", cfg.u_card, "|U|");
    app->add_option("--v-card", cfg.v_card, "|V| (two_way, split)");
    app->add_option("--directions", cfg.weight_count, "support directions");
    app->add_option("--restarts", cfg.restarts, "restarts per direction");
    app->add_option("--steps", cfg.local_steps, "sweeps per restart");
    app->add_option("--search-tol", cfg.tol, "final step size");
    app->add_option("--seed", cfg.seed, "root seed");
  }
  std::string manifest() const {
    return "search: u_card=" + std::to_string(cfg.u_card) +
           " v_card=" + std::to_string(cfg.v_card) +
           " directions=" + std::to_string(cfg.weight_count) +
           " restarts=" + std::to_string(cfg.restarts) +
           " steps=" + std::to_string(cfg.local_steps) + " tol=" + fmt(cfg.tol) +
           " seed=" + std::to_string(cfg.seed);
  }
};

struct CoopOpts {
  std::string mode = "one_way";
  double c12 = 0.0, c21 = 0.0, c12m = 0.0, c12s = 0.0;
  void add(CLI::App *app) {
    app->add_option("--mode", mode, "one_way|two_way|split|state_only|message_only");
    app->add_option("--c12", c12, "link rate 1->2");
    app->add_option("--c21", c21, "link rate 2->1 (two_way)");
    app->add_option("--c12m", c12m, "message link (split)");
    app->add_option("--c12s", c12s, "state link (split)");
  }
  CoopConfig get() const {
    CoopConfig c{parse_mode(mode), c12, c21, c12m, c12s};
    c.validate();
    return c;
  }
};

std::string describe(const CoopConfig &c) {
  std::string s(to_string(c.mode));
  switch (c.mode) {
  case CoopMode::two_way: return s + " c12=" + fmt(c.c12) + " c21=" + fmt(c.c21);
  case CoopMode::split: return s + " c12m=" + fmt(c.c12m) + " c12s=" + fmt(c.c12s);
  default: return s + " c12=" + fmt(c.c12);
  }
}

// Header form: "mode=one_way, c12=0.2".
std::string header_line(const CoopConfig &c) {
  std::string s = "mode=" + std::string(to_string(c.mode));
  switch (c.mode) {
  case CoopMode::two_way: return s + ", c12=" + fmt(c.c12) + ", c21=" + fmt(c.c21);
  case CoopMode::split: return s + ", c12m=" + fmt(c.c12m) + ", c12s=" + fmt(c.c12s);
  default: return s + ", c12=" + fmt(c.c12);
  }
}

CoopConfig parse_config(const std::string &text) {
  CoopConfig c;
  bool have_mode = false;
  std::stringstream ss(text);
  std::string kv;
  while (std::getline(ss, kv, ',')) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw InputError("--config: expected key=value, got '" + kv + "'");
    const auto key = kv.substr(0, eq), val = kv.substr(eq + 1);
    if (key == "mode") {
      c.mode = parse_mode(val);
      have_mode = true;
      continue;
    }
    const double v = parse_list(val, ("--config " + key).c_str()).at(0);
    if (key == "c12")
      c.c12 = v;
    else if (key == "c21")
      c.c21 = v;
    else if (key == "c12m")
      c.c12m = v;
    else if (key == "c12s")
      c.c12s = v;
    else
      throw InputError("--config: unknown key '" + key + "'");
  }
  if (!have_mode)
    throw InputError("--config '" + text + "' needs mode=");
  c.validate();
  return c;
}

// Output sink: a file when a path is given, else the command's stream.
class Sink {
public:
  Sink(const std::string &path, std::ostream &fallback) {
    if (path.empty()) {
      os_ = &fallback;
    } else {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_)
        throw InputError("cannot write " + path);
      os_ = file_.get();
    }
  }
  std::ostream &operator*() { return *os_; }

private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream *os_;
};

std::vector<std::string> base_manifest(const std::vector<std::string> &args) {
  std::string cmd = "args:";
  for (const auto &a : args)
    cmd += " " + a;
  return {std::string("macstate ") + kVersion, cmd};
}

BoundaryResult trace_or_fail(const ChannelSpec &spec, const CoopConfig &coop,
                             const SearchConfig &cfg) {
  auto r = trace_boundary(spec.channel, coop, spec.constraint, cfg);
  if (r.region.empty())
    throw InfeasibleError("no feasible policy for " + describe(coop));
  return r;
}

void write_witnesses(const std::string &path, const std::vector<std::string> &manifest,
                     const BoundaryResult &r) {
  nlohmann::json doc;
  doc["manifest"] = manifest;
  auto arr = nlohmann::json::array();
  for (const auto &w : r.witnesses)
    arr.push_back({{"r1", w.vertex.r1},
                   {"r2", w.vertex.r2},
                   {"pentagon", {{"a1", w.pentagon.a1}, {"a2", w.pentagon.a2}, {"a12", w.pentagon.a12}}},
                   {"policy", policy_to_json(w.policy)}});
  doc["witnesses"] = arr;
  std::ofstream f(path, std::ios::binary);
  if (!f)
    throw InputError("cannot write " + path);
  f << doc.dump(1) << '\n';
}

// ---------------------------------------------------------------------------

struct RegionCmd {
  ChannelOpts ch;
  SearchOpts search;
  CoopOpts coop;
  std::string out, witness;

  int run(const std::vector<std::string> &args, std::ostream &os) {
    const auto spec = ch.load();
    const auto c = coop.get();
    auto manifest = base_manifest(args);
    manifest.push_back("command: region");
    for (auto &l : ch.manifest(spec))
      manifest.push_back(l);
    manifest.push_back(header_line(c));
    manifest.push_back(search.manifest());
    const auto r = trace_or_fail(spec, c, search.cfg);
    Sink sink(out, os);
    write_region_csv(*sink, r.region, manifest);
    const std::string wpath = !witness.empty() ? witness : out.empty() ? "" : out + ".witness.json";
    if (!wpath.empty())
      write_witnesses(wpath, manifest, r);
    return kOk;
  }
};

struct CompareCmd {
  ChannelOpts ch;
  SearchOpts search;
  std::vector<std::string> configs;
  std::string prefix;
  double tol = 2e-3;

  int run(const std::vector<std::string> &args, std::ostream &os) {
    if (configs.size() < 2)
      throw InputError("compare needs at least two --config entries");
    const auto spec = ch.load();
    std::vector<CoopConfig> cs;
    for (const auto &t : configs)
      cs.push_back(parse_config(t));
    auto manifest = base_manifest(args);
    manifest.push_back("command: compare");
    for (auto &l : ch.manifest(spec))
      manifest.push_back(l);
    manifest.push_back(search.manifest());
    manifest.push_back("tolerance: " + fmt(tol));

    std::vector<RateRegion> regions;
    for (std::size_t k = 0; k < cs.size(); ++k) {
      regions.push_back(trace_or_fail(spec, cs[k], search.cfg).region);
      auto m = manifest;
      m.push_back(header_line(cs[k]));
      if (prefix.empty()) {
        write_region_csv(os, regions.back(), m);
      } else {
        Sink s(prefix + "_" + std::to_string(k) + ".csv", os);
        write_region_csv(*s, regions.back(), m);
      }
    }
    Sink sink(prefix.empty() ? "" : prefix + "_summary.csv", os);
    for (const auto &l : manifest)
      *sink << "# " << l << '\n';
    for (std::size_t k = 0; k < cs.size(); ++k)
      *sink << "# config " << k << ": " << describe(cs[k]) << '\n';
    *sink << "a,b,verdict,a_outside_b,b_outside_a\n";
    for (std::size_t a = 0; a < cs.size(); ++a)
      for (std::size_t b = a + 1; b < cs.size(); ++b) {
        const auto r = region_compare(regions[a], regions[b], tol);
        char buf[160];
        std::snprintf(buf, sizeof buf, "%zu,%zu,%s,%.6f,%.6f\n", a, b,
                      std::string(to_string(r.verdict)).c_str(), r.a_outside_b, r.b_outside_a);
        *sink << buf;
      }
    return kOk;
  }
};

struct SweepCmd {
  ChannelOpts ch;
  SearchOpts search;
  std::string mode = "one_way";
  std::string c12_list;
  std::string prefix;
  double tol = 2e-3;

  int run(const std::vector<std::string> &args, std::ostream &os) {
    const auto rates = parse_list(c12_list, "--c12");
    const auto spec = ch.load();
    const auto m = parse_mode(mode);
    if (m == CoopMode::split || m == CoopMode::two_way)
      throw InputError("sweep varies c12 of a one-way family mode");
    auto manifest = base_manifest(args);
    manifest.push_back("command: sweep");
    for (auto &l : ch.manifest(spec))
      manifest.push_back(l);
    manifest.push_back(search.manifest());
    manifest.push_back("tolerance: " + fmt(tol));

    std::vector<RateRegion> regions;
    for (std::size_t k = 0; k < rates.size(); ++k) {
      CoopConfig c{m, rates[k]};
      c.validate();
      regions.push_back(trace_or_fail(spec, c, search.cfg).region);
      auto mk = manifest;
      mk.push_back(header_line(c));
      if (prefix.empty()) {
        write_region_csv(os, regions.back(), mk);
      } else {
        Sink s(prefix + "_" + std::to_string(k) + ".csv", os);
        write_region_csv(*s, regions.back(), mk);
      }
    }
    Sink sink(prefix.empty() ? "" : prefix + "_summary.csv", os);
    for (const auto &l : manifest)
      *sink << "# " << l << '\n';
    *sink << "c12_a,c12_b,verdict,hausdorff\n";
    double last = 0.0;
    for (std::size_t k = 0; k + 1 < rates.size(); ++k) {
      const auto r = region_compare(regions[k], regions[k + 1], tol);
      last = hausdorff_distance(regions[k], regions[k + 1]);
      char buf[160];
      std::snprintf(buf, sizeof buf, "%s,%s,%s,%.6f\n", fmt(rates[k]).c_str(),
                    fmt(rates[k + 1]).c_str(), std::string(to_string(r.verdict)).c_str(),
                    last);
      *sink << buf;
    }
    if (rates.size() > 1) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "# saturation: last step c12 %s -> %s moves the region by %.6f bits\n",
                    fmt(rates[rates.size() - 2]).c_str(), fmt(rates.back()).c_str(), last);
      *sink << buf;
    }
    return kOk;
  }
};

struct SimulateCmd {
  ChannelOpts ch;
  std::string policy;
  std::size_t witness_index = 0;
  std::string n_list = "8,12,16";
  double r1 = 0.0, r2 = 0.0, c12 = 0.0, eps = 0.5;
  long long trials = 200;
  std::uint64_t seed = 1;
  std::string out;

  AuxPolicy load_policy(const ChannelSpec &spec) const {
    const auto &c = spec.channel;
    if (policy == "uniform")
      return independent_policy(c, CoopMode::one_way, Pmf::uniform(c.x1_size),
                                Pmf::uniform(c.x2_size));
    if (policy == "state_copy")
      return state_copy_policy(c, Pmf::uniform(c.x1_size), Pmf::uniform(c.x2_size));
    std::ifstream in(policy);
    if (!in)
      throw InputError("--policy: cannot open '" + policy + "'");
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::exception &e) {
      throw InputError("--policy: " + std::string(e.what()));
    }
    if (doc.contains("witnesses")) {
      if (witness_index >= doc["witnesses"].size())
        throw InputError("--witness-index out of range");
      doc = doc["witnesses"][witness_index]["policy"];
    }
    auto pol = policy_from_json(doc);
    validate_policy(c, pol);
    return pol;
  }

  int run(const std::vector<std::string> &args, std::ostream &os) {
    if (trials < 1)
      throw InputError("--trials must be >= 1");
    const auto ns = parse_list(n_list, "--n");
    const auto spec = ch.load();
    SimParams p;
    p.channel = spec.channel;
    p.policy = load_policy(spec);
    p.r1 = r1;
    p.r2 = r2;
    p.c12 = c12;
    p.eps = eps;
    p.trials = static_cast<std::size_t>(trials);
    p.seed = seed;
    for (double n : ns)
      if (n < 1 || n != std::floor(n))
        throw InputError("--n entries must be positive integers");
    for (double n : ns) {
      p.n = static_cast<std::size_t>(n);
      p.validate();
    }
    const auto j = assemble_joint(p.channel, p.policy);
    const double ius = conditional_mutual_information(j, {axis::U}, {axis::S1});
    if (ius > c12 + 1e-12)
      throw InfeasibleError("policy needs I(U;S) = " + fmt(ius) + " > c12 = " + fmt(c12));

    auto manifest = base_manifest(args);
    manifest.push_back("command: simulate");
    for (auto &l : ch.manifest(spec))
      manifest.push_back(l);
    manifest.push_back("policy: " + policy + " index=" + std::to_string(witness_index));
    manifest.push_back("seed: " + std::to_string(seed));
    manifest.push_back("rounding: M=max(1,floor(2^(nR))); bins=max(1,floor(2^(n(c12-I(U;S)-eps/2))))");
    Sink sink(out, os);
    for (const auto &l : manifest)
      *sink << "# " << l << '\n';
    write_sim_csv_header(*sink);
    for (double n : ns) {
      p.n = static_cast<std::size_t>(n);
      write_sim_csv_row(*sink, p, estimate_error(p));
    }
    return kOk;
  }
};

} // namespace

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Rate regions of state-dependent MACs with cooperating encoders", "macstate"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  RegionCmd region;
  auto *reg = app.add_subcommand("region", "trace one region");
  region.ch.add(reg);
  region.search.add(reg);
  region.coop.add(reg);
  reg->add_option("--out", region.out, "frontier CSV (default stdout)");
  reg->add_option("--witness", region.witness, "witness JSON (default <out>.witness.json)");

  CompareCmd compare;
  auto *cmp = app.add_subcommand("compare", "trace several settings and compare them");
  compare.ch.add(cmp);
  compare.search.add(cmp);
  cmp->add_option("--config", compare.configs, "mode=...,c12=...[,c21=,c12m=,c12s=]");
  cmp->add_option("--out-prefix", compare.prefix, "write <prefix>_<k>.csv and <prefix>_summary.csv");
  cmp->add_option("--tol", compare.tol, "containment tolerance (bits)");

  SweepCmd sweep;
  auto *swp = app.add_subcommand("sweep", "trace one mode over several c12 values");
  sweep.ch.add(swp);
  sweep.search.add(swp);
  swp->add_option("--mode", sweep.mode, "one_way|state_only|message_only");
  swp->add_option("--c12", sweep.c12_list, "comma-separated rates")->required();
  swp->add_option("--out-prefix", sweep.prefix, "write <prefix>_<k>.csv and <prefix>_summary.csv");
  swp->add_option("--tol", sweep.tol, "containment tolerance (bits)");

  SimulateCmd sim;
  auto *simc = app.add_subcommand("simulate", "Monte-Carlo error rate of the binned scheme");
  sim.ch.add(simc);
  simc->add_option("--policy", sim.policy, "policy/witness JSON, 'uniform' or 'state_copy'")
      ->required();
  simc->add_option("--witness-index", sim.witness_index, "entry of a witness dump");
  simc->add_option("--n", sim.n_list, "comma-separated blocklengths");
  simc->add_option("--r1", sim.r1, "rate of encoder 1");
  simc->add_option("--r2", sim.r2, "rate of encoder 2");
  simc->add_option("--c12", sim.c12, "cooperation rate");
  simc->add_option("--eps", sim.eps, "typicality slack");
  simc->add_option("--trials", sim.trials, "trials per blocklength");
  simc->add_option("--seed", sim.seed, "root seed");
  simc->add_option("--out", sim.out, "CSV path (default stdout)");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
    if (reg->parsed())
      return region.run(args, out);
    if (cmp->parsed())
      return compare.run(args, out);
    if (swp->parsed())
      return sweep.run(args, out);
    return sim.run(args, out);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion &e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError &e) {
    app.exit(e, out, err);
    return kInvalid;
  } catch (const InfeasibleError &e) {
    err << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const ResourceError &e) {
    err << "resource guard: " << e.what() << '\n';
    return kResource;
  } catch (const std::invalid_argument &e) {
    err << "error: " << e.what() << '\n';
    return kInvalid;
  } catch (const nlohmann::json::exception &e) {
    err << "error: " << e.what() << '\n';
    return kInvalid;
  }
}

} // namespace macstate::cli
