#include "cli.hpp"

#include "macstate/rateregion.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using macstate::cli::run_cli;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(const std::vector<std::string> &args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

const std::vector<std::string> kSmall{"--directions", "5", "--restarts", "2", "--steps", "60"};

std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string> &b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

std::string slurp(const std::filesystem::path &p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

} // namespace

TEST_CASE("region subcommand") {
  const auto args = with({"region", "--preset", "switch_bsc", "--pz", "0.01", "--p1", "0.25",
                          "--p2", "0.25", "--c12", "0.2"},
                         kSmall);
  const auto a = run(args);
  REQUIRE(a.code == 0);
  CHECK(a.out.rfind("# macstate 0.1.0\n# args: region", 0) == 0);
  CHECK(a.out.find("# mode=one_way, c12=0.2\n") != std::string::npos);
  CHECK(a.out.find("# constraints: p1=0.25 p2=0.25\n") != std::string::npos);
  CHECK(a.out.find("\nr1,r2\n") != std::string::npos);
  std::istringstream is(a.out);
  const auto region = macstate::read_region_csv(is);
  CHECK(region.frontier.size() >= 2);
  // Same arguments, same bytes.
  CHECK(run(args).out == a.out);

  const auto dir = std::filesystem::temp_directory_path() / "macstate_cli_test";
  std::filesystem::create_directories(dir);
  const auto csv = (dir / "r.csv").string();
  REQUIRE(run(with(args, {"--out", csv})).code == 0);
  CHECK(std::filesystem::exists(csv + ".witness.json"));
  const auto sim = run({"simulate", "--preset", "switch_bsc", "--pz", "0.01", "--policy",
                        csv + ".witness.json", "--witness-index", "0", "--c12", "0.2", "--n",
                        "6", "--trials", "5"});
  CHECK(sim.code == 0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("exit codes") {
  SUBCASE("invalid input") {
    CHECK(run({}).code == 1);
    CHECK(run({"region", "--preset", "switch_bsc"}).code == 1);
    CHECK(run({"region", "--preset", "switch_bsc", "--pz", "1.5"}).code == 1);
    CHECK(run({"region", "--preset", "switch_bsc", "--pz", "0.1", "--mode", "sideways"}).code == 1);
    CHECK(run({"region", "--channel", "/nonexistent/channel.json"}).code == 1);
    CHECK(run({"region", "--preset", "switch_bsc", "--pz", "0.1", "--c12", "-1"}).code == 1);
    CHECK(run({"region", "--preset", "switch_bsc", "--pz", "0.1", "--u-card", "40"}).code == 1);
    CHECK(run({"sweep", "--preset", "switch_bsc", "--pz", "0.1", "--c12", ""}).code == 1);
    CHECK(run({"sweep", "--preset", "switch_bsc", "--pz", "0.1", "--c12", "0.1,x"}).code == 1);
    CHECK(run({"compare", "--preset", "switch_bsc", "--pz", "0.1", "--config",
               "mode=one_way,c12=0.1"})
              .code == 1);
    const auto t0 = run({"simulate", "--preset", "switch_bsc", "--pz", "0.1", "--policy",
                         "uniform", "--trials", "0"});
    CHECK(t0.code == 1);
    CHECK(t0.err.find("trials") != std::string::npos);
    CHECK(run({"simulate", "--preset", "switch_bsc", "--pz", "0.1", "--policy", "uniform", "--n",
               "2.5"})
              .code == 1);
  }
  SUBCASE("infeasible") {
    const auto r = run({"simulate", "--preset", "switch_bsc", "--pz", "0.1", "--policy",
                        "state_copy", "--c12", "0.5", "--n", "8"});
    CHECK(r.code == 2);
    CHECK(r.err.find("I(U;S)") != std::string::npos);
  }
  SUBCASE("resource guard") {
    CHECK(run({"simulate", "--preset", "switch_bsc", "--pz", "0.1", "--policy", "uniform", "--n",
               "30"})
              .code == 3);
    CHECK(run({"simulate", "--preset", "switch_bsc", "--pz", "0.1", "--policy", "uniform", "--n",
               "16", "--r1", "0.8", "--r2", "0.8"})
              .code == 3);
  }
  SUBCASE("version") {
    const auto v = run({"--version"});
    CHECK(v.code == 0);
    CHECK(v.out.find("0.1.0") != std::string::npos);
  }
}

TEST_CASE("compare and sweep") {
  const auto cmp = run(with({"compare", "--preset", "switch_bsc", "--pz", "0.01", "--config",
                             "mode=state_only,c12=0.3", "--config", "mode=one_way,c12=0.3"},
                            kSmall));
  REQUIRE(cmp.code == 0);
  CHECK(cmp.out.find("a,b,verdict,a_outside_b,b_outside_a\n0,1,a_subset_b,") !=
        std::string::npos);

  const auto sw = run(with({"sweep", "--preset", "switch_bsc", "--pz", "0.01", "--c12",
                            "0,0.5"},
                           kSmall));
  REQUIRE(sw.code == 0);
  CHECK(sw.out.find("c12_a,c12_b,verdict,hausdorff\n0,0.5,a_subset_b,") != std::string::npos);
  CHECK(sw.out.find("# saturation:") != std::string::npos);
}

TEST_CASE("simulate output") {
  const std::vector<std::string> args{"simulate", "--preset", "switch_bsc", "--pz", "0.01",
                                      "--policy", "uniform", "--n", "6,8", "--r1", "0.2",
                                      "--r2", "0.2", "--c12", "0.3", "--trials", "40"};
  const auto a = run(args);
  REQUIRE(a.code == 0);
  CHECK(a.out.find("n,r1,r2,c12,eps,trials,error_rate,ci95,coverage_fail,confusion\n6,") !=
        std::string::npos);
  CHECK(a.out.find("\n8,0.200000,0.200000,0.300000,0.500000,40,") != std::string::npos);
  CHECK(run(args).out == a.out);
}
