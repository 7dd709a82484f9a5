#pragma once

// Command-line front end. `run_cli` is the whole program minus process
// plumbing so tests can drive it in-process.
//
// Exit codes: 0 ok, 1 invalid input, 2 infeasible configuration,
// 3 resource guard.

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace macstate::cli {

inline constexpr const char *kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kInvalid = 1, kInfeasible = 2, kResource = 3 };

class InfeasibleError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// `args` excludes the program name.
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace macstate::cli
