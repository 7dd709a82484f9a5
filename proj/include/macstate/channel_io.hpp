#pragma once

// JSON channel specs and policy dumps.
//
// Channel file:
//   {"s1_size":2, "s2_size":1, "x1_size":2, "x2_size":2, "y_size":2,
//    "state_pmf":[...], "kernel":[[...], ...], "constraints":{"p1":..,"p2":..}}
// Kernel rows are ordered lexicographically in (s1, s2, x1, x2). The preset
//   {"preset":"switch_bsc", "pz":0.01, "constraints":{...}}
// replaces the explicit tables.

#include "macstate/macmodel.hpp"

#include <json.hpp>

#include <filesystem>

namespace macstate {

struct ChannelSpec {
  MacChannel channel;
  InputConstraint constraint;
};

/// Builds a channel from raw tables, reporting the first bad kernel row by
/// its (s1, s2, x1, x2) coordinates.
MacChannel make_channel(std::size_t s1, std::size_t s2, std::size_t x1,
                        std::size_t x2, std::size_t y, std::vector<double> state,
                        const std::vector<std::vector<double>> &kernel_rows);

ChannelSpec channel_from_json(const nlohmann::json &doc);
ChannelSpec load_channel_file(const std::filesystem::path &path);
nlohmann::json channel_to_json(const ChannelSpec &spec);

nlohmann::json policy_to_json(const AuxPolicy &pol);
AuxPolicy policy_from_json(const nlohmann::json &doc);

} // namespace macstate
