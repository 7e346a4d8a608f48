#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "semcom/kg.hpp"

namespace semcom {

// Parsed, validated scenario file: flat `section.key = value` lines, '#'
// comments, unknown keys rejected. Relative paths resolve against the
// scenario file's directory.
struct ScenarioConfig {
    std::string global_entities;
    std::string global_triples;
    std::string personal_tx_entities;
    std::string personal_tx_triples;
    std::string personal_rx_entities;
    std::string personal_rx_triples;
    std::string corpus_path;

    double channel_p = 0.0;
    std::optional<std::uint64_t> channel_seed; // defaults to a seed-derived value
    bool channel_tap = true;

    WalkParams walk;          // walk.restarts / walk.length / walk.visits
    double theta = 0.5;       // fuse.theta
    double tau = 0.8;         // overlay.tau
    std::set<std::string> sensitive_categories;
    std::size_t sensitivity_hops = 1;
    std::size_t inference_depth = 2;
    unsigned width = 16;
    std::uint64_t seed = 0;
    bool repair_enabled = true;
    std::vector<std::string> attackers = {"A", "B", "C", "C_secret"};

    std::string base_dir;

    std::string resolve_path(const std::string& p) const;
};

ScenarioConfig parse_scenario(std::string_view text, std::string base_dir = ".");
ScenarioConfig load_scenario(const std::string& path);

} // namespace semcom
