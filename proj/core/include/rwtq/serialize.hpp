#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "rwtq/align.hpp"
#include "rwtq/grid.hpp"
#include "rwtq/mdp.hpp"

namespace rwtq {

struct SerializeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using json = nlohmann::json;

// MDP tables in row-major order; stage-invariant tables are stored once.
json mdp_to_json(const EpisodicMdp& mdp);
EpisodicMdp mdp_from_json(const json& j);

// Environment bundle: generating spec (seed included), target, sources.
json env_to_json(const GridEnvironment& env);
GridEnvironment env_from_json(const json& j);

json grid_spec_to_json(const GridWorldSpec& spec);
GridWorldSpec grid_spec_from_json(const json& j);

// External ratio-estimate tables share the transition-table layout.
json ratio_table_to_json(const DensityRatioProvider::RatioTable& table,
                         int horizon);
DensityRatioProvider::RatioTable ratio_table_from_json(const json& j);

void save_json(const std::string& path, const json& j);
json load_json(const std::string& path);

// Stable FNV-1a hash of the compact serialization, as a hex string. Used to
// tie outputs (CSVs, summaries) back to the exact environment and config.
std::string json_hash(const json& j);
std::string text_hash(const std::string& text);

}  // namespace rwtq
