#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "rwtq/grid.hpp"
#include "rwtq/kernel.hpp"
#include "rwtq/learners.hpp"

namespace rwtq {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Variant { rwt_tabular, rwt_kernel_ofu, target_only, naive_pooled };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);

// Full experiment description. Serializes to a flat key=value text format;
// unknown keys are rejected and parse(serialize(c)) == c.
struct ExperimentConfig {
    Variant variant = Variant::rwt_tabular;
    int episodes = 300;
    double gamma = 0.99;
    double lr = 0.05;
    int batch_size = 64;
    int replay_passes = 1;  // backward update sweeps per episode (tabular)
    ExplorationSchedule schedule;  // total_episodes mirrors `episodes`
    std::vector<std::uint64_t> seeds = {0};

    std::string env_path;  // non-empty: load a serialized environment
    GridWorldSpec env;     // otherwise: generate from this spec

    // Source supply: static pre-collected pool (kappa == 0) or per-episode
    // growth where floor(kappa * n) samples per stage are available by
    // episode n (kappa > 0, source_episodes must then be 0).
    int source_episodes = 1024;
    double kappa = 0.0;

    BonusParams bonus;
    bool clip_values = true;        // kernel path: clip to [0, H-h+1]
    bool normalize_rewards = true;  // kernel path: rescale rewards to [0,1]

    std::string kernel_kind = "rbf";  // rbf | tabular_delta
    double kernel_lengthscale = 0.3;
    double kernel_scale = 1.0;
    std::string correction_kind = "scaled";  // scaled | rbf | tabular_delta
    double correction_multiplier = 1.0;      // scaled
    double correction_lengthscale = 0.3;     // rbf

    bool operator==(const ExperimentConfig&) const = default;

    KernelSpec baseline_kernel() const;
    KernelSpec correction_kernel() const;
    void validate() const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& cfg);

// Apply key=value overrides (same keys as the file format).
void apply_override(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value);

std::string config_hash(const ExperimentConfig& cfg);

}  // namespace rwtq
