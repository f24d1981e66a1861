#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "rwtq/config.hpp"
#include "rwtq/grid.hpp"
#include "rwtq/mdp.hpp"
#include "rwtq/serialize.hpp"

namespace rwtq {

struct HarnessError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EpisodeRecord {
    int episode = 0;
    double episode_return = 0.0;  // undiscounted sum of rewards
    double regret = 0.0;          // V*_1(s_1) - V^{pi_n}_1(s_1), exact
    double epsilon = 0.0;
    double wall_ms = 0.0;
};

struct SeedCurve {
    std::uint64_t seed = 0;
    std::vector<EpisodeRecord> records;
};

struct SeedAggregate {
    int num_seeds = 0;
    std::vector<double> mean_return, stderr_return;
    std::vector<double> mean_cum_regret, stderr_cum_regret;
};

// Pre-collected source samples, per task and stage. Never mutated by the
// target loop.
struct SourcePool {
    // buffers[task][stage-1] -> samples (task index 0 = first source)
    std::vector<std::vector<std::vector<TransitionSample>>> buffers;

    std::size_t total_samples() const;
};

SourcePool collect_source_pool(const std::vector<EpisodicMdp>& sources,
                               int episodes_per_source, std::mt19937_64& rng);

json pool_to_json(const SourcePool& pool, const std::string& env_hash);
SourcePool pool_from_json(const json& j);

// Everything a seed run needs, shared read-only across seeds.
struct RunContext {
    GridEnvironment env;         // reward-normalized copy for the kernel path
    ValueTables target_optimal;  // value-iteration oracle, cached
    SourcePool pool;
    std::string env_hash;        // hash of the generated/loaded environment
};

RunContext prepare_context(const ExperimentConfig& cfg);

// Exact per-episode regret of a deployed (possibly epsilon-mixed) policy.
double compute_regret(const EpisodicMdp& target, const ValueTables& optimal,
                      const MixedPolicy& policy);

// One seed of Algorithm-style training: rollout, synchronous backward
// updates (h = H..1), greedy/epsilon deployment. Deterministic given
// (config, seed).
std::vector<EpisodeRecord> run_episode_loop(const ExperimentConfig& cfg,
                                            const RunContext& ctx,
                                            std::uint64_t seed);

SeedAggregate aggregate_seeds(const std::vector<SeedCurve>& runs);

struct ExperimentResult {
    std::vector<SeedCurve> curves;
    SeedAggregate aggregate;
    std::string env_hash;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Kernel-path complexity diagnostics, per stage per episode.
struct DiagnosticsRecord {
    int episode = 0;
    int stage = 0;
    int n = 0;  // target samples at this stage
    double effective_dimension = 0.0;
    double information_gain = 0.0;
    double coverage_constant = 0.0;
};

std::vector<DiagnosticsRecord> run_kernel_diagnostics(
    const ExperimentConfig& cfg, const RunContext& ctx, std::uint64_t seed);

// CSV schema: episode,return,regret,cum_regret,epsilon (fixed field order).
std::string curve_to_csv(const SeedCurve& curve);

json summary_to_json(const ExperimentConfig& cfg,
                     const ExperimentResult& result);

}  // namespace rwtq
