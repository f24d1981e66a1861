#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "rwtq/mdp.hpp"

namespace rwtq {

struct SuiteResult {
    std::string name;
    int total = 0;
    int failures = 0;
    std::vector<std::string> messages;  // one per failure, capped

    bool passed() const { return failures == 0 && total > 0; }
};

// Random episodic MDP pair over a shared support structure: the source has
// full-support transition rows, so the target (arbitrary rows) is always
// absolutely continuous with respect to it. Rewards are i.i.d. uniform.
struct MdpPair {
    std::shared_ptr<EpisodicMdp> target;
    std::shared_ptr<EpisodicMdp> source;
};

MdpPair random_mdp_pair(int num_states, int num_actions, int horizon,
                        double gamma, std::mt19937_64& rng);

// Alignment identity fuzz: target backup minus re-weighted source backup
// equals the reward gap for every (h,s,a) and any bounded V.
SuiteResult verify_alignment(int num_pairs = 20, int values_per_pair = 5,
                             double tolerance = 1e-10,
                             std::uint64_t seed = 12345);

// Deterministic concentration inequalities: self-normalized bound and the
// elliptical potential bound, fuzzed over random feature sequences.
SuiteResult verify_lemmas(int self_normalized_instances = 1000,
                          int elliptical_instances = 500,
                          std::uint64_t seed = 777);

// Dual-form KRR predictions and posterior variances against dense-inverse
// and explicit finite-feature oracles.
SuiteResult verify_krr(int num_designs = 50, double tolerance = 1e-8,
                       std::uint64_t seed = 4242);

// Optimism of the two-stage OFU learner on a small stochastic MDP pair:
// fraction of episodes where the optimistic table dominates Q* everywhere.
SuiteResult verify_optimism(int num_seeds = 50, int episodes = 100,
                            double required_fraction = 0.95,
                            std::uint64_t seed = 99);

std::vector<SuiteResult> run_all_suites();

}  // namespace rwtq
