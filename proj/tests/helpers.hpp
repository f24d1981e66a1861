#pragma once

// Shared builders for small hand-constructed MDPs used across the test
// files. Everything here is deterministic given the supplied RNG.

#include <memory>
#include <random>
#include <vector>

#include "rwtq/mdp.hpp"

namespace rwtq::testing {

// Deterministic 2-state chain: action 0 stays, action 1 moves to the other
// state. Rewards are caller-supplied per (h, s, a).
inline EpisodicMdp make_two_state_mdp(
    int horizon, double gamma, const std::vector<std::vector<double>>& rewards) {
    const int S = 2, A = 2;
    std::vector<std::vector<TransitionRow>> transitions(horizon);
    for (int h = 0; h < horizon; ++h) {
        transitions[h].resize(S * A);
        for (int s = 0; s < S; ++s) {
            transitions[h][s * A + 0] = {{s, 1.0}};
            transitions[h][s * A + 1] = {{1 - s, 1.0}};
        }
    }
    return EpisodicMdp(S, A, horizon, gamma, std::move(transitions), rewards,
                       0);
}

// Random finite MDP with full-support stochastic transition rows and
// uniform(-1, 1) rewards.
inline std::shared_ptr<EpisodicMdp> make_random_mdp(int S, int A, int H,
                                                    double gamma,
                                                    std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.05, 1.0);
    std::uniform_real_distribution<double> rew(-1.0, 1.0);
    std::vector<std::vector<TransitionRow>> transitions(H);
    std::vector<std::vector<double>> rewards(H);
    for (int h = 0; h < H; ++h) {
        transitions[h].resize(S * A);
        rewards[h].resize(S * A);
        for (int sa = 0; sa < S * A; ++sa) {
            double total = 0.0;
            std::vector<double> w(S);
            for (int next = 0; next < S; ++next) {
                w[next] = unit(rng);
                total += w[next];
            }
            for (int next = 0; next < S; ++next)
                transitions[h][sa].push_back({next, w[next] / total});
            rewards[h][sa] = rew(rng);
        }
    }
    return std::make_shared<EpisodicMdp>(S, A, H, gamma, std::move(transitions),
                                         std::move(rewards), 0);
}

// Sample a next state from a transition row.
inline int sample_row(const TransitionRow& row, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double u = unit(rng);
    for (const auto& e : row) {
        if (u < e.prob) return e.next_state;
        u -= e.prob;
    }
    return row.back().next_state;
}

}  // namespace rwtq::testing
