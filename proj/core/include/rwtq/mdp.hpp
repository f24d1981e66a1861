#pragma once

#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace rwtq {

struct MdpError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One support point of a transition distribution.
struct TransitionEntry {
    int next_state = 0;
    double prob = 0.0;
    bool operator==(const TransitionEntry&) const = default;
};

// Sparse transition row P_h(.|s,a): the support points of one distribution.
using TransitionRow = std::vector<TransitionEntry>;

// A single (task, stage, s, a, r, s') tuple. Stages are 1-based per the
// episodic convention; task 0 is the target, 1..M are sources.
struct TransitionSample {
    int task_id = 0;
    int stage = 1;
    int state = 0;
    int action = 0;
    double reward = 0.0;
    int next_state = 0;
};

struct Trajectory {
    std::vector<TransitionSample> samples;  // exactly H entries, stages 1..H
};

// Finite-state/action episodic task. Transitions and rewards are stage
// indexed; immutable after construction and safe to share across threads.
class EpisodicMdp {
  public:
    EpisodicMdp(int num_states, int num_actions, int horizon, double discount,
                std::vector<std::vector<TransitionRow>> transitions,
                std::vector<std::vector<double>> rewards, int initial_state);

    int num_states() const { return num_states_; }
    int num_actions() const { return num_actions_; }
    int horizon() const { return horizon_; }
    double discount() const { return discount_; }
    int initial_state() const { return initial_state_; }

    // Stage arguments are 1-based; (s,a) indices zero-based.
    const TransitionRow& transition_row(int h, int s, int a) const {
        check_indices(h, s, a);
        return transitions_[h - 1][sa_index(s, a)];
    }
    double reward(int h, int s, int a) const {
        check_indices(h, s, a);
        return rewards_[h - 1][sa_index(s, a)];
    }
    double transition_prob(int h, int s, int a, int next) const;

    const std::vector<double>& reward_table(int h) const {
        return rewards_[h - 1];
    }
    const std::vector<TransitionRow>& transition_table(int h) const {
        return transitions_[h - 1];
    }

    int sa_index(int s, int a) const { return s * num_actions_ + a; }
    double max_abs_reward() const { return max_abs_reward_; }

  private:
    void check_indices(int h, int s, int a) const;

    int num_states_;
    int num_actions_;
    int horizon_;
    double discount_;
    std::vector<std::vector<TransitionRow>> transitions_;  // [h-1][s*A+a]
    std::vector<std::vector<double>> rewards_;             // [h-1][s*A+a]
    int initial_state_;
    double max_abs_reward_ = 0.0;
};

// Deterministic stage-indexed policy: action = greedy[h-1][s].
using DeterministicPolicy = std::vector<std::vector<int>>;

// epsilon-mixture of a deterministic policy with the uniform policy. With
// epsilon = 0 this is the deterministic policy itself; with epsilon = 1 it
// is uniform random regardless of the greedy table.
struct MixedPolicy {
    DeterministicPolicy greedy;
    double epsilon = 0.0;
};

struct ValueTables {
    std::vector<std::vector<double>> q;  // [h-1][s*A+a]
    std::vector<std::vector<double>> v;  // [h-1][s]
};

std::pair<double, int> step(const EpisodicMdp& mdp, int s, int a, int h,
                            std::mt19937_64& rng);

Trajectory rollout(const EpisodicMdp& mdp, const MixedPolicy& policy,
                   std::mt19937_64& rng);

// Exact backward-induction oracles.
ValueTables value_iteration(const EpisodicMdp& mdp);
ValueTables evaluate_policy(const EpisodicMdp& mdp, const MixedPolicy& policy);

DeterministicPolicy greedy_policy(const EpisodicMdp& mdp,
                                  const std::vector<std::vector<double>>& q);

}  // namespace rwtq
