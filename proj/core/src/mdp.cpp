#include "rwtq/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>

namespace rwtq {

namespace {
constexpr double kRowSumTol = 1e-12;
}

EpisodicMdp::EpisodicMdp(int num_states, int num_actions, int horizon,
                         double discount,
                         std::vector<std::vector<TransitionRow>> transitions,
                         std::vector<std::vector<double>> rewards,
                         int initial_state)
    : num_states_(num_states),
      num_actions_(num_actions),
      horizon_(horizon),
      discount_(discount),
      transitions_(std::move(transitions)),
      rewards_(std::move(rewards)),
      initial_state_(initial_state) {
    if (num_states_ < 1 || num_actions_ < 1 || horizon_ < 1)
        throw MdpError("EpisodicMdp: dimensions must be positive");
    if (!(discount_ > 0.0 && discount_ <= 1.0))
        throw MdpError("EpisodicMdp: discount must lie in (0,1]");
    if (initial_state_ < 0 || initial_state_ >= num_states_)
        throw MdpError("EpisodicMdp: initial state out of range");
    if (static_cast<int>(transitions_.size()) != horizon_ ||
        static_cast<int>(rewards_.size()) != horizon_)
        throw MdpError("EpisodicMdp: stage count mismatch");

    const std::size_t cells =
        static_cast<std::size_t>(num_states_) * num_actions_;
    for (int h = 0; h < horizon_; ++h) {
        if (transitions_[h].size() != cells || rewards_[h].size() != cells)
            throw MdpError("EpisodicMdp: table size mismatch");
        for (std::size_t i = 0; i < cells; ++i) {
            double sum = 0.0;
            for (const auto& e : transitions_[h][i]) {
                if (e.next_state < 0 || e.next_state >= num_states_)
                    throw MdpError("EpisodicMdp: next state out of range");
                if (e.prob < 0.0)
                    throw MdpError("EpisodicMdp: negative transition probability");
                sum += e.prob;
            }
            if (std::abs(sum - 1.0) > kRowSumTol)
                throw MdpError("EpisodicMdp: transition row does not sum to 1");
            if (!std::isfinite(rewards_[h][i]))
                throw MdpError("EpisodicMdp: non-finite reward");
            max_abs_reward_ = std::max(max_abs_reward_, std::abs(rewards_[h][i]));
        }
    }
}

void EpisodicMdp::check_indices(int h, int s, int a) const {
    if (h < 1 || h > horizon_ || s < 0 || s >= num_states_ || a < 0 ||
        a >= num_actions_)
        throw MdpError("EpisodicMdp: index out of range");
}

double EpisodicMdp::transition_prob(int h, int s, int a, int next) const {
    for (const auto& e : transition_row(h, s, a))
        if (e.next_state == next) return e.prob;
    return 0.0;
}

std::pair<double, int> step(const EpisodicMdp& mdp, int s, int a, int h,
                            std::mt19937_64& rng) {
    const TransitionRow& row = mdp.transition_row(h, s, a);
    double r = mdp.reward(h, s, a);
    if (row.size() == 1) return {r, row[0].next_state};
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double u = unif(rng);
    double acc = 0.0;
    for (const auto& e : row) {
        acc += e.prob;
        if (u <= acc) return {r, e.next_state};
    }
    return {r, row.back().next_state};  // guard against rounding at u ~ 1
}

Trajectory rollout(const EpisodicMdp& mdp, const MixedPolicy& policy,
                   std::mt19937_64& rng) {
    Trajectory traj;
    traj.samples.reserve(mdp.horizon());
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::uniform_int_distribution<int> action_dist(0, mdp.num_actions() - 1);
    int s = mdp.initial_state();
    for (int h = 1; h <= mdp.horizon(); ++h) {
        int a;
        if (policy.epsilon > 0.0 && unif(rng) < policy.epsilon)
            a = action_dist(rng);
        else
            a = policy.greedy[h - 1][s];
        auto [r, next] = step(mdp, s, a, h, rng);
        traj.samples.push_back({0, h, s, a, r, next});
        s = next;
    }
    return traj;
}

ValueTables value_iteration(const EpisodicMdp& mdp) {
    const int S = mdp.num_states(), A = mdp.num_actions(), H = mdp.horizon();
    const double gamma = mdp.discount();
    ValueTables out;
    out.q.assign(H, std::vector<double>(static_cast<std::size_t>(S) * A, 0.0));
    out.v.assign(H, std::vector<double>(S, 0.0));
    std::vector<double> v_next(S, 0.0);  // V_{H+1} = 0
    for (int h = H; h >= 1; --h) {
        auto& qh = out.q[h - 1];
        auto& vh = out.v[h - 1];
        for (int s = 0; s < S; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            for (int a = 0; a < A; ++a) {
                double cont = 0.0;
                for (const auto& e : mdp.transition_row(h, s, a))
                    cont += e.prob * v_next[e.next_state];
                double q = mdp.reward(h, s, a) + gamma * cont;
                qh[mdp.sa_index(s, a)] = q;
                best = std::max(best, q);
            }
            vh[s] = best;
        }
        v_next = vh;
    }
    return out;
}

ValueTables evaluate_policy(const EpisodicMdp& mdp,
                            const MixedPolicy& policy) {
    const int S = mdp.num_states(), A = mdp.num_actions(), H = mdp.horizon();
    const double gamma = mdp.discount();
    const double eps = policy.epsilon;
    ValueTables out;
    out.q.assign(H, std::vector<double>(static_cast<std::size_t>(S) * A, 0.0));
    out.v.assign(H, std::vector<double>(S, 0.0));
    std::vector<double> v_next(S, 0.0);
    for (int h = H; h >= 1; --h) {
        auto& qh = out.q[h - 1];
        auto& vh = out.v[h - 1];
        for (int s = 0; s < S; ++s) {
            double mean_q = 0.0;
            for (int a = 0; a < A; ++a) {
                double cont = 0.0;
                for (const auto& e : mdp.transition_row(h, s, a))
                    cont += e.prob * v_next[e.next_state];
                double q = mdp.reward(h, s, a) + gamma * cont;
                qh[mdp.sa_index(s, a)] = q;
                mean_q += q;
            }
            mean_q /= A;
            double greedy_q = qh[mdp.sa_index(s, policy.greedy[h - 1][s])];
            vh[s] = (1.0 - eps) * greedy_q + eps * mean_q;
        }
        v_next = vh;
    }
    return out;
}

DeterministicPolicy greedy_policy(const EpisodicMdp& mdp,
                                  const std::vector<std::vector<double>>& q) {
    const int S = mdp.num_states(), A = mdp.num_actions(), H = mdp.horizon();
    DeterministicPolicy pol(H, std::vector<int>(S, 0));
    for (int h = 0; h < H; ++h) {
        for (int s = 0; s < S; ++s) {
            int best = 0;
            double best_q = q[h][mdp.sa_index(s, 0)];
            for (int a = 1; a < A; ++a) {
                double qa = q[h][mdp.sa_index(s, a)];
                if (qa > best_q) {  // lowest-index tie-break
                    best_q = qa;
                    best = a;
                }
            }
            pol[h][s] = best;
        }
    }
    return pol;
}

}  // namespace rwtq
