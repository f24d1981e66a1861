#pragma once

#include <functional>
#include <random>
#include <span>
#include <vector>

#include "rwtq/align.hpp"
#include "rwtq/kernel.hpp"
#include "rwtq/mdp.hpp"

namespace rwtq {

// Stage-indexed Q table. v(H+1, s) is 0 by convention.
class TabularQ {
  public:
    TabularQ() = default;
    TabularQ(int horizon, int num_states, int num_actions, double init_value);

    double at(int h, int s, int a) const {
        return values_[h - 1][s * num_actions_ + a];
    }
    double& at(int h, int s, int a) {
        return values_[h - 1][s * num_actions_ + a];
    }
    double v(int h, int s) const;

    int horizon() const { return horizon_; }
    int num_states() const { return num_states_; }
    int num_actions() const { return num_actions_; }
    double init_value() const { return init_value_; }
    const std::vector<std::vector<double>>& values() const { return values_; }

  private:
    int horizon_ = 0, num_states_ = 0, num_actions_ = 0;
    double init_value_ = 0.0;
    std::vector<std::vector<double>> values_;
};

// Per-stage baseline + correction pair; the transfer estimate is their sum.
struct TwoStageEstimate {
    std::vector<KrrModel> q_base;  // index h-1
    std::vector<KrrModel> delta;
    Encoder encode;

    double q_trans(int h, int s, int a) const {
        Eigen::VectorXd x = encode(s, a);
        return q_base[h - 1].predict(x) + delta[h - 1].predict(x);
    }
};

struct BonusParams {
    double lambda = 1.0;        // ridge, baseline space
    double lambda_tilde = 1.0;  // ridge, correction space
    double beta_scale_source = 1.0;  // c_m
    double beta_scale_target = 1.0;  // c_0
    enum class Mode { practical, theoretical };
    Mode mode = Mode::practical;
    int horizon = 1;
    double alpha0 = 1.0, alpha1 = 1.0, beta1 = 0.5;  // theoretical mode only

    bool operator==(const BonusParams&) const = default;
};

// Confidence widths. Practical mode uses tuned constants c*H; theoretical
// mode evaluates the literal width formulas with the configured exponents
// (diagnostic use; the constants are vacuous at desk scale).
double beta_target(const BonusParams& params, int n);
double beta_source(const BonusParams& params, int n_source,
                   double ratio_error_sq = 0.0);

double compute_bonus(const UncertaintyState& source_state,
                     const UncertaintyState& target_state,
                     const Eigen::VectorXd& x, const BonusParams& params,
                     int n, int n_source, double ratio_error_sq = 0.0);

// Clip an optimistic value into [0, H - h + 1].
double clip_optimistic(double value, int h, int horizon);

double optimistic_q(const TwoStageEstimate& estimate,
                    const std::function<double(int, int, int)>& bonus_fn,
                    int h, int s, int a, int horizon, bool clip);

struct ExplorationSchedule {
    enum class Kind { epsilon_greedy_linear, ucb_greedy };
    Kind kind = Kind::epsilon_greedy_linear;
    double eps_start = 1.0;
    double eps_end = 0.0;
    int total_episodes = 1;

    double epsilon(int episode) const;
    bool operator==(const ExplorationSchedule&) const = default;
};

// Epsilon-greedy action choice; greedy ties break to the lowest index.
int select_action(std::span<const double> q_values,
                  const ExplorationSchedule& schedule, int episode,
                  std::mt19937_64& rng);

// Stage I KRR on pseudo-labels pooled over all source tasks.
KrrModel stage1_fit_kernel(
    const std::vector<std::vector<TransitionSample>>& source_samples_per_task,
    const DensityRatioProvider& provider, std::span<const double> v_next,
    double gamma, const Encoder& encode, const KernelSpec& spec_k,
    double lambda);

// Stage II KRR on residual labels from target samples.
KrrModel stage2_fit_kernel(std::span<const TransitionSample> target_samples,
                           const KrrModel& q_base,
                           std::span<const double> v_next, double gamma,
                           const Encoder& encode, const KernelSpec& spec_kt,
                           double lambda_tilde);

// Incremental-averaging tabular analog of the two-stage update. Source
// samples move q_base toward RWT pseudo-labels; target samples move delta
// toward residual labels against the current q_base. V_next is
// max_a (q_base + delta) at stage h+1.
void tabular_two_stage_update(TabularQ& q_base, TabularQ& delta,
                              std::span<const TransitionSample> source_batch,
                              std::span<const TransitionSample> target_batch,
                              const DensityRatioProvider& provider,
                              double gamma, double lr);

enum class BaselineVariant { target_only, naive_pooled };

// Standard sample-based Q-learning step on a single table.
void tabular_baseline_update(TabularQ& q,
                             std::span<const TransitionSample> batch,
                             double gamma, double lr, BaselineVariant variant);

}  // namespace rwtq
