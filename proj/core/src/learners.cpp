#include "rwtq/learners.hpp"

#include <algorithm>
#include <cmath>

namespace rwtq {

TabularQ::TabularQ(int horizon, int num_states, int num_actions,
                   double init_value)
    : horizon_(horizon),
      num_states_(num_states),
      num_actions_(num_actions),
      init_value_(init_value),
      values_(horizon,
              std::vector<double>(
                  static_cast<std::size_t>(num_states) * num_actions,
                  init_value)) {}

double TabularQ::v(int h, int s) const {
    if (h > horizon_) return 0.0;
    double best = at(h, s, 0);
    for (int a = 1; a < num_actions_; ++a) best = std::max(best, at(h, s, a));
    return best;
}

double beta_target(const BonusParams& params, int n) {
    if (params.mode == BonusParams::Mode::practical)
        return params.beta_scale_target * params.horizon;
    const double lt = params.lambda_tilde;
    const double nn = std::max(1, n);
    const double h = params.horizon;
    return h * std::sqrt(lt + std::pow(nn, params.beta1) / (lt * lt) +
                         std::log(nn * h) +
                         std::pow(lt / nn, -params.alpha1));
}

double beta_source(const BonusParams& params, int n_source,
                   double ratio_error_sq) {
    if (params.mode == BonusParams::Mode::practical)
        return params.beta_scale_source * params.horizon;
    const double l = params.lambda;
    const double nm = std::max(1, n_source);
    return params.horizon *
           std::sqrt(l + std::pow(l / nm, -params.alpha0) + ratio_error_sq);
}

double compute_bonus(const UncertaintyState& source_state,
                     const UncertaintyState& target_state,
                     const Eigen::VectorXd& x, const BonusParams& params,
                     int n, int n_source, double ratio_error_sq) {
    double bm = beta_source(params, n_source, ratio_error_sq);
    double b0 = beta_target(params, n);
    return bm * std::sqrt(posterior_variance(source_state, x)) +
           b0 * std::sqrt(posterior_variance(target_state, x));
}

double clip_optimistic(double value, int h, int horizon) {
    double cap = static_cast<double>(horizon - h + 1);
    return std::clamp(value, 0.0, cap);
}

double optimistic_q(const TwoStageEstimate& estimate,
                    const std::function<double(int, int, int)>& bonus_fn,
                    int h, int s, int a, int horizon, bool clip) {
    double v = estimate.q_trans(h, s, a) + bonus_fn(h, s, a);
    return clip ? clip_optimistic(v, h, horizon) : v;
}

double ExplorationSchedule::epsilon(int episode) const {
    if (kind == Kind::ucb_greedy) return 0.0;
    if (total_episodes <= 1) return eps_start;
    double t = static_cast<double>(episode - 1) / (total_episodes - 1);
    t = std::clamp(t, 0.0, 1.0);
    return eps_start + (eps_end - eps_start) * t;
}

int select_action(std::span<const double> q_values,
                  const ExplorationSchedule& schedule, int episode,
                  std::mt19937_64& rng) {
    const int num_actions = static_cast<int>(q_values.size());
    double eps = schedule.epsilon(episode);
    if (eps > 0.0) {
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        if (unif(rng) < eps) {
            std::uniform_int_distribution<int> dist(0, num_actions - 1);
            return dist(rng);
        }
    }
    int best = 0;
    for (int a = 1; a < num_actions; ++a)
        if (q_values[a] > q_values[best]) best = a;
    return best;
}

KrrModel stage1_fit_kernel(
    const std::vector<std::vector<TransitionSample>>& source_samples_per_task,
    const DensityRatioProvider& provider, std::span<const double> v_next,
    double gamma, const Encoder& encode, const KernelSpec& spec_k,
    double lambda) {
    std::vector<Eigen::VectorXd> points;
    std::vector<double> labels;
    for (const auto& task_samples : source_samples_per_task) {
        for (const auto& s : task_samples) {
            double omega =
                provider.ratio(s.stage, s.state, s.action, s.next_state);
            labels.push_back(rwt_pseudo_label(s, omega, v_next, gamma).value);
            points.push_back(encode(s.state, s.action));
        }
    }
    Eigen::VectorXd y =
        Eigen::Map<const Eigen::VectorXd>(labels.data(), labels.size());
    return krr_fit(points, y, spec_k, lambda);
}

KrrModel stage2_fit_kernel(std::span<const TransitionSample> target_samples,
                           const KrrModel& q_base,
                           std::span<const double> v_next, double gamma,
                           const Encoder& encode, const KernelSpec& spec_kt,
                           double lambda_tilde) {
    std::vector<Eigen::VectorXd> points;
    std::vector<double> labels;
    points.reserve(target_samples.size());
    for (const auto& s : target_samples) {
        Eigen::VectorXd x = encode(s.state, s.action);
        double base = q_base.predict(x);
        labels.push_back(residual_label(s, base, v_next, gamma).value);
        points.push_back(std::move(x));
    }
    Eigen::VectorXd z =
        Eigen::Map<const Eigen::VectorXd>(labels.data(), labels.size());
    return krr_fit(points, z, spec_kt, lambda_tilde);
}

void tabular_two_stage_update(TabularQ& q_base, TabularQ& delta,
                              std::span<const TransitionSample> source_batch,
                              std::span<const TransitionSample> target_batch,
                              const DensityRatioProvider& provider,
                              double gamma, double lr) {
    auto v_next = [&](int h, int s) {
        if (h > q_base.horizon()) return 0.0;
        double best = q_base.at(h, s, 0) + delta.at(h, s, 0);
        for (int a = 1; a < q_base.num_actions(); ++a)
            best = std::max(best, q_base.at(h, s, a) + delta.at(h, s, a));
        return best;
    };
    for (const auto& smp : source_batch) {
        double omega =
            provider.ratio(smp.stage, smp.state, smp.action, smp.next_state);
        double y = smp.reward +
                   gamma * omega * v_next(smp.stage + 1, smp.next_state);
        double& cell = q_base.at(smp.stage, smp.state, smp.action);
        cell += lr * (y - cell);
    }
    for (const auto& smp : target_batch) {
        double z = smp.reward + gamma * v_next(smp.stage + 1, smp.next_state) -
                   q_base.at(smp.stage, smp.state, smp.action);
        double& cell = delta.at(smp.stage, smp.state, smp.action);
        cell += lr * (z - cell);
    }
}

void tabular_baseline_update(TabularQ& q,
                             std::span<const TransitionSample> batch,
                             double gamma, double lr,
                             BaselineVariant variant) {
    (void)variant;  // pooled vs target-only differ only in batch contents
    for (const auto& smp : batch) {
        double target =
            smp.reward + gamma * q.v(smp.stage + 1, smp.next_state);
        double& cell = q.at(smp.stage, smp.state, smp.action);
        cell += lr * (target - cell);
    }
}

}  // namespace rwtq
