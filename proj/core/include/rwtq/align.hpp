#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "rwtq/mdp.hpp"

namespace rwtq {

struct AlignmentError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Transition density ratio omega_h(s'|s,a) = p_target / p_source. Three
// providers: identity (constant 1), exact tabular quotients from a pair of
// finite MDPs, and an externally supplied per-triple table (for plugging in
// ratio estimates). Immutable; all queries are pure.
class DensityRatioProvider {
  public:
    enum class Mode { identity, exact_tabular, table };

    // Stage-indexed sparse ratio table: entries[h-1][s*A+a] lists (s', w).
    struct RatioTable {
        int num_states = 0;
        int num_actions = 0;
        std::vector<std::vector<std::vector<std::pair<int, double>>>> entries;
    };

    static DensityRatioProvider identity();
    static DensityRatioProvider exact_tabular(
        std::shared_ptr<const EpisodicMdp> target,
        std::shared_ptr<const EpisodicMdp> source);
    static DensityRatioProvider from_table(RatioTable table);

    Mode mode() const { return mode_; }

    // identity -> 1; exact_tabular -> p0(s'|s,a)/pm(s'|s,a), with the
    // convention 0/0 = 0 and an error when pm = 0 < p0 (absolute-continuity
    // violation); table -> stored value (0 when the triple is absent).
    double ratio(int h, int s, int a, int next) const;

  private:
    DensityRatioProvider() = default;
    Mode mode_ = Mode::identity;
    std::shared_ptr<const EpisodicMdp> target_;
    std::shared_ptr<const EpisodicMdp> source_;
    RatioTable table_;
};

// Stage I regression target built from a source transition:
//   y = r + gamma * omega * V_next(s').
struct PseudoLabel {
    double value = 0.0;
    TransitionSample sample;
};

// Stage II regression target built from a target transition:
//   z = r + gamma * V_next(s') - Q_base(s,a).
struct ResidualLabel {
    double value = 0.0;
    TransitionSample sample;
};

PseudoLabel rwt_pseudo_label(const TransitionSample& sample, double omega,
                             std::span<const double> v_next, double gamma);

ResidualLabel residual_label(const TransitionSample& sample,
                             double q_base_value,
                             std::span<const double> v_next, double gamma);

// Exact expectation of the re-weighted source backup
//   R_src(s,a) + gamma * sum_{s'} P_src(s'|s,a) omega(s'|s,a) V_next(s').
// Test oracle for the alignment identity; not used in the learning loop.
double rwt_backup_exact(const EpisodicMdp& source,
                        const DensityRatioProvider& provider,
                        std::span<const double> v_target_next, int h, int s,
                        int a);

// Root mean squared difference between ratio estimates and truths; 0 on
// empty input.
double ratio_error_diagnostic(std::span<const double> estimates,
                              std::span<const double> truths);

}  // namespace rwtq
