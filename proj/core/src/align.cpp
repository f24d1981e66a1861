#include "rwtq/align.hpp"

#include <cmath>

namespace rwtq {

DensityRatioProvider DensityRatioProvider::identity() {
    DensityRatioProvider p;
    p.mode_ = Mode::identity;
    return p;
}

DensityRatioProvider DensityRatioProvider::exact_tabular(
    std::shared_ptr<const EpisodicMdp> target,
    std::shared_ptr<const EpisodicMdp> source) {
    if (!target || !source)
        throw AlignmentError("exact_tabular: null task reference");
    if (target->num_states() != source->num_states() ||
        target->num_actions() != source->num_actions() ||
        target->horizon() != source->horizon())
        throw AlignmentError("exact_tabular: task shape mismatch");
    DensityRatioProvider p;
    p.mode_ = Mode::exact_tabular;
    p.target_ = std::move(target);
    p.source_ = std::move(source);
    return p;
}

DensityRatioProvider DensityRatioProvider::from_table(RatioTable table) {
    for (const auto& stage : table.entries)
        for (const auto& row : stage)
            for (const auto& [next, w] : row)
                if (!(w >= 0.0) || !std::isfinite(w))
                    throw AlignmentError("ratio table: entries must be finite and >= 0");
    DensityRatioProvider p;
    p.mode_ = Mode::table;
    p.table_ = std::move(table);
    return p;
}

double DensityRatioProvider::ratio(int h, int s, int a, int next) const {
    switch (mode_) {
        case Mode::identity:
            return 1.0;
        case Mode::exact_tabular: {
            double p0 = target_->transition_prob(h, s, a, next);
            double pm = source_->transition_prob(h, s, a, next);
            if (pm == 0.0) {
                if (p0 == 0.0) return 0.0;  // triple never sampled under source
                throw AlignmentError(
                    "density ratio: target support not covered by source");
            }
            return p0 / pm;
        }
        case Mode::table: {
            const auto& row =
                table_.entries.at(h - 1).at(s * table_.num_actions + a);
            for (const auto& [n2, w] : row)
                if (n2 == next) return w;
            return 0.0;
        }
    }
    return 1.0;
}

PseudoLabel rwt_pseudo_label(const TransitionSample& sample, double omega,
                             std::span<const double> v_next, double gamma) {
    double v = v_next.empty() ? 0.0 : v_next[sample.next_state];
    return {sample.reward + gamma * omega * v, sample};
}

ResidualLabel residual_label(const TransitionSample& sample,
                             double q_base_value,
                             std::span<const double> v_next, double gamma) {
    double v = v_next.empty() ? 0.0 : v_next[sample.next_state];
    return {sample.reward + gamma * v - q_base_value, sample};
}

double rwt_backup_exact(const EpisodicMdp& source,
                        const DensityRatioProvider& provider,
                        std::span<const double> v_target_next, int h, int s,
                        int a) {
    double cont = 0.0;
    for (const auto& e : source.transition_row(h, s, a)) {
        if (e.prob == 0.0) continue;
        double v = v_target_next.empty() ? 0.0 : v_target_next[e.next_state];
        cont += e.prob * provider.ratio(h, s, a, e.next_state) * v;
    }
    return source.reward(h, s, a) + source.discount() * cont;
}

double ratio_error_diagnostic(std::span<const double> estimates,
                              std::span<const double> truths) {
    if (estimates.size() != truths.size())
        throw AlignmentError("ratio_error_diagnostic: length mismatch");
    if (estimates.empty()) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        double d = estimates[i] - truths[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(estimates.size()));
}

}  // namespace rwtq
