#include "rwtq/grid.hpp"

#include <cmath>
#include <random>

#include "rwtq/rng.hpp"

namespace rwtq {

int GridWorldSpec::num_states() const {
    int n = 1;
    for (int d = 0; d < dims; ++d) n *= side;
    return n;
}

std::vector<int> grid_coords(const GridWorldSpec& spec, int state) {
    std::vector<int> c(spec.dims);
    for (int d = spec.dims - 1; d >= 0; --d) {
        c[d] = state % spec.side;
        state /= spec.side;
    }
    return c;
}

int grid_state(const GridWorldSpec& spec, const std::vector<int>& coords) {
    int s = 0;
    for (int d = 0; d < spec.dims; ++d) s = s * spec.side + coords[d];
    return s;
}

namespace {

void validate(const GridWorldSpec& spec) {
    if (spec.dims < 1) throw MdpError("GridWorldSpec: dims must be >= 1");
    if (spec.side < 2) throw MdpError("GridWorldSpec: side must be >= 2");
    if (spec.horizon < 1) throw MdpError("GridWorldSpec: horizon must be >= 1");
    if (spec.num_actions < 1 || spec.num_actions > spec.dims)
        throw MdpError("GridWorldSpec: num_actions must lie in [1, dims]");
    if (spec.delta_std < 0.0)
        throw MdpError("GridWorldSpec: delta_std must be >= 0");
    if (spec.num_sources < 0)
        throw MdpError("GridWorldSpec: num_sources must be >= 0");
}

// Deterministic dynamics: action a increments coordinate a, the agent stays
// in place when the move would leave the grid. Shared by all tasks.
std::vector<TransitionRow> grid_transitions(const GridWorldSpec& spec) {
    const int S = spec.num_states();
    std::vector<TransitionRow> rows(static_cast<std::size_t>(S) *
                                    spec.num_actions);
    // Stride of coordinate d in the row-major state index.
    std::vector<int> stride(spec.dims, 1);
    for (int d = spec.dims - 2; d >= 0; --d)
        stride[d] = stride[d + 1] * spec.side;
    for (int s = 0; s < S; ++s) {
        auto coords = grid_coords(spec, s);
        for (int a = 0; a < spec.num_actions; ++a) {
            int next = (coords[a] + 1 < spec.side) ? s + stride[a] : s;
            rows[static_cast<std::size_t>(s) * spec.num_actions + a] = {
                {next, 1.0}};
        }
    }
    return rows;
}

std::vector<double> gaussian_table(std::size_t n, double stddev,
                                   std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> t(n);
    for (auto& v : t) v = stddev > 0.0 ? stddev * normal(rng) : 0.0;
    return t;
}

EpisodicMdp make_task(const GridWorldSpec& spec, double discount,
                      const std::vector<TransitionRow>& transitions,
                      const std::vector<double>& reward_table) {
    // One fixed (s,a) reward table replicated across stages.
    std::vector<std::vector<TransitionRow>> trans(spec.horizon, transitions);
    std::vector<std::vector<double>> rewards(spec.horizon, reward_table);
    return EpisodicMdp(spec.num_states(), spec.num_actions, spec.horizon,
                       discount, std::move(trans), std::move(rewards),
                       /*initial_state=*/0);
}

}  // namespace

GridEnvironment build_random_reward_grid(const GridWorldSpec& spec,
                                         double discount) {
    validate(spec);
    const std::size_t cells =
        static_cast<std::size_t>(spec.num_states()) * spec.num_actions;
    auto transitions = grid_transitions(spec);

    auto target_rng = make_rng(derive_seed(spec.seed, "env-gen/target"));
    auto target_rewards =
        gaussian_table(cells, spec.target_reward_std, target_rng);

    std::vector<EpisodicMdp> sources;
    sources.reserve(spec.num_sources);
    for (int m = 1; m <= spec.num_sources; ++m) {
        auto rng = make_rng(derive_seed(spec.seed, "env-gen/source", m));
        auto delta = gaussian_table(cells, spec.delta_std, rng);
        auto rewards = target_rewards;
        for (std::size_t i = 0; i < cells; ++i) rewards[i] += delta[i];
        sources.push_back(make_task(spec, discount, transitions, rewards));
    }
    return GridEnvironment{
        spec, make_task(spec, discount, transitions, target_rewards),
        std::move(sources)};
}

}  // namespace rwtq
