#pragma once

#include <cstdint>
#include <vector>

#include "rwtq/mdp.hpp"

namespace rwtq {

// Synthetic grid family: a dims-dimensional grid with deterministic
// increment-one-coordinate actions (clipped at the boundary) and i.i.d.
// Gaussian reward tables. Source tasks share the target's transitions and
// perturb its rewards by an additive N(0, delta_std^2) table.
struct GridWorldSpec {
    int dims = 4;
    int side = 9;
    int horizon = 8;
    int num_actions = 4;
    double target_reward_std = 1.0;
    double delta_std = 3.0;
    int num_sources = 1;
    std::uint64_t seed = 0;

    int num_states() const;
    bool operator==(const GridWorldSpec&) const = default;
};

struct GridEnvironment {
    GridWorldSpec spec;
    EpisodicMdp target;
    std::vector<EpisodicMdp> sources;
};

GridEnvironment build_random_reward_grid(const GridWorldSpec& spec,
                                         double discount);

// Coordinate helpers. States are row-major over coordinates, coordinate 0
// varying slowest; the origin has index 0.
std::vector<int> grid_coords(const GridWorldSpec& spec, int state);
int grid_state(const GridWorldSpec& spec, const std::vector<int>& coords);

}  // namespace rwtq
