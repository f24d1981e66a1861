// Micro-benchmarks for the hot paths: exact planning, kernel ridge fits
// (batch and incremental), and the per-episode training loop.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "rwtq/config.hpp"
#include "rwtq/harness.hpp"
#include "rwtq/kernel.hpp"
#include "rwtq/rng.hpp"

using namespace rwtq;

namespace {

GridEnvironment make_env(int dims, int side, int horizon) {
    GridWorldSpec spec;
    spec.dims = dims;
    spec.side = side;
    spec.horizon = horizon;
    spec.num_actions = dims;
    spec.num_sources = 1;
    spec.seed = 1;
    return build_random_reward_grid(spec, 0.99);
}

void bm_value_iteration(benchmark::State& state) {
    GridEnvironment env = make_env(static_cast<int>(state.range(0)), 7, 8);
    for (auto _ : state) {
        ValueTables vt = value_iteration(env.target);
        benchmark::DoNotOptimize(vt.v[0][0]);
    }
    state.SetLabel(std::to_string(env.target.num_states()) + " states");
}
BENCHMARK(bm_value_iteration)->Arg(2)->Arg(3)->Arg(4);

std::vector<Eigen::VectorXd> random_design(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<Eigen::VectorXd> pts(n, Eigen::VectorXd(4));
    for (auto& p : pts)
        for (int i = 0; i < 4; ++i) p[i] = unit(rng);
    return pts;
}

void bm_krr_fit(benchmark::State& state) {
    auto rng = make_rng(2);
    const int n = static_cast<int>(state.range(0));
    auto pts = random_design(n, rng);
    Eigen::VectorXd y = Eigen::VectorXd::Random(n);
    KernelSpec spec = KernelSpec::rbf(0.5);
    for (auto _ : state) {
        KrrModel model = krr_fit(pts, y, spec, 1.0);
        benchmark::DoNotOptimize(model.predict(pts[0]));
    }
}
BENCHMARK(bm_krr_fit)->Arg(64)->Arg(256)->Arg(512);

void bm_incremental_krr_append(benchmark::State& state) {
    auto rng = make_rng(3);
    const int n = static_cast<int>(state.range(0));
    auto pts = random_design(n, rng);
    auto queries = random_design(32, rng);
    KernelSpec spec = KernelSpec::rbf(0.5);
    for (auto _ : state) {
        IncrementalKrr inc(spec, 1.0, queries);
        for (const auto& p : pts) inc.append(p);
        benchmark::DoNotOptimize(inc.variance_queries()[0]);
    }
}
BENCHMARK(bm_incremental_krr_append)->Arg(64)->Arg(256)->Arg(512);

void bm_tabular_episode_loop(benchmark::State& state) {
    ExperimentConfig cfg;
    cfg.variant = Variant::rwt_tabular;
    cfg.episodes = static_cast<int>(state.range(0));
    cfg.schedule.total_episodes = cfg.episodes;
    cfg.env.dims = 2;
    cfg.env.side = 5;
    cfg.env.horizon = 4;
    cfg.env.num_actions = 2;
    cfg.env.seed = 4;
    cfg.source_episodes = 128;
    cfg.bonus.horizon = cfg.env.horizon;
    RunContext ctx = prepare_context(cfg);
    std::uint64_t seed = 0;
    for (auto _ : state) {
        auto records = run_episode_loop(cfg, ctx, seed++);
        benchmark::DoNotOptimize(records.back().episode_return);
    }
}
BENCHMARK(bm_tabular_episode_loop)->Arg(50)->Arg(200)
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
