#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "rwtq/harness.hpp"
#include "rwtq/rng.hpp"

using namespace rwtq;
using rwtq::testing::make_two_state_mdp;

namespace {

ExperimentConfig small_tabular_config() {
    ExperimentConfig cfg;
    cfg.variant = Variant::rwt_tabular;
    cfg.episodes = 20;
    cfg.gamma = 0.99;
    cfg.lr = 0.1;
    cfg.batch_size = 8;
    cfg.schedule.total_episodes = cfg.episodes;
    cfg.seeds = {0};
    cfg.env.dims = 2;
    cfg.env.side = 3;
    cfg.env.horizon = 3;
    cfg.env.num_actions = 2;
    cfg.env.delta_std = 0.5;
    cfg.env.num_sources = 1;
    cfg.env.seed = 7;
    cfg.source_episodes = 32;
    cfg.bonus.horizon = cfg.env.horizon;
    return cfg;
}

}  // namespace

TEST_CASE("source pool collection counts and determinism") {
    auto rng = make_rng(3);
    std::vector<EpisodicMdp> sources = {
        make_two_state_mdp(3, 0.9, {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}}),
        make_two_state_mdp(3, 0.9, {{2, 0, 0, 0}, {0, 2, 0, 0}, {0, 0, 2, 0}}),
    };

    SourcePool empty = collect_source_pool(sources, 0, rng);
    CHECK(empty.total_samples() == 0);
    CHECK(empty.buffers.size() == 2);

    auto rng_a = make_rng(3);
    SourcePool pool = collect_source_pool(sources, 16, rng_a);
    // One sample per stage per episode per task.
    CHECK(pool.total_samples() == 2 * 16 * 3);
    for (std::size_t m = 0; m < 2; ++m)
        for (int h = 1; h <= 3; ++h) {
            CHECK(pool.buffers[m][h - 1].size() == 16);
            for (const auto& smp : pool.buffers[m][h - 1]) {
                CHECK(smp.task_id == static_cast<int>(m) + 1);
                CHECK(smp.stage == h);
            }
        }

    // Identical RNG state reproduces the pool exactly.
    auto rng_b = make_rng(3);
    SourcePool again = collect_source_pool(sources, 16, rng_b);
    CHECK(pool_to_json(pool, "x") == pool_to_json(again, "x"));

    CHECK_THROWS_AS(collect_source_pool(sources, -1, rng), HarnessError);
}

TEST_CASE("source pool JSON round trip") {
    auto rng = make_rng(5);
    std::vector<EpisodicMdp> sources = {
        make_two_state_mdp(2, 0.9, {{1, 2, 3, 4}, {5, 6, 7, 8}})};
    SourcePool pool = collect_source_pool(sources, 4, rng);
    json j = pool_to_json(pool, "deadbeef");
    CHECK(j.at("env_hash") == "deadbeef");
    SourcePool back = pool_from_json(j);
    CHECK(pool_to_json(back, "deadbeef") == j);

    CHECK_THROWS_AS(pool_from_json(json{{"format", "other"}}),
                    SerializeError);
}

TEST_CASE("exact regret of hand-evaluable policies") {
    // H = 1: Q(0,.) = {1, 2}, start state 0, so V* = 2.
    auto mdp = make_two_state_mdp(1, 1.0, {{1, 2, 3, 4}});
    ValueTables vt = value_iteration(mdp);

    MixedPolicy optimal{greedy_policy(mdp, vt.q), 0.0};
    CHECK(compute_regret(mdp, vt, optimal) == doctest::Approx(0.0));

    MixedPolicy bad{DeterministicPolicy{{0, 0}}, 0.0};
    CHECK(compute_regret(mdp, vt, bad) == doctest::Approx(1.0));

    // epsilon-mix: 0.5 * Q(0,0) + 0.5 * uniform = 0.5*1 + 0.5*1.5 = 1.25.
    MixedPolicy mixed{DeterministicPolicy{{0, 0}}, 0.5};
    CHECK(compute_regret(mdp, vt, mixed) == doctest::Approx(0.75));
}

TEST_CASE("regret is non-negative for arbitrary policies") {
    auto rng = make_rng(17);
    auto mdp = rwtq::testing::make_random_mdp(4, 3, 3, 0.95, rng);
    ValueTables vt = value_iteration(*mdp);
    std::uniform_int_distribution<int> act(0, 2);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 25; ++trial) {
        DeterministicPolicy pol(3, std::vector<int>(4, 0));
        for (auto& row : pol)
            for (auto& a : row) a = act(rng);
        MixedPolicy policy{pol, unif(rng)};
        CHECK(compute_regret(*mdp, vt, policy) >= -1e-12);
    }
}

TEST_CASE("seed aggregation statistics") {
    SeedCurve a{1, {{1, 1.0, 0.5, 0.0, 0.0}, {2, 2.0, 0.25, 0.0, 0.0}}};
    SeedCurve b{2, {{1, 3.0, 1.5, 0.0, 0.0}, {2, 4.0, 0.75, 0.0, 0.0}}};

    // Single seed: spread is identically zero.
    SeedAggregate one = aggregate_seeds({a});
    CHECK(one.num_seeds == 1);
    CHECK(one.mean_return == std::vector<double>{1.0, 2.0});
    CHECK(one.stderr_return == std::vector<double>{0.0, 0.0});
    CHECK(one.mean_cum_regret == std::vector<double>{0.5, 0.75});

    // Two seeds with returns {1} and {3}: mean 2, sample deviation sqrt(2).
    SeedAggregate two = aggregate_seeds({a, b});
    CHECK(two.mean_return[0] == doctest::Approx(2.0));
    CHECK(two.stderr_return[0] == doctest::Approx(std::sqrt(2.0)));
    CHECK(two.mean_return[1] == doctest::Approx(3.0));
    // Cumulative regret: seed curves (0.5, 0.75) and (1.5, 2.25).
    CHECK(two.mean_cum_regret[0] == doctest::Approx(1.0));
    CHECK(two.mean_cum_regret[1] == doctest::Approx(1.5));

    CHECK_THROWS_AS(aggregate_seeds({}), HarnessError);
    SeedCurve shorter{3, {{1, 0.0, 0.0, 0.0, 0.0}}};
    CHECK_THROWS_AS(aggregate_seeds({a, shorter}), HarnessError);
}

TEST_CASE("context preparation sizes the pool from the config") {
    ExperimentConfig cfg = small_tabular_config();
    RunContext ctx = prepare_context(cfg);
    CHECK(!ctx.env_hash.empty());
    CHECK(ctx.pool.buffers.size() == 1);
    CHECK(ctx.pool.total_samples() ==
          static_cast<std::size_t>(cfg.source_episodes) * cfg.env.horizon);
    // The optimal value table covers every stage.
    CHECK(ctx.target_optimal.v.size() ==
          static_cast<std::size_t>(cfg.env.horizon));
}

TEST_CASE("kernel-path contexts rescale all rewards into [0,1]") {
    ExperimentConfig cfg = small_tabular_config();
    cfg.variant = Variant::rwt_kernel_ofu;
    cfg.normalize_rewards = true;
    RunContext ctx = prepare_context(cfg);
    auto in_unit = [](const EpisodicMdp& mdp) {
        for (int h = 1; h <= mdp.horizon(); ++h)
            for (double r : mdp.reward_table(h)) {
                CHECK(r >= 0.0);
                CHECK(r <= 1.0);
            }
    };
    in_unit(ctx.env.target);
    for (const auto& src : ctx.env.sources) in_unit(src);
}

TEST_CASE("episode loop: shape, reproducibility, pool immutability") {
    ExperimentConfig cfg = small_tabular_config();
    RunContext ctx = prepare_context(cfg);
    json pool_before = pool_to_json(ctx.pool, "");

    auto records = run_episode_loop(cfg, ctx, 42);
    CHECK(records.size() == static_cast<std::size_t>(cfg.episodes));
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(records[i].episode == static_cast<int>(i) + 1);
        CHECK(records[i].regret >= -1e-9);
    }

    // Bitwise reproducibility under the same seed.
    auto again = run_episode_loop(cfg, ctx, 42);
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(records[i].episode_return == again[i].episode_return);
        CHECK(records[i].regret == again[i].regret);
    }

    // The shared source pool is never mutated by a run.
    CHECK(pool_to_json(ctx.pool, "") == pool_before);

    // Single-episode runs produce a single record.
    ExperimentConfig tiny = cfg;
    tiny.episodes = 1;
    tiny.schedule.total_episodes = 1;
    CHECK(run_episode_loop(tiny, ctx, 0).size() == 1);
}

TEST_CASE("all four variants run and stay finite on a small grid") {
    for (Variant v : {Variant::rwt_tabular, Variant::target_only,
                      Variant::naive_pooled, Variant::rwt_kernel_ofu}) {
        ExperimentConfig cfg = small_tabular_config();
        cfg.variant = v;
        cfg.episodes = 10;
        cfg.schedule.total_episodes = 10;
        if (v == Variant::rwt_kernel_ofu) {
            cfg.schedule.kind = ExplorationSchedule::Kind::ucb_greedy;
            cfg.source_episodes = 16;
            cfg.bonus.beta_scale_source = 0.2;
            cfg.bonus.beta_scale_target = 0.2;
        }
        ExperimentResult result = run_experiment(cfg);
        CHECK(result.curves.size() == 1);
        CHECK(result.aggregate.mean_return.size() == 10);
        for (double r : result.aggregate.mean_return)
            CHECK(std::isfinite(r));
    }
}

TEST_CASE("optimistic kernel learner accumulates regret sublinearly") {
    ExperimentConfig cfg;
    cfg.variant = Variant::rwt_kernel_ofu;
    cfg.episodes = 200;
    cfg.gamma = 0.99;
    cfg.schedule.kind = ExplorationSchedule::Kind::ucb_greedy;
    cfg.schedule.total_episodes = cfg.episodes;
    cfg.seeds.clear();
    for (std::uint64_t s = 0; s < 20; ++s) cfg.seeds.push_back(s);
    cfg.env.dims = 2;
    cfg.env.side = 4;
    cfg.env.horizon = 3;
    cfg.env.num_actions = 2;
    cfg.env.delta_std = 0.5;
    cfg.env.num_sources = 1;
    cfg.env.seed = 11;
    cfg.source_episodes = 64;
    cfg.bonus.horizon = cfg.env.horizon;
    cfg.bonus.beta_scale_source = 0.2;
    cfg.bonus.beta_scale_target = 0.2;

    ExperimentResult result = run_experiment(cfg);
    double at100 = result.aggregate.mean_cum_regret[99];
    double at200 = result.aggregate.mean_cum_regret[199];
    CHECK(at200 >= at100 - 1e-12);  // cumulative regret never decreases
    // Doubling the horizon less than doubles the regret.
    CHECK(at200 < 0.9 * (2.0 * at100) + 1e-9);
}

TEST_CASE("diagnostics demand the kernel variant and report growth") {
    ExperimentConfig cfg = small_tabular_config();
    RunContext ctx = prepare_context(cfg);
    CHECK_THROWS_AS(run_kernel_diagnostics(cfg, ctx, 0), HarnessError);

    cfg.variant = Variant::rwt_kernel_ofu;
    cfg.episodes = 5;
    cfg.schedule.total_episodes = 5;
    cfg.schedule.kind = ExplorationSchedule::Kind::ucb_greedy;
    RunContext kctx = prepare_context(cfg);
    auto diags = run_kernel_diagnostics(cfg, kctx, 0);
    CHECK(diags.size() ==
          static_cast<std::size_t>(cfg.episodes) * cfg.env.horizon);
    for (const auto& d : diags) {
        CHECK(d.n >= 0);
        CHECK(d.effective_dimension >= 0.0);
        CHECK(d.information_gain >= 0.0);
        // Target samples arrive one per stage per episode.
        CHECK(d.n == d.episode);
    }
}

TEST_CASE("CSV export schema and accumulation") {
    SeedCurve curve{7,
                    {{1, 1.5, 0.25, 0.9, 0.0},
                     {2, 2.0, 0.5, 0.5, 0.0}}};
    std::string csv = curve_to_csv(curve);
    CHECK(csv.rfind("episode,return,regret,cum_regret,epsilon\n", 0) == 0);
    CHECK(csv.find("\n1,1.5,0.25,0.25,0.9\n") != std::string::npos);
    CHECK(csv.find("\n2,2,0.5,0.75,0.5\n") != std::string::npos);
}

TEST_CASE("summary JSON carries the headline fields") {
    ExperimentConfig cfg = small_tabular_config();
    cfg.seeds = {0, 1};
    ExperimentResult result = run_experiment(cfg);
    json j = summary_to_json(cfg, result);
    CHECK(j.at("format") == "rwtq-summary-v1");
    CHECK(j.at("variant") == "rwt_tabular");
    CHECK(j.at("env_hash") == result.env_hash);
    CHECK(j.at("num_seeds") == 2);
    CHECK(j.at("per_seed").size() == 2);
    CHECK(j.at("mean_return").size() ==
          static_cast<std::size_t>(cfg.episodes));
    // Final window covers at most the last 50 episodes (here all 20).
    double mean = 0.0;
    for (double r : result.aggregate.mean_return) mean += r;
    mean /= cfg.episodes;
    CHECK(j.at("final_window").at("mean_return").get<double>() ==
          doctest::Approx(mean));
}
