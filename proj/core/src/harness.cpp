#include "rwtq/harness.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>

#include "rwtq/align.hpp"
#include "rwtq/kernel.hpp"
#include "rwtq/learners.hpp"
#include "rwtq/rng.hpp"

namespace rwtq {

namespace {

std::string fmt_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double trajectory_return(const Trajectory& traj) {
    double total = 0.0;
    for (const auto& s : traj.samples) total += s.reward;
    return total;
}

// Divergence guard shared by all variants: every table entry must stay
// finite and within 10 * H * max|R| of zero.
void check_table(const std::vector<double>& vals, double limit, int episode,
                 int stage) {
    for (double v : vals) {
        if (!std::isfinite(v) || std::abs(v) > limit) {
            throw HarnessError("q-value divergence at episode " +
                               std::to_string(episode) + ", stage " +
                               std::to_string(stage) + ": value " +
                               fmt_double(v) + " exceeds limit " +
                               fmt_double(limit));
        }
    }
}

double divergence_limit(const GridEnvironment& env) {
    double max_r = env.target.max_abs_reward();
    for (const auto& src : env.sources)
        max_r = std::max(max_r, src.max_abs_reward());
    return 10.0 * env.target.horizon() * std::max(1.0, max_r);
}

// Joint affine map of every task's rewards into [0,1]; the shift/scale is
// shared so the additive source-target reward structure is preserved.
GridEnvironment normalize_env_rewards(const GridEnvironment& env) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    auto scan = [&](const EpisodicMdp& mdp) {
        for (int h = 1; h <= mdp.horizon(); ++h)
            for (double r : mdp.reward_table(h)) {
                lo = std::min(lo, r);
                hi = std::max(hi, r);
            }
    };
    scan(env.target);
    for (const auto& src : env.sources) scan(src);
    const double span = hi - lo;
    auto remap = [&](const EpisodicMdp& mdp) {
        std::vector<std::vector<TransitionRow>> trans;
        std::vector<std::vector<double>> rewards;
        for (int h = 1; h <= mdp.horizon(); ++h) {
            trans.push_back(mdp.transition_table(h));
            std::vector<double> row = mdp.reward_table(h);
            for (double& r : row) r = span > 0.0 ? (r - lo) / span : 0.0;
            rewards.push_back(std::move(row));
        }
        return EpisodicMdp(mdp.num_states(), mdp.num_actions(), mdp.horizon(),
                           mdp.discount(), std::move(trans),
                           std::move(rewards), mdp.initial_state());
    };
    GridEnvironment out{env.spec, remap(env.target), {}};
    out.sources.reserve(env.sources.size());
    for (const auto& src : env.sources) out.sources.push_back(remap(src));
    return out;
}

json sample_to_json(const TransitionSample& s) {
    return json::array(
        {s.task_id, s.stage, s.state, s.action, s.reward, s.next_state});
}

TransitionSample sample_from_json(const json& j) {
    if (!j.is_array() || j.size() != 6)
        throw SerializeError("malformed transition sample");
    TransitionSample s;
    s.task_id = j[0].get<int>();
    s.stage = j[1].get<int>();
    s.state = j[2].get<int>();
    s.action = j[3].get<int>();
    s.reward = j[4].get<double>();
    s.next_state = j[5].get<int>();
    return s;
}

}  // namespace

std::size_t SourcePool::total_samples() const {
    std::size_t n = 0;
    for (const auto& task : buffers)
        for (const auto& stage : task) n += stage.size();
    return n;
}

SourcePool collect_source_pool(const std::vector<EpisodicMdp>& sources,
                               int episodes_per_source, std::mt19937_64& rng) {
    if (episodes_per_source < 0)
        throw HarnessError("episodes_per_source must be non-negative");
    SourcePool pool;
    pool.buffers.resize(sources.size());
    for (std::size_t m = 0; m < sources.size(); ++m) {
        const EpisodicMdp& src = sources[m];
        pool.buffers[m].resize(src.horizon());
        // Uniform-random behavior policy for offline source collection.
        MixedPolicy uniform{DeterministicPolicy(
                                src.horizon(),
                                std::vector<int>(src.num_states(), 0)),
                            1.0};
        for (int e = 0; e < episodes_per_source; ++e) {
            Trajectory traj = rollout(src, uniform, rng);
            for (auto& smp : traj.samples) {
                smp.task_id = static_cast<int>(m) + 1;
                pool.buffers[m][smp.stage - 1].push_back(smp);
            }
        }
    }
    return pool;
}

json pool_to_json(const SourcePool& pool, const std::string& env_hash) {
    json tasks = json::array();
    for (const auto& task : pool.buffers) {
        json stages = json::array();
        for (const auto& stage : task) {
            json samples = json::array();
            for (const auto& s : stage) samples.push_back(sample_to_json(s));
            stages.push_back(std::move(samples));
        }
        tasks.push_back(std::move(stages));
    }
    return json{{"format", "rwtq-pool-v1"},
                {"env_hash", env_hash},
                {"tasks", std::move(tasks)}};
}

SourcePool pool_from_json(const json& j) {
    if (!j.is_object() || j.value("format", "") != "rwtq-pool-v1")
        throw SerializeError("not a rwtq-pool-v1 document");
    SourcePool pool;
    for (const auto& task : j.at("tasks")) {
        std::vector<std::vector<TransitionSample>> stages;
        for (const auto& stage : task) {
            std::vector<TransitionSample> samples;
            for (const auto& s : stage) samples.push_back(sample_from_json(s));
            stages.push_back(std::move(samples));
        }
        pool.buffers.push_back(std::move(stages));
    }
    return pool;
}

RunContext prepare_context(const ExperimentConfig& cfg) {
    GridEnvironment env =
        cfg.env_path.empty()
            ? build_random_reward_grid(cfg.env, cfg.gamma)
            : env_from_json(load_json(cfg.env_path));
    std::string env_hash = json_hash(env_to_json(env));

    if (cfg.variant == Variant::rwt_kernel_ofu && cfg.normalize_rewards)
        env = normalize_env_rewards(env);

    // Growth mode needs floor(kappa * n) samples per stage by episode n;
    // one source episode contributes one sample per stage.
    int episodes_per_source =
        cfg.kappa > 0.0
            ? static_cast<int>(std::ceil(cfg.kappa * cfg.episodes))
            : cfg.source_episodes;

    auto pool_rng =
        make_rng(derive_seed(env.spec.seed, "source-collect"));
    RunContext ctx{std::move(env), {}, {}, std::move(env_hash)};
    ctx.target_optimal = value_iteration(ctx.env.target);
    ctx.pool = collect_source_pool(ctx.env.sources, episodes_per_source,
                                   pool_rng);
    return ctx;
}

double compute_regret(const EpisodicMdp& target, const ValueTables& optimal,
                      const MixedPolicy& policy) {
    ValueTables achieved = evaluate_policy(target, policy);
    int s0 = target.initial_state();
    return optimal.v[0][s0] - achieved.v[0][s0];
}

namespace {

// Number of pool samples available per task at stage h by episode n.
// Static pools expose everything; growth mode exposes floor(kappa * n).
int stage_limit(const std::vector<TransitionSample>& buf, double kappa,
                int episode) {
    int size = static_cast<int>(buf.size());
    if (kappa <= 0.0) return size;
    return std::min(size, static_cast<int>(std::floor(kappa * episode)));
}

std::vector<EpisodeRecord> run_tabular_loop(const ExperimentConfig& cfg,
                                            const RunContext& ctx,
                                            std::uint64_t seed) {
    const EpisodicMdp& target = ctx.env.target;
    const int H = target.horizon();
    const int S = target.num_states();
    const int A = target.num_actions();
    const double limit = divergence_limit(ctx.env);
    const bool is_rwt = cfg.variant == Variant::rwt_tabular;
    const bool is_pooled = cfg.variant == Variant::naive_pooled;

    // All grid tasks share transitions, so the exact density ratio is
    // identically one.
    auto provider = DensityRatioProvider::identity();

    TabularQ q_base(H, S, A, 0.0);
    TabularQ delta(H, S, A, 0.0);
    TabularQ q(H, S, A, 0.0);  // baselines

    std::vector<std::vector<TransitionSample>> target_buf(H);

    auto rollout_rng = make_rng(derive_seed(seed, "rollout"));
    auto agent_rng = make_rng(derive_seed(seed, "agent"));

    auto q_table = [&](int h) {
        std::vector<double> row(static_cast<std::size_t>(S) * A);
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a)
                row[s * A + a] = is_rwt
                                     ? q_base.at(h, s, a) + delta.at(h, s, a)
                                     : q.at(h, s, a);
        return row;
    };

    std::vector<EpisodeRecord> records;
    records.reserve(cfg.episodes);
    for (int n = 1; n <= cfg.episodes; ++n) {
        auto t0 = std::chrono::steady_clock::now();
        double eps = cfg.schedule.epsilon(n);

        std::vector<std::vector<double>> q_now(H);
        for (int h = 1; h <= H; ++h) q_now[h - 1] = q_table(h);
        MixedPolicy policy{greedy_policy(target, q_now), eps};

        double regret = compute_regret(target, ctx.target_optimal, policy);
        Trajectory traj = rollout(target, policy, rollout_rng);
        for (const auto& smp : traj.samples)
            target_buf[smp.stage - 1].push_back(smp);

        // Synchronous backward updates: one replay minibatch of batch_size
        // transitions per regression per stage, drawn uniformly (with
        // replacement) from that stage's buffers, so stage h reads the
        // stage-(h+1) values refreshed earlier in the same pass.
        std::vector<std::vector<int>> limits(ctx.pool.buffers.size(),
                                             std::vector<int>(H, 0));
        for (std::size_t m = 0; m < ctx.pool.buffers.size(); ++m)
            for (int h = 1; h <= H; ++h)
                limits[m][h - 1] =
                    stage_limit(ctx.pool.buffers[m][h - 1], cfg.kappa, n);

        auto draw_source = [&](int h) -> const TransitionSample& {
            long avail = 0;
            for (std::size_t m = 0; m < limits.size(); ++m)
                avail += limits[m][h - 1];
            std::uniform_int_distribution<long> dist(0, avail - 1);
            long u = dist(agent_rng);
            for (std::size_t m = 0; m < limits.size(); ++m) {
                if (u < limits[m][h - 1])
                    return ctx.pool.buffers[m][h - 1][u];
                u -= limits[m][h - 1];
            }
            return ctx.pool.buffers.back()[h - 1].back();  // unreachable
        };
        auto stage_source_count = [&](int h) {
            long avail = 0;
            for (std::size_t m = 0; m < limits.size(); ++m)
                avail += limits[m][h - 1];
            return avail;
        };

        for (int pass = 0; pass < cfg.replay_passes; ++pass)
        for (int h = H; h >= 1; --h) {
            long n_src = stage_source_count(h);
            long n_tgt = static_cast<long>(target_buf[h - 1].size());
            if (is_rwt) {
                std::vector<TransitionSample> src_batch, tgt_batch;
                if (n_src > 0) {
                    src_batch.reserve(cfg.batch_size);
                    for (int i = 0; i < cfg.batch_size; ++i)
                        src_batch.push_back(draw_source(h));
                }
                if (n_tgt > 0) {
                    tgt_batch.reserve(cfg.batch_size);
                    std::uniform_int_distribution<long> dist(0, n_tgt - 1);
                    for (int i = 0; i < cfg.batch_size; ++i)
                        tgt_batch.push_back(
                            target_buf[h - 1][dist(agent_rng)]);
                }
                tabular_two_stage_update(q_base, delta, src_batch, tgt_batch,
                                         provider, cfg.gamma, cfg.lr);
            } else {
                long total = is_pooled ? n_src + n_tgt : n_tgt;
                if (total == 0) continue;
                std::vector<TransitionSample> batch;
                batch.reserve(cfg.batch_size);
                std::uniform_int_distribution<long> dist(0, total - 1);
                for (int i = 0; i < cfg.batch_size; ++i) {
                    long u = dist(agent_rng);
                    if (is_pooled && u < n_src)
                        batch.push_back(draw_source(h));
                    else
                        batch.push_back(
                            target_buf[h - 1][is_pooled ? u - n_src
                                                        : u]);
                }
                tabular_baseline_update(q, batch, cfg.gamma, cfg.lr,
                                        is_pooled
                                            ? BaselineVariant::naive_pooled
                                            : BaselineVariant::target_only);
            }
        }

        for (int h = 1; h <= H; ++h) {
            if (is_rwt) {
                check_table(q_base.values()[h - 1], limit, n, h);
                check_table(delta.values()[h - 1], limit, n, h);
            } else {
                check_table(q.values()[h - 1], limit, n, h);
            }
        }

        auto t1 = std::chrono::steady_clock::now();
        EpisodeRecord rec;
        rec.episode = n;
        rec.episode_return = trajectory_return(traj);
        rec.regret = regret;
        rec.epsilon = eps;
        rec.wall_ms =
            std::chrono::duration<double, std::milli>(t1 - t0).count();
        records.push_back(rec);
    }
    return records;
}

std::vector<EpisodeRecord> run_kernel_loop(
    const ExperimentConfig& cfg, const RunContext& ctx, std::uint64_t seed,
    std::vector<DiagnosticsRecord>* diagnostics) {
    const EpisodicMdp& target = ctx.env.target;
    const int H = target.horizon();
    const int S = target.num_states();
    const int A = target.num_actions();
    const double limit = divergence_limit(ctx.env);
    const KernelSpec spec_k = cfg.baseline_kernel();
    const KernelSpec spec_kt = cfg.correction_kernel();
    auto provider = DensityRatioProvider::identity();

    Encoder encode = grid_encoder(ctx.env.spec);
    std::vector<Eigen::VectorXd> queries;
    queries.reserve(static_cast<std::size_t>(S) * A);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) queries.push_back(encode(s, a));

    // Per-stage growing designs. The source design is static unless kappa
    // growth is enabled; the target design grows one sample per episode.
    std::vector<IncrementalKrr> src_models, tgt_models;
    std::vector<std::vector<TransitionSample>> src_samples(H), tgt_samples(H);
    std::vector<int> src_appended(H, 0);
    for (int h = 1; h <= H; ++h) {
        src_models.emplace_back(spec_k, cfg.bonus.lambda, queries);
        tgt_models.emplace_back(spec_kt, cfg.bonus.lambda_tilde, queries);
        for (const auto& task : ctx.pool.buffers)
            for (const auto& smp : task[h - 1])
                src_samples[h - 1].push_back(smp);
    }
    auto append_sources_up_to = [&](int h, int count) {
        auto& buf = src_samples[h - 1];
        count = std::min(count, static_cast<int>(buf.size()));
        for (int& i = src_appended[h - 1]; i < count; ++i)
            src_models[h - 1].append(encode(buf[i].state, buf[i].action));
    };
    if (cfg.kappa <= 0.0)
        for (int h = 1; h <= H; ++h)
            append_sources_up_to(h, static_cast<int>(src_samples[h - 1].size()));

    // Optimistic Q tables, flattened over (s,a). Initialized at the clip
    // ceiling so unexplored pairs look maximally promising.
    std::vector<Eigen::VectorXd> q_opt(H);
    for (int h = 1; h <= H; ++h) {
        double init = cfg.clip_values ? static_cast<double>(H - h + 1)
                                      : static_cast<double>(H);
        q_opt[h - 1] = Eigen::VectorXd::Constant(
            static_cast<Eigen::Index>(S) * A, init);
    }

    auto rollout_rng = make_rng(derive_seed(seed, "rollout"));

    std::vector<EpisodeRecord> records;
    records.reserve(cfg.episodes);
    for (int n = 1; n <= cfg.episodes; ++n) {
        auto t0 = std::chrono::steady_clock::now();
        double eps = cfg.schedule.epsilon(n);

        std::vector<std::vector<double>> q_now(H);
        for (int h = 1; h <= H; ++h)
            q_now[h - 1].assign(q_opt[h - 1].data(),
                                q_opt[h - 1].data() + q_opt[h - 1].size());
        MixedPolicy policy{greedy_policy(target, q_now), eps};

        double regret = compute_regret(target, ctx.target_optimal, policy);
        Trajectory traj = rollout(target, policy, rollout_rng);
        for (const auto& smp : traj.samples) {
            tgt_samples[smp.stage - 1].push_back(smp);
            tgt_models[smp.stage - 1].append(encode(smp.state, smp.action));
        }
        if (cfg.kappa > 0.0)
            for (int h = 1; h <= H; ++h)
                append_sources_up_to(
                    h, static_cast<int>(std::floor(cfg.kappa * n)));

        Eigen::VectorXd v_next = Eigen::VectorXd::Zero(S);
        for (int h = H; h >= 1; --h) {
            const int n_src = src_models[h - 1].size();
            const int n_tgt = tgt_models[h - 1].size();

            Eigen::VectorXd base =
                Eigen::VectorXd::Zero(static_cast<Eigen::Index>(S) * A);
            if (n_src > 0) {
                Eigen::VectorXd y(n_src);
                for (int i = 0; i < n_src; ++i) {
                    const auto& smp = src_samples[h - 1][i];
                    double omega = provider.ratio(h, smp.state, smp.action,
                                                  smp.next_state);
                    y[i] = smp.reward + cfg.gamma * omega *
                                            v_next[smp.next_state];
                }
                base = src_models[h - 1].predict_queries(
                    src_models[h - 1].solve_targets(y));
            }

            Eigen::VectorXd corr =
                Eigen::VectorXd::Zero(static_cast<Eigen::Index>(S) * A);
            if (n_tgt > 0) {
                Eigen::VectorXd z(n_tgt);
                for (int i = 0; i < n_tgt; ++i) {
                    const auto& smp = tgt_samples[h - 1][i];
                    z[i] = smp.reward + cfg.gamma * v_next[smp.next_state] -
                           base[target.sa_index(smp.state, smp.action)];
                }
                corr = tgt_models[h - 1].predict_queries(
                    tgt_models[h - 1].solve_targets(z));
            }

            double bm = beta_source(cfg.bonus, n_src);
            double b0 = beta_target(cfg.bonus, n_tgt);
            Eigen::VectorXd bonus =
                bm * src_models[h - 1].variance_queries().cwiseSqrt() +
                b0 * tgt_models[h - 1].variance_queries().cwiseSqrt();

            Eigen::VectorXd qh = base + corr + bonus;
            if (cfg.clip_values) {
                double cap = static_cast<double>(H - h + 1);
                qh = qh.cwiseMax(0.0).cwiseMin(cap);
            }
            q_opt[h - 1] = qh;

            for (int s = 0; s < S; ++s) {
                double best = qh[static_cast<Eigen::Index>(s) * A];
                for (int a = 1; a < A; ++a)
                    best = std::max(
                        best, qh[static_cast<Eigen::Index>(s) * A + a]);
                v_next[s] = best;
            }

            if (diagnostics) {
                std::vector<Eigen::VectorXd> pts;
                pts.reserve(n_tgt);
                for (const auto& smp : tgt_samples[h - 1])
                    pts.push_back(encode(smp.state, smp.action));
                DiagnosticsRecord d;
                d.episode = n;
                d.stage = h;
                d.n = n_tgt;
                if (n_tgt > 0) {
                    Eigen::MatrixXd gram = gram_matrix(spec_kt, pts);
                    d.information_gain =
                        information_gain(gram, cfg.bonus.lambda_tilde);
                    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
                    std::vector<double> eigs(
                        es.eigenvalues().data(),
                        es.eigenvalues().data() + es.eigenvalues().size());
                    for (double& e : eigs) e = std::max(e, 0.0);
                    d.effective_dimension =
                        effective_dimension(eigs, cfg.bonus.lambda_tilde);
                }
                d.coverage_constant =
                    n_src * src_models[h - 1].variance_queries().maxCoeff();
                diagnostics->push_back(d);
            }
        }

        for (int h = 1; h <= H; ++h) {
            std::vector<double> vals(q_opt[h - 1].data(),
                                     q_opt[h - 1].data() +
                                         q_opt[h - 1].size());
            check_table(vals, limit, n, h);
        }

        auto t1 = std::chrono::steady_clock::now();
        EpisodeRecord rec;
        rec.episode = n;
        rec.episode_return = trajectory_return(traj);
        rec.regret = regret;
        rec.epsilon = eps;
        rec.wall_ms =
            std::chrono::duration<double, std::milli>(t1 - t0).count();
        records.push_back(rec);
    }
    return records;
}

}  // namespace

std::vector<EpisodeRecord> run_episode_loop(const ExperimentConfig& cfg,
                                            const RunContext& ctx,
                                            std::uint64_t seed) {
    if (cfg.variant == Variant::rwt_kernel_ofu)
        return run_kernel_loop(cfg, ctx, seed, nullptr);
    return run_tabular_loop(cfg, ctx, seed);
}

std::vector<DiagnosticsRecord> run_kernel_diagnostics(
    const ExperimentConfig& cfg, const RunContext& ctx, std::uint64_t seed) {
    if (cfg.variant != Variant::rwt_kernel_ofu)
        throw HarnessError(
            "diagnostics require the rwt_kernel_ofu variant");
    std::vector<DiagnosticsRecord> out;
    run_kernel_loop(cfg, ctx, seed, &out);
    return out;
}

SeedAggregate aggregate_seeds(const std::vector<SeedCurve>& runs) {
    if (runs.empty()) throw HarnessError("aggregate_seeds: no seed curves");
    const std::size_t len = runs[0].records.size();
    for (const auto& run : runs)
        if (run.records.size() != len)
            throw HarnessError(
                "aggregate_seeds: seed curves have mismatched lengths");

    const int n = static_cast<int>(runs.size());
    SeedAggregate agg;
    agg.num_seeds = n;
    agg.mean_return.resize(len);
    agg.stderr_return.resize(len);
    agg.mean_cum_regret.resize(len);
    agg.stderr_cum_regret.resize(len);

    std::vector<double> cum(n, 0.0);
    for (std::size_t i = 0; i < len; ++i) {
        double mr = 0.0, mc = 0.0;
        for (int k = 0; k < n; ++k) {
            cum[k] += runs[k].records[i].regret;
            mr += runs[k].records[i].episode_return;
            mc += cum[k];
        }
        mr /= n;
        mc /= n;
        double vr = 0.0, vc = 0.0;
        for (int k = 0; k < n; ++k) {
            double dr = runs[k].records[i].episode_return - mr;
            double dc = cum[k] - mc;
            vr += dr * dr;
            vc += dc * dc;
        }
        agg.mean_return[i] = mr;
        agg.mean_cum_regret[i] = mc;
        // Spread is the n-1 sample deviation; zero for a single seed.
        agg.stderr_return[i] = n > 1 ? std::sqrt(vr / (n - 1)) : 0.0;
        agg.stderr_cum_regret[i] = n > 1 ? std::sqrt(vc / (n - 1)) : 0.0;
    }
    return agg;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    RunContext ctx = prepare_context(cfg);
    ExperimentResult result;
    result.env_hash = ctx.env_hash;
    result.curves.reserve(cfg.seeds.size());
    for (std::uint64_t seed : cfg.seeds) {
        SeedCurve curve;
        curve.seed = seed;
        curve.records = run_episode_loop(cfg, ctx, seed);
        result.curves.push_back(std::move(curve));
    }
    result.aggregate = aggregate_seeds(result.curves);
    return result;
}

std::string curve_to_csv(const SeedCurve& curve) {
    std::string out = "episode,return,regret,cum_regret,epsilon\n";
    double cum = 0.0;
    for (const auto& rec : curve.records) {
        cum += rec.regret;
        out += std::to_string(rec.episode);
        out += ',';
        out += fmt_double(rec.episode_return);
        out += ',';
        out += fmt_double(rec.regret);
        out += ',';
        out += fmt_double(cum);
        out += ',';
        out += fmt_double(rec.epsilon);
        out += '\n';
    }
    return out;
}

json summary_to_json(const ExperimentConfig& cfg,
                     const ExperimentResult& result) {
    constexpr int kWindow = 50;
    json per_seed = json::array();
    std::vector<double> finals;
    for (const auto& curve : result.curves) {
        const auto& recs = curve.records;
        int lo = std::max(0, static_cast<int>(recs.size()) - kWindow);
        double mean = 0.0;
        int count = static_cast<int>(recs.size()) - lo;
        for (int i = lo; i < static_cast<int>(recs.size()); ++i)
            mean += recs[i].episode_return;
        if (count > 0) mean /= count;
        finals.push_back(mean);
        double cum = 0.0;
        for (const auto& r : recs) cum += r.regret;
        per_seed.push_back(json{{"seed", curve.seed},
                                {"final_window_return", mean},
                                {"cum_regret", cum}});
    }
    double fmean = 0.0;
    for (double f : finals) fmean += f;
    if (!finals.empty()) fmean /= static_cast<double>(finals.size());
    double fvar = 0.0;
    for (double f : finals) fvar += (f - fmean) * (f - fmean);
    double fsem = finals.size() > 1
                      ? std::sqrt(fvar / (finals.size() - 1)) /
                            std::sqrt(static_cast<double>(finals.size()))
                      : 0.0;

    return json{{"format", "rwtq-summary-v1"},
                {"variant", variant_name(cfg.variant)},
                {"config_hash", config_hash(cfg)},
                {"env_hash", result.env_hash},
                {"episodes", cfg.episodes},
                {"num_seeds", result.aggregate.num_seeds},
                {"final_window", json{{"window", kWindow},
                                      {"mean_return", fmean},
                                      {"sem_return", fsem}}},
                {"per_seed", std::move(per_seed)},
                {"mean_return", result.aggregate.mean_return},
                {"stderr_return", result.aggregate.stderr_return},
                {"mean_cum_regret", result.aggregate.mean_cum_regret},
                {"stderr_cum_regret", result.aggregate.stderr_cum_regret}};
}

}  // namespace rwtq
