#include "rwtq/checks.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "rwtq/align.hpp"
#include "rwtq/harness.hpp"
#include "rwtq/kernel.hpp"
#include "rwtq/learners.hpp"
#include "rwtq/rng.hpp"

namespace rwtq {

namespace {

constexpr int kMaxMessages = 10;

void record_failure(SuiteResult& suite, std::string msg) {
    ++suite.failures;
    if (static_cast<int>(suite.messages.size()) < kMaxMessages)
        suite.messages.push_back(std::move(msg));
}

}  // namespace

MdpPair random_mdp_pair(int num_states, int num_actions, int horizon,
                        double gamma, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> mass(0.1, 1.0);
    std::uniform_real_distribution<double> reward(-1.0, 1.0);

    // Full-support rows guarantee absolute continuity of any other task
    // with the same state space.
    auto full_row = [&]() {
        TransitionRow row;
        double total = 0.0;
        for (int s = 0; s < num_states; ++s) {
            double w = mass(rng);
            row.push_back({s, w});
            total += w;
        }
        for (auto& e : row) e.prob /= total;
        return row;
    };

    auto build = [&]() {
        std::vector<std::vector<TransitionRow>> trans(horizon);
        std::vector<std::vector<double>> rewards(horizon);
        for (int h = 0; h < horizon; ++h) {
            for (int sa = 0; sa < num_states * num_actions; ++sa) {
                trans[h].push_back(full_row());
                rewards[h].push_back(reward(rng));
            }
        }
        return std::make_shared<EpisodicMdp>(num_states, num_actions, horizon,
                                             gamma, std::move(trans),
                                             std::move(rewards), 0);
    };

    MdpPair pair;
    pair.target = build();
    pair.source = build();
    return pair;
}

SuiteResult verify_alignment(int num_pairs, int values_per_pair,
                             double tolerance, std::uint64_t seed) {
    SuiteResult suite;
    suite.name = "alignment";
    auto rng = make_rng(derive_seed(seed, "verify/alignment"));
    std::uniform_int_distribution<int> states(2, 10), actions(1, 4),
        stages(1, 4);
    std::uniform_real_distribution<double> value(-5.0, 5.0);

    for (int p = 0; p < num_pairs; ++p) {
        int S = states(rng), A = actions(rng), H = stages(rng);
        MdpPair pair = random_mdp_pair(S, A, H, 0.95, rng);
        auto provider =
            DensityRatioProvider::exact_tabular(pair.target, pair.source);

        for (int rep = 0; rep < values_per_pair; ++rep) {
            std::vector<double> v(S);
            for (double& x : v) x = value(rng);
            for (int h = 1; h <= H; ++h) {
                for (int s = 0; s < S; ++s) {
                    for (int a = 0; a < A; ++a) {
                        ++suite.total;
                        double target_backup = pair.target->reward(h, s, a);
                        for (const auto& e :
                             pair.target->transition_row(h, s, a))
                            target_backup += pair.target->discount() *
                                             e.prob * v[e.next_state];
                        double aligned = rwt_backup_exact(
                            *pair.source, provider, v, h, s, a);
                        double gap = pair.target->reward(h, s, a) -
                                     pair.source->reward(h, s, a);
                        double resid =
                            std::abs((target_backup - aligned) - gap);
                        if (!(resid <= tolerance))
                            record_failure(
                                suite,
                                "alignment residual " + std::to_string(resid) +
                                    " at pair " + std::to_string(p) +
                                    " (h,s,a)=(" + std::to_string(h) + "," +
                                    std::to_string(s) + "," +
                                    std::to_string(a) + ")");
                    }
                }
            }
        }
    }
    return suite;
}

SuiteResult verify_lemmas(int self_normalized_instances,
                          int elliptical_instances, std::uint64_t seed) {
    SuiteResult suite;
    suite.name = "lemmas";
    auto rng = make_rng(derive_seed(seed, "verify/lemmas"));
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_int_distribution<int> dims(1, 5);

    for (int i = 0; i < self_normalized_instances; ++i) {
        ++suite.total;
        int d = dims(rng);
        std::uniform_int_distribution<int> steps(0, 50);
        int t = steps(rng);
        std::vector<Eigen::VectorXd> phis(t);
        std::vector<double> eps(t);
        for (int s = 0; s < t; ++s) {
            phis[s] = Eigen::VectorXd::NullaryExpr(
                d, [&](Eigen::Index) { return gauss(rng); });
            eps[s] = gauss(rng);
        }
        Eigen::MatrixXd a = Eigen::MatrixXd::NullaryExpr(
            d, d, [&](Eigen::Index, Eigen::Index) { return gauss(rng); });
        Eigen::MatrixXd lambda0 =
            Eigen::MatrixXd::Identity(d, d) + a.transpose() * a;
        BoundCheck check = self_normalized_check(phis, eps, lambda0);
        if (!check.holds)
            record_failure(suite, "self-normalized bound violated: lhs " +
                                      std::to_string(check.lhs) + " > rhs " +
                                      std::to_string(check.rhs));
    }

    std::uniform_real_distribution<double> lam(1.0, 2.0);
    for (int i = 0; i < elliptical_instances; ++i) {
        ++suite.total;
        int d = dims(rng);
        std::uniform_int_distribution<int> steps(1, 60);
        int t = steps(rng);
        std::vector<Eigen::VectorXd> phis(t);
        for (int s = 0; s < t; ++s) {
            Eigen::VectorXd phi = Eigen::VectorXd::NullaryExpr(
                d, [&](Eigen::Index) { return gauss(rng); });
            double norm = phi.norm();
            if (norm > 1.0) phi /= norm;
            phis[s] = phi;
        }
        BoundCheck check = elliptical_potential_check(phis, lam(rng));
        if (!check.holds)
            record_failure(suite, "elliptical potential bound violated: lhs " +
                                      std::to_string(check.lhs) + " > rhs " +
                                      std::to_string(check.rhs));
    }
    return suite;
}

SuiteResult verify_krr(int num_designs, double tolerance, std::uint64_t seed) {
    SuiteResult suite;
    suite.name = "krr";
    auto rng = make_rng(derive_seed(seed, "verify/krr"));
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_int_distribution<int> dims(1, 4), sizes(1, 30),
        atoms(0, 2);
    std::uniform_real_distribution<double> ridge(0.1, 2.0), ell(0.5, 2.0);

    for (int i = 0; i < num_designs; ++i) {
        // --- Dense-inverse oracle on an RBF design. ---
        int d = dims(rng), n = sizes(rng);
        double lambda = ridge(rng);
        KernelSpec spec = KernelSpec::rbf(ell(rng));
        std::vector<Eigen::VectorXd> pts(n);
        Eigen::VectorXd y(n);
        for (int k = 0; k < n; ++k) {
            pts[k] = Eigen::VectorXd::NullaryExpr(
                d, [&](Eigen::Index) { return gauss(rng); });
            y[k] = gauss(rng);
        }
        KrrModel model = krr_fit(pts, y, spec, lambda);
        Eigen::MatrixXd gram = gram_matrix(spec, pts);
        Eigen::MatrixXd reg =
            gram + lambda * Eigen::MatrixXd::Identity(n, n);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(reg);
        Eigen::VectorXd alpha_dense = lu.solve(y);

        for (int q = 0; q < 5; ++q) {
            ++suite.total;
            Eigen::VectorXd x = Eigen::VectorXd::NullaryExpr(
                d, [&](Eigen::Index) { return gauss(rng); });
            Eigen::VectorXd kn(n);
            for (int k = 0; k < n; ++k)
                kn[k] = kernel_eval(spec, pts[k], x);
            double pred_oracle = kn.dot(alpha_dense);
            double var_oracle =
                (kernel_eval(spec, x, x) - kn.dot(lu.solve(kn))) / lambda;
            double pred = model.predict(x);
            double var = posterior_variance(model.uncertainty(), x);
            if (std::abs(pred - pred_oracle) > tolerance ||
                std::abs(var - var_oracle) > tolerance)
                record_failure(
                    suite, "rbf dense-oracle mismatch: |dpred| " +
                               std::to_string(std::abs(pred - pred_oracle)) +
                               " |dvar| " +
                               std::to_string(std::abs(var - var_oracle)));
        }

        // --- Explicit finite-feature oracle: the delta kernel over three
        // atoms has feature map phi(x) = e_{atom(x)}. ---
        int m = sizes(rng);
        double lam2 = ridge(rng);
        KernelSpec delta = KernelSpec::tabular_delta(1.0);
        std::vector<Eigen::VectorXd> dpts(m);
        Eigen::VectorXd dy(m);
        Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(m, 3);
        for (int k = 0; k < m; ++k) {
            int atom = atoms(rng);
            dpts[k] = Eigen::VectorXd::Constant(1, double(atom));
            phi(k, atom) = 1.0;
            dy[k] = gauss(rng);
        }
        KrrModel dmodel = krr_fit(dpts, dy, delta, lam2);
        Eigen::MatrixXd cov = phi.transpose() * phi +
                              lam2 * Eigen::MatrixXd::Identity(3, 3);
        Eigen::FullPivLU<Eigen::MatrixXd> covlu(cov);
        Eigen::VectorXd w = covlu.solve(phi.transpose() * dy);

        for (int atom = 0; atom < 3; ++atom) {
            ++suite.total;
            Eigen::VectorXd x = Eigen::VectorXd::Constant(1, double(atom));
            Eigen::VectorXd f = Eigen::VectorXd::Zero(3);
            f[atom] = 1.0;
            double pred_oracle = w[atom];
            double var_oracle = f.dot(covlu.solve(f));
            double pred = dmodel.predict(x);
            double var = posterior_variance(dmodel.uncertainty(), x);
            if (std::abs(pred - pred_oracle) > tolerance ||
                std::abs(var - var_oracle) > tolerance)
                record_failure(
                    suite, "feature-oracle mismatch: |dpred| " +
                               std::to_string(std::abs(pred - pred_oracle)) +
                               " |dvar| " +
                               std::to_string(std::abs(var - var_oracle)));
        }
    }
    return suite;
}

SuiteResult verify_optimism(int num_seeds, int episodes,
                            double required_fraction, std::uint64_t seed) {
    SuiteResult suite;
    suite.name = "optimism";
    constexpr int S = 2, A = 2, H = 2;
    constexpr double kGamma = 1.0;  // keeps Q* <= H - h + 1 exactly
    constexpr int kSourceEpisodes = 128;

    auto pair_rng = make_rng(derive_seed(seed, "verify/optimism/env"));
    MdpPair pair = random_mdp_pair(S, A, H, kGamma, pair_rng);
    // Rewards in [0,1] so the optimistic clip ceiling H-h+1 upper-bounds Q*.
    {
        std::vector<std::vector<TransitionRow>> tt, ts;
        std::vector<std::vector<double>> rt, rs;
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int h = 1; h <= H; ++h) {
            tt.push_back(pair.target->transition_table(h));
            ts.push_back(pair.source->transition_table(h));
            std::vector<double> r0(S * A), rm(S * A);
            for (int sa = 0; sa < S * A; ++sa) {
                r0[sa] = unit(pair_rng);
                rm[sa] = unit(pair_rng);
            }
            rt.push_back(std::move(r0));
            rs.push_back(std::move(rm));
        }
        pair.target = std::make_shared<EpisodicMdp>(
            S, A, H, kGamma, std::move(tt), std::move(rt), 0);
        pair.source = std::make_shared<EpisodicMdp>(
            S, A, H, kGamma, std::move(ts), std::move(rs), 0);
    }

    auto provider =
        DensityRatioProvider::exact_tabular(pair.target, pair.source);
    ValueTables optimal = value_iteration(*pair.target);
    Encoder encode = index_encoder();
    KernelSpec spec_k = KernelSpec::tabular_delta(1.0);
    KernelSpec spec_kt = KernelSpec::tabular_delta(1.0);
    BonusParams params;
    params.lambda = 1.0;
    params.lambda_tilde = 1.0;
    params.beta_scale_source = 2.0;
    params.beta_scale_target = 2.0;
    params.horizon = H;

    for (int run = 0; run < num_seeds; ++run) {
        auto src_rng =
            make_rng(derive_seed(seed, "verify/optimism/source", run));
        auto roll_rng =
            make_rng(derive_seed(seed, "verify/optimism/rollout", run));
        SourcePool pool = collect_source_pool({*pair.source},
                                              kSourceEpisodes, src_rng);

        std::vector<std::vector<TransitionSample>> tgt_buf(H);
        std::vector<std::vector<double>> q_opt(
            H, std::vector<double>(S * A, 0.0));
        for (int h = 1; h <= H; ++h)
            for (int sa = 0; sa < S * A; ++sa)
                q_opt[h - 1][sa] = double(H - h + 1);

        // Static source design: fit once, re-solve the dual weights for
        // fresh pseudo-labels each episode.
        std::vector<KrrModel> base_models;
        bool base_ready = false;

        for (int n = 1; n <= episodes; ++n) {
            MixedPolicy policy{greedy_policy(*pair.target, q_opt), 0.0};
            Trajectory traj = rollout(*pair.target, policy, roll_rng);
            for (const auto& smp : traj.samples)
                tgt_buf[smp.stage - 1].push_back(smp);

            std::vector<double> v_next(S, 0.0);
            for (int h = H; h >= 1; --h) {
                const auto& src = pool.buffers[0][h - 1];
                if (!base_ready) {
                    if (h == 1) base_ready = true;
                    if (base_models.size() < static_cast<std::size_t>(H))
                        base_models.resize(H, KrrModel(spec_k, params.lambda));
                    base_models[h - 1] = stage1_fit_kernel(
                        {src}, provider, v_next, kGamma, encode, spec_k,
                        params.lambda);
                } else {
                    Eigen::VectorXd y(src.size());
                    for (std::size_t i = 0; i < src.size(); ++i) {
                        double omega = provider.ratio(h, src[i].state,
                                                      src[i].action,
                                                      src[i].next_state);
                        y[i] = rwt_pseudo_label(src[i], omega, v_next, kGamma)
                                   .value;
                    }
                    base_models[h - 1].refit_targets(y);
                }
                KrrModel delta_model = stage2_fit_kernel(
                    tgt_buf[h - 1], base_models[h - 1], v_next, kGamma,
                    encode, spec_kt, params.lambda_tilde);

                std::vector<double> v_cur(S, 0.0);
                for (int s = 0; s < S; ++s) {
                    double best = 0.0;
                    for (int a = 0; a < A; ++a) {
                        Eigen::VectorXd x = encode(s, a);
                        double bonus = compute_bonus(
                            base_models[h - 1].uncertainty(),
                            delta_model.uncertainty(), x, params,
                            static_cast<int>(tgt_buf[h - 1].size()),
                            static_cast<int>(src.size()));
                        double val = base_models[h - 1].predict(x) +
                                     delta_model.predict(x) + bonus;
                        val = clip_optimistic(val, h, H);
                        q_opt[h - 1][s * A + a] = val;
                        best = a == 0 ? val : std::max(best, val);
                    }
                    v_cur[s] = best;
                }
                v_next = v_cur;
            }

            ++suite.total;
            bool dominated = true;
            for (int h = 1; h <= H && dominated; ++h)
                for (int sa = 0; sa < S * A; ++sa)
                    if (q_opt[h - 1][sa] < optimal.q[h - 1][sa] - 1e-9) {
                        dominated = false;
                        break;
                    }
            if (!dominated)
                record_failure(suite, "optimism violated at run " +
                                          std::to_string(run) + ", episode " +
                                          std::to_string(n));
        }
    }

    // The suite passes when the optimistic fraction clears the threshold,
    // not only when every single episode is optimistic.
    double fraction =
        suite.total > 0
            ? 1.0 - double(suite.failures) / double(suite.total)
            : 0.0;
    suite.messages.insert(suite.messages.begin(),
                          "optimistic fraction: " + std::to_string(fraction) +
                              " (required >= " +
                              std::to_string(required_fraction) + ")");
    if (fraction >= required_fraction) suite.failures = 0;
    return suite;
}

std::vector<SuiteResult> run_all_suites() {
    return {verify_alignment(), verify_lemmas(), verify_krr(),
            verify_optimism()};
}

}  // namespace rwtq
