// Command-line front end: environment generation, source collection,
// training runs, variant comparison, complexity diagnostics, and the
// self-verification suites.
//
// Exit codes: 0 success, 2 configuration error, 3 runtime abort,
// 4 verification failure.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "rwtq/checks.hpp"
#include "rwtq/config.hpp"
#include "rwtq/harness.hpp"
#include "rwtq/rng.hpp"

namespace fs = std::filesystem;
using namespace rwtq;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitVerify = 4;

ExperimentConfig build_config(const std::string& config_path,
                              const std::vector<std::string>& overrides) {
    ExperimentConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    for (const auto& kv : overrides) {
        auto pos = kv.find('=');
        if (pos == std::string::npos)
            throw ConfigError("--set expects key=value, got '" + kv + "'");
        apply_override(cfg, kv.substr(0, pos), kv.substr(pos + 1));
    }
    cfg.schedule.total_episodes = cfg.episodes;
    cfg.bonus.horizon = cfg.env.horizon;
    cfg.validate();
    return cfg;
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw HarnessError("cannot write " + path.string());
    out << text;
}

json make_manifest(const std::string& command, const ExperimentConfig& cfg,
                   const std::string& env_hash) {
    return json{{"format", "rwtq-manifest-v1"},
                {"tool_version", "0.1.0"},
                {"command", command},
                {"variant", variant_name(cfg.variant)},
                {"config_hash", config_hash(cfg)},
                {"env_hash", env_hash},
                {"seeds", cfg.seeds},
                {"config", serialize_config(cfg)}};
}

int cmd_gen_env(const std::string& config_path,
                const std::vector<std::string>& overrides,
                const std::string& out_path) {
    ExperimentConfig cfg = build_config(config_path, overrides);
    GridEnvironment env = build_random_reward_grid(cfg.env, cfg.gamma);
    json doc = env_to_json(env);
    save_json(out_path, doc);
    std::cout << "env_hash " << json_hash(doc) << "\n";
    std::cout << "states " << cfg.env.num_states() << " horizon "
              << cfg.env.horizon << " sources " << cfg.env.num_sources
              << "\n";
    return kExitOk;
}

int cmd_collect_source(const std::string& env_path, int episodes,
                       std::uint64_t seed, const std::string& out_path) {
    json env_doc = load_json(env_path);
    GridEnvironment env = env_from_json(env_doc);
    auto rng = make_rng(derive_seed(seed, "source-collect"));
    SourcePool pool = collect_source_pool(env.sources, episodes, rng);
    save_json(out_path, pool_to_json(pool, json_hash(env_doc)));
    std::cout << "collected " << pool.total_samples() << " samples from "
              << env.sources.size() << " source task(s)\n";
    return kExitOk;
}

int cmd_train(const std::string& config_path,
              const std::vector<std::string>& overrides,
              const std::string& out_dir) {
    ExperimentConfig cfg = build_config(config_path, overrides);
    ExperimentResult result = run_experiment(cfg);

    fs::path dir(out_dir);
    fs::create_directories(dir);
    std::string stem = variant_name(cfg.variant);
    for (const auto& curve : result.curves)
        write_text(dir / (stem + "_seed" + std::to_string(curve.seed) +
                          ".csv"),
                   curve_to_csv(curve));
    json summary = summary_to_json(cfg, result);
    save_json((dir / (stem + "_summary.json")).string(), summary);
    save_json((dir / "manifest.json").string(),
              make_manifest("train", cfg, result.env_hash));

    const auto& fw = summary.at("final_window");
    std::cout << stem << ": final-" << fw.at("window").get<int>()
              << " mean return " << fw.at("mean_return").get<double>()
              << " +/- " << fw.at("sem_return").get<double>() << " ("
              << result.aggregate.num_seeds << " seed(s))\n";
    return kExitOk;
}

int cmd_compare(const std::vector<std::string>& summary_paths,
                const std::string& out_dir) {
    if (summary_paths.empty())
        throw ConfigError("compare needs at least one summary file");
    std::vector<json> summaries;
    for (const auto& p : summary_paths) summaries.push_back(load_json(p));

    const std::string env_hash = summaries[0].value("env_hash", "");
    for (const auto& s : summaries)
        if (s.value("env_hash", "") != env_hash)
            throw ConfigError(
                "summaries were produced on different environments "
                "(env_hash mismatch)");

    std::string csv =
        "variant,episode,mean_return,stderr_return,mean_cum_regret,"
        "stderr_cum_regret\n";
    std::ostringstream table;
    table << "variant                final-window return        total cum "
             "regret\n";
    for (const auto& s : summaries) {
        std::string name = s.value("variant", "?");
        const auto& mr = s.at("mean_return");
        const auto& sr = s.at("stderr_return");
        const auto& mc = s.at("mean_cum_regret");
        const auto& sc = s.at("stderr_cum_regret");
        for (std::size_t i = 0; i < mr.size(); ++i) {
            csv += name + ',' + std::to_string(i + 1) + ',' +
                   std::to_string(mr[i].get<double>()) + ',' +
                   std::to_string(sr[i].get<double>()) + ',' +
                   std::to_string(mc[i].get<double>()) + ',' +
                   std::to_string(sc[i].get<double>()) + '\n';
        }
        const auto& fw = s.at("final_window");
        char line[160];
        std::snprintf(line, sizeof(line), "%-22s %10.4f +/- %-10.4f %12.4f\n",
                      name.c_str(), fw.at("mean_return").get<double>(),
                      fw.at("sem_return").get<double>(),
                      mc.empty() ? 0.0 : mc.back().get<double>());
        table << line;
    }

    fs::path dir(out_dir);
    fs::create_directories(dir);
    write_text(dir / "compare.csv", csv);
    write_text(dir / "compare.txt", table.str());
    std::cout << table.str();
    return kExitOk;
}

int cmd_diagnostics(const std::string& config_path,
                    const std::vector<std::string>& overrides,
                    const std::string& out_path) {
    ExperimentConfig cfg = build_config(config_path, overrides);
    if (cfg.variant != Variant::rwt_kernel_ofu)
        throw ConfigError("diagnostics require variant=rwt_kernel_ofu");
    RunContext ctx = prepare_context(cfg);
    std::uint64_t seed = cfg.seeds.empty() ? 0 : cfg.seeds[0];
    auto records = run_kernel_diagnostics(cfg, ctx, seed);

    json arr = json::array();
    for (const auto& d : records)
        arr.push_back(json{{"episode", d.episode},
                           {"stage", d.stage},
                           {"n", d.n},
                           {"effective_dimension", d.effective_dimension},
                           {"information_gain", d.information_gain},
                           {"coverage_constant", d.coverage_constant}});
    save_json(out_path, json{{"format", "rwtq-diagnostics-v1"},
                             {"config_hash", config_hash(cfg)},
                             {"env_hash", ctx.env_hash},
                             {"seed", seed},
                             {"records", std::move(arr)}});
    std::cout << "wrote " << records.size() << " diagnostics records\n";
    return kExitOk;
}

int cmd_verify(const std::vector<std::string>& requested) {
    const std::vector<std::string> known = {"alignment", "lemmas", "krr",
                                            "optimism"};
    std::vector<std::string> suites =
        requested.empty() ? known : requested;
    for (const auto& s : suites) {
        if (std::find(known.begin(), known.end(), s) == known.end()) {
            std::cerr << "unknown suite '" << s << "'; valid suites:";
            for (const auto& k : known) std::cerr << ' ' << k;
            std::cerr << "\n";
            return kExitConfig;
        }
    }

    bool all_ok = true;
    for (const auto& name : suites) {
        SuiteResult result;
        if (name == "alignment") result = verify_alignment();
        else if (name == "lemmas") result = verify_lemmas();
        else if (name == "krr") result = verify_krr();
        else result = verify_optimism();

        std::cout << (result.passed() ? "PASS" : "FAIL") << " " << result.name
                  << " (" << (result.total - result.failures) << "/"
                  << result.total << " checks)\n";
        for (const auto& msg : result.messages)
            std::cout << "  " << msg << "\n";
        all_ok = all_ok && result.passed();
    }
    return all_ok ? kExitOk : kExitVerify;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"transfer Q-learning experiment runner"};
    app.require_subcommand(1);

    std::string config_path, out_path, env_path;
    std::vector<std::string> overrides, summary_paths, suites;
    int episodes = 1024;
    std::uint64_t seed = 0;

    auto add_config_opts = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "experiment config file");
        cmd->add_option("--set", overrides,
                        "key=value overrides applied after --config");
    };

    auto* gen = app.add_subcommand("gen-env",
                                   "generate and serialize an environment");
    add_config_opts(gen);
    gen->add_option("--out", out_path, "output JSON path")->required();

    auto* collect = app.add_subcommand(
        "collect-source", "collect a uniform-policy source sample pool");
    collect->add_option("--env", env_path, "environment JSON")->required();
    collect->add_option("--episodes", episodes, "episodes per source task");
    collect->add_option("--seed", seed, "collection seed");
    collect->add_option("--out", out_path, "output JSON path")->required();

    auto* train = app.add_subcommand("train", "run a training experiment");
    add_config_opts(train);
    train->add_option("--out", out_path, "output directory")->required();

    auto* compare = app.add_subcommand(
        "compare", "merge training summaries from one environment");
    compare->add_option("--summary", summary_paths, "summary JSON files")
        ->required();
    compare->add_option("--out", out_path, "output directory")->required();

    auto* diag = app.add_subcommand(
        "diagnostics", "kernel complexity diagnostics for one seed");
    add_config_opts(diag);
    diag->add_option("--out", out_path, "output JSON path")->required();

    auto* verify = app.add_subcommand(
        "verify", "run built-in verification suites");
    verify->add_option("--suite", suites,
                       "suites to run (default: all): alignment, lemmas, "
                       "krr, optimism");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (gen->parsed()) return cmd_gen_env(config_path, overrides, out_path);
        if (collect->parsed())
            return cmd_collect_source(env_path, episodes, seed, out_path);
        if (train->parsed()) return cmd_train(config_path, overrides, out_path);
        if (compare->parsed()) return cmd_compare(summary_paths, out_path);
        if (diag->parsed())
            return cmd_diagnostics(config_path, overrides, out_path);
        if (verify->parsed()) return cmd_verify(suites);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "runtime abort: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}
