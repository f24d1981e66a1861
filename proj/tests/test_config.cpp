#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#ifndef _WIN32
#include <sys/wait.h>
#endif

#include "rwtq/config.hpp"
#include "rwtq/serialize.hpp"

#ifndef RWTQ_CLI_PATH
#error "RWTQ_CLI_PATH must point at the built CLI binary"
#endif

using namespace rwtq;
namespace fs = std::filesystem;

namespace {

ExperimentConfig sample_config() {
    ExperimentConfig cfg;
    cfg.variant = Variant::naive_pooled;
    cfg.episodes = 42;
    cfg.gamma = 0.95;
    cfg.lr = 0.1;
    cfg.batch_size = 16;
    cfg.replay_passes = 3;
    cfg.schedule.eps_start = 0.8;
    cfg.schedule.eps_end = 0.1;
    cfg.schedule.total_episodes = 42;
    cfg.seeds = {3, 1, 4};
    cfg.env.dims = 2;
    cfg.env.side = 5;
    cfg.env.horizon = 4;
    cfg.env.num_actions = 2;
    cfg.env.delta_std = 1.5;
    cfg.env.num_sources = 2;
    cfg.env.seed = 99;
    cfg.source_episodes = 128;
    cfg.bonus.lambda = 0.5;
    cfg.bonus.lambda_tilde = 0.25;
    cfg.bonus.beta_scale_target = 0.3;
    cfg.bonus.horizon = 4;
    cfg.clip_values = false;
    cfg.kernel_lengthscale = 0.4;
    return cfg;
}

struct CliResult {
    int exit_code = -1;
    std::string out, err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path test_dir() {
    fs::path dir = fs::temp_directory_path() / "rwtq-config-tests";
    fs::create_directories(dir);
    return dir;
}

CliResult run_cli(const std::string& args) {
    fs::path dir = test_dir();
    fs::path out = dir / "stdout.txt";
    fs::path err = dir / "stderr.txt";
    std::string cmd = std::string(RWTQ_CLI_PATH) + " " + args + " > " +
                      out.string() + " 2> " + err.string();
    int status = std::system(cmd.c_str());
    CliResult r;
#ifdef _WIN32
    r.exit_code = status;
#else
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
#endif
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

}  // namespace

TEST_CASE("config round trip: parse(serialize(c)) == c") {
    ExperimentConfig cfg = sample_config();
    CHECK(parse_config(serialize_config(cfg)) == cfg);

    // Defaults round-trip too.
    ExperimentConfig defaults;
    defaults.schedule.total_episodes = defaults.episodes;
    defaults.bonus.horizon = defaults.env.horizon;
    CHECK(parse_config(serialize_config(defaults)) == defaults);
}

TEST_CASE("parser rejects unknown keys and malformed lines") {
    CHECK_THROWS_AS(parse_config("no_such_key=1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("just a line without equals\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("episodes=ten\n"), ConfigError);

    // All bad keys are collected into one report.
    try {
        parse_config("bad_one=1\nbad_two=2\n");
        CHECK(false);
    } catch (const ConfigError& e) {
        std::string msg = e.what();
        CHECK(msg.find("bad_one") != std::string::npos);
        CHECK(msg.find("bad_two") != std::string::npos);
    }

    // Comments and blank lines are fine.
    CHECK_NOTHROW(parse_config("# comment\n\nepisodes=5\n"));
}

TEST_CASE("overrides mutate exactly the named field") {
    ExperimentConfig cfg;
    apply_override(cfg, "variant", "target_only");
    CHECK(cfg.variant == Variant::target_only);
    apply_override(cfg, "lr", "0.25");
    CHECK(cfg.lr == 0.25);
    apply_override(cfg, "seeds", "7,8");
    CHECK(cfg.seeds == std::vector<std::uint64_t>{7, 8});
    apply_override(cfg, "clip_values", "false");
    CHECK(cfg.clip_values == false);
    apply_override(cfg, "c0", "0.2");
    CHECK(cfg.bonus.beta_scale_target == 0.2);

    CHECK_THROWS_AS(apply_override(cfg, "variant", "mystery"), ConfigError);
    CHECK_THROWS_AS(apply_override(cfg, "gamma", "fast"), ConfigError);
    CHECK_THROWS_AS(apply_override(cfg, "clip_values", "1"), ConfigError);
    CHECK_THROWS_AS(apply_override(cfg, "seeds", ""), ConfigError);
}

TEST_CASE("validation rejects inconsistent settings") {
    auto invalid = [](auto&& mutate) {
        ExperimentConfig cfg;
        cfg.schedule.total_episodes = cfg.episodes;
        cfg.bonus.horizon = cfg.env.horizon;
        mutate(cfg);
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    };
    invalid([](ExperimentConfig& c) { c.episodes = 0; });
    invalid([](ExperimentConfig& c) { c.batch_size = 0; });
    invalid([](ExperimentConfig& c) { c.replay_passes = 0; });
    invalid([](ExperimentConfig& c) { c.gamma = 0.0; });
    invalid([](ExperimentConfig& c) { c.gamma = 1.5; });
    invalid([](ExperimentConfig& c) { c.lr = -0.1; });
    invalid([](ExperimentConfig& c) { c.schedule.eps_end = 2.0; });
    invalid([](ExperimentConfig& c) { c.kappa = -1.0; });
    invalid([](ExperimentConfig& c) { c.kappa = 0.5; });  // pool also set
    invalid([](ExperimentConfig& c) { c.bonus.lambda = 0.0; });
    invalid([](ExperimentConfig& c) {
        c.variant = Variant::rwt_kernel_ofu;
        c.kernel_kind = "polynomial";
    });

    // Growth mode with the static pool disabled is legal.
    ExperimentConfig growth;
    growth.kappa = 0.5;
    growth.source_episodes = 0;
    growth.schedule.total_episodes = growth.episodes;
    CHECK_NOTHROW(growth.validate());
}

TEST_CASE("config hashes are stable and sensitive") {
    ExperimentConfig a = sample_config();
    ExperimentConfig b = sample_config();
    CHECK(config_hash(a) == config_hash(b));
    b.lr = 0.2;
    CHECK(config_hash(a) != config_hash(b));
    CHECK(!config_hash(a).empty());
}

TEST_CASE("variant names round-trip") {
    for (Variant v : {Variant::rwt_tabular, Variant::rwt_kernel_ofu,
                      Variant::target_only, Variant::naive_pooled})
        CHECK(variant_from_name(variant_name(v)) == v);
    CHECK_THROWS_AS(variant_from_name("sarsa"), ConfigError);
}

TEST_CASE("cli: missing config file exits with the config code") {
    fs::path missing = test_dir() / "does-not-exist.cfg";
    CliResult r = run_cli("train --config " + missing.string() + " --out " +
                          (test_dir() / "unused").string());
    CHECK(r.exit_code == 2);
    CHECK(r.err.find(missing.string()) != std::string::npos);
}

TEST_CASE("cli: unknown verify suite exits 2 and lists the suites") {
    CliResult r = run_cli("verify --suite spectral");
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("spectral") != std::string::npos);
    for (const char* s : {"alignment", "lemmas", "krr", "optimism"})
        CHECK(r.err.find(s) != std::string::npos);
}

TEST_CASE("cli: minimal train writes a single-row curve") {
    fs::path out = test_dir() / "train-out";
    fs::remove_all(out);
    CliResult r = run_cli(
        "train --set variant=target_only --set episodes=1 --set seeds=5 "
        "--set env_dims=2 --set env_side=2 --set env_horizon=2 "
        "--set env_actions=2 --set env_num_sources=1 "
        "--set source_episodes=4 --out " +
        out.string());
    CHECK(r.exit_code == 0);
    std::string csv = slurp(out / "target_only_seed5.csv");
    CHECK(csv.rfind("episode,return,regret,cum_regret,epsilon\n", 0) == 0);
    // Header plus exactly one data row.
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
    CHECK(fs::exists(out / "target_only_summary.json"));
    CHECK(fs::exists(out / "manifest.json"));
}

TEST_CASE("cli: compare rejects summaries from different environments") {
    fs::path dir = test_dir();
    fs::path sa = dir / "sum_a.json";
    fs::path sb = dir / "sum_b.json";
    save_json(sa.string(), json{{"env_hash", "aaaa"}});
    save_json(sb.string(), json{{"env_hash", "bbbb"}});
    CliResult r = run_cli("compare --summary " + sa.string() + " --summary " +
                          sb.string() + " --out " +
                          (dir / "cmp-bad").string());
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("env_hash") != std::string::npos);
}

TEST_CASE("cli: compare passes a single summary through") {
    fs::path dir = test_dir();
    fs::path s = dir / "sum_single.json";
    save_json(s.string(),
              json{{"env_hash", "cccc"},
                   {"variant", "target_only"},
                   {"mean_return", {1.0}},
                   {"stderr_return", {0.0}},
                   {"mean_cum_regret", {0.5}},
                   {"stderr_cum_regret", {0.0}},
                   {"final_window", json{{"window", 50},
                                         {"mean_return", 1.0},
                                         {"sem_return", 0.0}}}});
    fs::path out = dir / "cmp-single";
    CliResult r =
        run_cli("compare --summary " + s.string() + " --out " + out.string());
    CHECK(r.exit_code == 0);
    std::string csv = slurp(out / "compare.csv");
    CHECK(csv.find("target_only,1,") != std::string::npos);
    CHECK(r.out.find("target_only") != std::string::npos);
}
