#include "rwtq/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "rwtq/serialize.hpp"

namespace rwtq {

std::string variant_name(Variant v) {
    switch (v) {
        case Variant::rwt_tabular: return "rwt_tabular";
        case Variant::rwt_kernel_ofu: return "rwt_kernel_ofu";
        case Variant::target_only: return "target_only";
        case Variant::naive_pooled: return "naive_pooled";
    }
    return "rwt_tabular";
}

Variant variant_from_name(const std::string& name) {
    if (name == "rwt_tabular") return Variant::rwt_tabular;
    if (name == "rwt_kernel_ofu") return Variant::rwt_kernel_ofu;
    if (name == "target_only") return Variant::target_only;
    if (name == "naive_pooled") return Variant::naive_pooled;
    throw ConfigError("unknown variant: " + name);
}

namespace {

std::string fmt_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

double parse_double(const std::string& key, const std::string& v) {
    double out;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw ConfigError("invalid number for key '" + key + "': " + v);
    return out;
}

long long parse_int(const std::string& key, const std::string& v) {
    long long out;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size())
        throw ConfigError("invalid integer for key '" + key + "': " + v);
    return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw ConfigError("invalid boolean for key '" + key + "' (true/false): " + v);
}

std::vector<std::uint64_t> parse_seeds(const std::string& v) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        seeds.push_back(static_cast<std::uint64_t>(parse_int("seeds", item)));
    }
    if (seeds.empty()) throw ConfigError("seeds: at least one seed required");
    return seeds;
}

std::string seeds_to_string(const std::vector<std::uint64_t>& seeds) {
    std::string out;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(seeds[i]);
    }
    return out;
}

std::string schedule_name(ExplorationSchedule::Kind k) {
    return k == ExplorationSchedule::Kind::epsilon_greedy_linear
               ? "epsilon_greedy_linear"
               : "ucb_greedy";
}

std::string bonus_mode_name(BonusParams::Mode m) {
    return m == BonusParams::Mode::practical ? "practical" : "theoretical";
}

}  // namespace

void apply_override(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value) {
    if (key == "variant") cfg.variant = variant_from_name(value);
    else if (key == "episodes") cfg.episodes = static_cast<int>(parse_int(key, value));
    else if (key == "gamma") cfg.gamma = parse_double(key, value);
    else if (key == "lr") cfg.lr = parse_double(key, value);
    else if (key == "batch_size") cfg.batch_size = static_cast<int>(parse_int(key, value));
    else if (key == "replay_passes") cfg.replay_passes = static_cast<int>(parse_int(key, value));
    else if (key == "exploration") {
        if (value == "epsilon_greedy_linear")
            cfg.schedule.kind = ExplorationSchedule::Kind::epsilon_greedy_linear;
        else if (value == "ucb_greedy")
            cfg.schedule.kind = ExplorationSchedule::Kind::ucb_greedy;
        else
            throw ConfigError("unknown exploration kind: " + value);
    }
    else if (key == "eps_start") cfg.schedule.eps_start = parse_double(key, value);
    else if (key == "eps_end") cfg.schedule.eps_end = parse_double(key, value);
    else if (key == "seeds") cfg.seeds = parse_seeds(value);
    else if (key == "env_path") cfg.env_path = value;
    else if (key == "env_dims") cfg.env.dims = static_cast<int>(parse_int(key, value));
    else if (key == "env_side") cfg.env.side = static_cast<int>(parse_int(key, value));
    else if (key == "env_horizon") cfg.env.horizon = static_cast<int>(parse_int(key, value));
    else if (key == "env_actions") cfg.env.num_actions = static_cast<int>(parse_int(key, value));
    else if (key == "env_target_reward_std") cfg.env.target_reward_std = parse_double(key, value);
    else if (key == "env_delta_std") cfg.env.delta_std = parse_double(key, value);
    else if (key == "env_num_sources") cfg.env.num_sources = static_cast<int>(parse_int(key, value));
    else if (key == "env_seed") cfg.env.seed = static_cast<std::uint64_t>(parse_int(key, value));
    else if (key == "source_episodes") cfg.source_episodes = static_cast<int>(parse_int(key, value));
    else if (key == "kappa") cfg.kappa = parse_double(key, value);
    else if (key == "lambda") cfg.bonus.lambda = parse_double(key, value);
    else if (key == "lambda_tilde") cfg.bonus.lambda_tilde = parse_double(key, value);
    else if (key == "bonus_mode") {
        if (value == "practical") cfg.bonus.mode = BonusParams::Mode::practical;
        else if (value == "theoretical") cfg.bonus.mode = BonusParams::Mode::theoretical;
        else throw ConfigError("unknown bonus mode: " + value);
    }
    else if (key == "c0") cfg.bonus.beta_scale_target = parse_double(key, value);
    else if (key == "cm") cfg.bonus.beta_scale_source = parse_double(key, value);
    else if (key == "alpha0") cfg.bonus.alpha0 = parse_double(key, value);
    else if (key == "alpha1") cfg.bonus.alpha1 = parse_double(key, value);
    else if (key == "beta1") cfg.bonus.beta1 = parse_double(key, value);
    else if (key == "clip_values") cfg.clip_values = parse_bool(key, value);
    else if (key == "normalize_rewards") cfg.normalize_rewards = parse_bool(key, value);
    else if (key == "kernel_kind") cfg.kernel_kind = value;
    else if (key == "kernel_lengthscale") cfg.kernel_lengthscale = parse_double(key, value);
    else if (key == "kernel_scale") cfg.kernel_scale = parse_double(key, value);
    else if (key == "correction_kind") cfg.correction_kind = value;
    else if (key == "correction_multiplier") cfg.correction_multiplier = parse_double(key, value);
    else if (key == "correction_lengthscale") cfg.correction_lengthscale = parse_double(key, value);
    else throw ConfigError("unknown config key: " + key);
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    std::vector<std::string> bad_keys;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        auto pos = line.find('=');
        if (pos == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) +
                              ": expected key=value, got: " + line);
        std::string key = line.substr(0, pos);
        std::string value = line.substr(pos + 1);
        try {
            apply_override(cfg, key, value);
        } catch (const ConfigError& e) {
            bad_keys.push_back(std::string(e.what()));
        }
    }
    if (!bad_keys.empty()) {
        std::string msg = "config errors:";
        for (const auto& k : bad_keys) msg += "\n  " + k;
        throw ConfigError(msg);
    }
    cfg.schedule.total_episodes = cfg.episodes;
    cfg.bonus.horizon = cfg.env.horizon;
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out << "variant=" << variant_name(cfg.variant) << "\n";
    out << "episodes=" << cfg.episodes << "\n";
    out << "gamma=" << fmt_double(cfg.gamma) << "\n";
    out << "lr=" << fmt_double(cfg.lr) << "\n";
    out << "batch_size=" << cfg.batch_size << "\n";
    out << "replay_passes=" << cfg.replay_passes << "\n";
    out << "exploration=" << schedule_name(cfg.schedule.kind) << "\n";
    out << "eps_start=" << fmt_double(cfg.schedule.eps_start) << "\n";
    out << "eps_end=" << fmt_double(cfg.schedule.eps_end) << "\n";
    out << "seeds=" << seeds_to_string(cfg.seeds) << "\n";
    out << "env_path=" << cfg.env_path << "\n";
    out << "env_dims=" << cfg.env.dims << "\n";
    out << "env_side=" << cfg.env.side << "\n";
    out << "env_horizon=" << cfg.env.horizon << "\n";
    out << "env_actions=" << cfg.env.num_actions << "\n";
    out << "env_target_reward_std=" << fmt_double(cfg.env.target_reward_std) << "\n";
    out << "env_delta_std=" << fmt_double(cfg.env.delta_std) << "\n";
    out << "env_num_sources=" << cfg.env.num_sources << "\n";
    out << "env_seed=" << cfg.env.seed << "\n";
    out << "source_episodes=" << cfg.source_episodes << "\n";
    out << "kappa=" << fmt_double(cfg.kappa) << "\n";
    out << "lambda=" << fmt_double(cfg.bonus.lambda) << "\n";
    out << "lambda_tilde=" << fmt_double(cfg.bonus.lambda_tilde) << "\n";
    out << "bonus_mode=" << bonus_mode_name(cfg.bonus.mode) << "\n";
    out << "c0=" << fmt_double(cfg.bonus.beta_scale_target) << "\n";
    out << "cm=" << fmt_double(cfg.bonus.beta_scale_source) << "\n";
    out << "alpha0=" << fmt_double(cfg.bonus.alpha0) << "\n";
    out << "alpha1=" << fmt_double(cfg.bonus.alpha1) << "\n";
    out << "beta1=" << fmt_double(cfg.bonus.beta1) << "\n";
    out << "clip_values=" << (cfg.clip_values ? "true" : "false") << "\n";
    out << "normalize_rewards=" << (cfg.normalize_rewards ? "true" : "false") << "\n";
    out << "kernel_kind=" << cfg.kernel_kind << "\n";
    out << "kernel_lengthscale=" << fmt_double(cfg.kernel_lengthscale) << "\n";
    out << "kernel_scale=" << fmt_double(cfg.kernel_scale) << "\n";
    out << "correction_kind=" << cfg.correction_kind << "\n";
    out << "correction_multiplier=" << fmt_double(cfg.correction_multiplier) << "\n";
    out << "correction_lengthscale=" << fmt_double(cfg.correction_lengthscale) << "\n";
    return out.str();
}

KernelSpec ExperimentConfig::baseline_kernel() const {
    if (kernel_kind == "rbf")
        return KernelSpec::rbf(kernel_lengthscale, kernel_scale);
    if (kernel_kind == "tabular_delta")
        return KernelSpec::tabular_delta(kernel_scale);
    throw ConfigError("unknown kernel_kind: " + kernel_kind);
}

KernelSpec ExperimentConfig::correction_kernel() const {
    if (correction_kind == "scaled")
        return KernelSpec::scaled_of(baseline_kernel(), correction_multiplier);
    if (correction_kind == "rbf")
        return KernelSpec::rbf(correction_lengthscale, kernel_scale);
    if (correction_kind == "tabular_delta")
        return KernelSpec::tabular_delta(kernel_scale);
    throw ConfigError("unknown correction_kind: " + correction_kind);
}

void ExperimentConfig::validate() const {
    if (episodes < 1) throw ConfigError("episodes must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (replay_passes < 1) throw ConfigError("replay_passes must be >= 1");
    if (!(gamma > 0.0 && gamma <= 1.0))
        throw ConfigError("gamma must lie in (0,1]");
    if (lr < 0.0 || lr > 1.0) throw ConfigError("lr must lie in [0,1]");
    if (!(schedule.eps_end >= 0.0 && schedule.eps_end <= schedule.eps_start &&
          schedule.eps_start <= 1.0))
        throw ConfigError("require 0 <= eps_end <= eps_start <= 1");
    if (kappa < 0.0) throw ConfigError("kappa must be >= 0");
    if (kappa > 0.0 && source_episodes != 0)
        throw ConfigError(
            "exactly one source-supply mode: set kappa>0 with "
            "source_episodes=0, or kappa=0 with a static pool");
    if (source_episodes < 0) throw ConfigError("source_episodes must be >= 0");
    if (bonus.lambda <= 0.0 || bonus.lambda_tilde <= 0.0)
        throw ConfigError("ridges lambda, lambda_tilde must be > 0");
    if (bonus.beta_scale_source < 0.0 || bonus.beta_scale_target < 0.0)
        throw ConfigError("bonus multipliers must be >= 0");
    if (variant == Variant::rwt_kernel_ofu) {
        baseline_kernel();    // throws on bad kernel configuration
        correction_kernel();
    }
}

std::string config_hash(const ExperimentConfig& cfg) {
    return text_hash(serialize_config(cfg));
}

}  // namespace rwtq
