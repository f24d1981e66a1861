#include "rwtq/serialize.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include "rwtq/rng.hpp"

namespace rwtq {

namespace {

json transition_table_to_json(const std::vector<TransitionRow>& table) {
    json rows = json::array();
    for (const auto& row : table) {
        json r = json::array();
        for (const auto& e : row) r.push_back({e.next_state, e.prob});
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<TransitionRow> transition_table_from_json(const json& rows) {
    std::vector<TransitionRow> table;
    table.reserve(rows.size());
    for (const auto& r : rows) {
        TransitionRow row;
        for (const auto& e : r)
            row.push_back({e.at(0).get<int>(), e.at(1).get<double>()});
        table.push_back(std::move(row));
    }
    return table;
}

}  // namespace

json mdp_to_json(const EpisodicMdp& mdp) {
    json j;
    j["num_states"] = mdp.num_states();
    j["num_actions"] = mdp.num_actions();
    j["horizon"] = mdp.horizon();
    j["discount"] = mdp.discount();
    j["initial_state"] = mdp.initial_state();

    bool trans_invariant = true, reward_invariant = true;
    for (int h = 2; h <= mdp.horizon(); ++h) {
        if (mdp.transition_table(h) != mdp.transition_table(1))
            trans_invariant = false;
        if (mdp.reward_table(h) != mdp.reward_table(1))
            reward_invariant = false;
    }
    j["stage_invariant_transitions"] = trans_invariant;
    j["stage_invariant_rewards"] = reward_invariant;

    json trans = json::array();
    for (int h = 1; h <= (trans_invariant ? 1 : mdp.horizon()); ++h)
        trans.push_back(transition_table_to_json(mdp.transition_table(h)));
    j["transitions"] = std::move(trans);

    json rewards = json::array();
    for (int h = 1; h <= (reward_invariant ? 1 : mdp.horizon()); ++h)
        rewards.push_back(mdp.reward_table(h));
    j["rewards"] = std::move(rewards);
    return j;
}

EpisodicMdp mdp_from_json(const json& j) {
    const int horizon = j.at("horizon").get<int>();
    bool trans_invariant = j.at("stage_invariant_transitions").get<bool>();
    bool reward_invariant = j.at("stage_invariant_rewards").get<bool>();

    std::vector<std::vector<TransitionRow>> transitions;
    for (const auto& t : j.at("transitions"))
        transitions.push_back(transition_table_from_json(t));
    if (trans_invariant && transitions.size() == 1)
        transitions.assign(horizon, transitions[0]);

    std::vector<std::vector<double>> rewards;
    for (const auto& r : j.at("rewards"))
        rewards.push_back(r.get<std::vector<double>>());
    if (reward_invariant && rewards.size() == 1)
        rewards.assign(horizon, rewards[0]);

    return EpisodicMdp(j.at("num_states").get<int>(),
                       j.at("num_actions").get<int>(), horizon,
                       j.at("discount").get<double>(), std::move(transitions),
                       std::move(rewards), j.at("initial_state").get<int>());
}

json grid_spec_to_json(const GridWorldSpec& spec) {
    return json{{"dims", spec.dims},
                {"side", spec.side},
                {"horizon", spec.horizon},
                {"num_actions", spec.num_actions},
                {"target_reward_std", spec.target_reward_std},
                {"delta_std", spec.delta_std},
                {"num_sources", spec.num_sources},
                {"seed", spec.seed}};
}

GridWorldSpec grid_spec_from_json(const json& j) {
    GridWorldSpec spec;
    spec.dims = j.at("dims").get<int>();
    spec.side = j.at("side").get<int>();
    spec.horizon = j.at("horizon").get<int>();
    spec.num_actions = j.at("num_actions").get<int>();
    spec.target_reward_std = j.at("target_reward_std").get<double>();
    spec.delta_std = j.at("delta_std").get<double>();
    spec.num_sources = j.at("num_sources").get<int>();
    spec.seed = j.at("seed").get<std::uint64_t>();
    return spec;
}

json env_to_json(const GridEnvironment& env) {
    json j;
    j["format"] = "rwtq-env-v1";
    j["spec"] = grid_spec_to_json(env.spec);
    j["target"] = mdp_to_json(env.target);
    json sources = json::array();
    for (const auto& s : env.sources) sources.push_back(mdp_to_json(s));
    j["sources"] = std::move(sources);
    return j;
}

GridEnvironment env_from_json(const json& j) {
    if (j.value("format", "") != "rwtq-env-v1")
        throw SerializeError("not an rwtq environment file");
    std::vector<EpisodicMdp> sources;
    for (const auto& s : j.at("sources")) sources.push_back(mdp_from_json(s));
    return GridEnvironment{grid_spec_from_json(j.at("spec")),
                           mdp_from_json(j.at("target")), std::move(sources)};
}

json ratio_table_to_json(const DensityRatioProvider::RatioTable& table,
                         int horizon) {
    json j;
    j["format"] = "rwtq-ratio-v1";
    j["num_states"] = table.num_states;
    j["num_actions"] = table.num_actions;
    j["horizon"] = horizon;
    json stages = json::array();
    for (const auto& stage : table.entries) {
        json rows = json::array();
        for (const auto& row : stage) {
            json r = json::array();
            for (const auto& [next, w] : row) r.push_back({next, w});
            rows.push_back(std::move(r));
        }
        stages.push_back(std::move(rows));
    }
    j["tables"] = std::move(stages);
    return j;
}

DensityRatioProvider::RatioTable ratio_table_from_json(const json& j) {
    if (j.value("format", "") != "rwtq-ratio-v1")
        throw SerializeError("not an rwtq ratio-table file");
    DensityRatioProvider::RatioTable table;
    table.num_states = j.at("num_states").get<int>();
    table.num_actions = j.at("num_actions").get<int>();
    for (const auto& stage : j.at("tables")) {
        std::vector<std::vector<std::pair<int, double>>> rows;
        for (const auto& row : stage) {
            std::vector<std::pair<int, double>> r;
            for (const auto& e : row)
                r.emplace_back(e.at(0).get<int>(), e.at(1).get<double>());
            rows.push_back(std::move(r));
        }
        table.entries.push_back(std::move(rows));
    }
    return table;
}

void save_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw SerializeError("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SerializeError("cannot open for reading: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw SerializeError("invalid JSON in " + path + ": " + e.what());
    }
    return j;
}

std::string text_hash(const std::string& text) {
    std::uint64_t h = hash_name(text);
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << h;
    return out.str();
}

std::string json_hash(const json& j) { return text_hash(j.dump()); }

}  // namespace rwtq
