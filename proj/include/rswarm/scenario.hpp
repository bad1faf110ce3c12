#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "rswarm/sim.hpp"

namespace rswarm {

namespace detail {

using nlohmann::json;

inline const json& member(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path + ": expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw ConfigError(path + "." + key + ": missing field");
    return *it;
}

inline double as_number(const json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path + ": expected a number");
    return j.get<double>();
}

inline int as_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) throw ConfigError(path + ": expected an integer");
    return j.get<int>();
}

inline std::string as_string(const json& j, const std::string& path) {
    if (!j.is_string()) throw ConfigError(path + ": expected a string");
    return j.get<std::string>();
}

inline bool as_bool(const json& j, const std::string& path) {
    if (!j.is_boolean()) throw ConfigError(path + ": expected a boolean");
    return j.get<bool>();
}

inline Eigen::VectorXd as_vector(const json& j, const std::string& path) {
    if (!j.is_array()) throw ConfigError(path + ": expected an array of numbers");
    Eigen::VectorXd v(j.size());
    for (size_t k = 0; k < j.size(); ++k)
        v(static_cast<int>(k)) = as_number(j[k], path + "[" + std::to_string(k) + "]");
    return v;
}

inline double number_or(const json& j, const std::string& key, double fallback,
                        const std::string& path) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    return as_number(j[key], path + "." + key);
}

inline int int_or(const json& j, const std::string& key, int fallback, const std::string& path) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    return as_int(j[key], path + "." + key);
}

inline bool bool_or(const json& j, const std::string& key, bool fallback,
                    const std::string& path) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    return as_bool(j[key], path + "." + key);
}

}  // namespace detail

// Builds a ScenarioConfig from parsed JSON; every schema or invariant
// violation raises ConfigError naming the offending field.  The returned
// config has already passed ScenarioConfig::validate(), including the
// load-time strong r-robustness check of the initial graph.
inline ScenarioConfig parse_scenario_json(const nlohmann::json& j) {
    using detail::as_bool;
    using detail::as_int;
    using detail::as_number;
    using detail::as_string;
    using detail::as_vector;
    using detail::member;

    if (!j.is_object()) throw ConfigError("scenario: expected a JSON object");
    const int version = detail::int_or(j, "schema_version", 1, "scenario");
    if (version != 1) throw ConfigError("schema_version: unsupported version");

    ScenarioConfig cfg;
    if (j.contains("name")) cfg.name = as_string(j["name"], "name");
    if (j.contains("seed")) {
        if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer())
            throw ConfigError("seed: expected an unsigned integer");
        cfg.seed = j["seed"].get<std::uint64_t>();
    }
    cfg.dt = as_number(member(j, "dt", "scenario"), "dt");
    cfg.duration = as_number(member(j, "duration", "scenario"), "duration");
    cfg.dimension = as_int(member(j, "dimension", "scenario"), "dimension");
    cfg.comm_range =
        as_number(member(j, "communication_range", "scenario"), "communication_range");
    cfg.check_every = detail::int_or(j, "check_every", 10, "scenario");

    if (j.contains("dynamics")) {
        const std::string mode = as_string(j["dynamics"], "dynamics");
        if (mode == "double_integrator")
            cfg.dynamics = DynamicsMode::double_integrator;
        else if (mode == "single_integrator")
            cfg.dynamics = DynamicsMode::single_integrator;
        else
            throw ConfigError("dynamics: must be 'double_integrator' or 'single_integrator'");
    }
    if (j.contains("compose_mode")) {
        const std::string mode = as_string(j["compose_mode"], "compose_mode");
        if (mode == "rows")
            cfg.compose_mode = ComposeMode::rows;
        else if (mode == "exponential")
            cfg.compose_mode = ComposeMode::exponential;
        else
            throw ConfigError("compose_mode: must be 'rows' or 'exponential'");
    }

    const nlohmann::json& smooth = member(j, "smooth", "scenario");
    cfg.smooth.s = detail::number_or(smooth, "s", cfg.smooth.s, "smooth");
    cfg.smooth.s_adj = detail::number_or(smooth, "s_adj", cfg.smooth.s_adj, "smooth");
    cfg.smooth.q = detail::number_or(smooth, "q", cfg.smooth.q, "smooth");
    cfg.smooth.q_adj = detail::number_or(smooth, "q_adj", cfg.smooth.q_adj, "smooth");
    cfg.smooth.r = as_int(member(smooth, "r", "smooth"), "smooth.r");
    cfg.smooth.delta = detail::int_or(smooth, "delta", cfg.smooth.delta, "smooth");
    cfg.smooth.epsilon = detail::number_or(smooth, "epsilon", cfg.smooth.epsilon, "smooth");

    if (j.contains("gains")) {
        const nlohmann::json& gains = j["gains"];
        if (gains.contains("robustness")) {
            cfg.robustness_gains.eta1 =
                detail::number_or(gains["robustness"], "eta1", 1.0, "gains.robustness");
            cfg.robustness_gains.eta2 =
                detail::number_or(gains["robustness"], "eta2", 1.0, "gains.robustness");
        }
        if (gains.contains("collision")) {
            cfg.collision_gains.eta1 =
                detail::number_or(gains["collision"], "eta1", 1.0, "gains.collision");
            cfg.collision_gains.eta2 =
                detail::number_or(gains["collision"], "eta2", 1.0, "gains.collision");
        }
        cfg.alpha_robustness = detail::number_or(gains, "alpha_robustness", 1.0, "gains");
    }
    if (j.contains("weights")) {
        cfg.robustness_weight = detail::number_or(j["weights"], "robustness", 1.0, "weights");
        cfg.collision_weight = detail::number_or(j["weights"], "collision", 1.0, "weights");
    }
    if (j.contains("collision")) {
        cfg.min_distance = detail::number_or(j["collision"], "min_distance", 0.0, "collision");
        cfg.collision_margin = detail::number_or(j["collision"], "enforcement_margin",
                                                 cfg.collision_margin, "collision");
    }

    if (j.contains("obstacles")) {
        if (!j["obstacles"].is_array()) throw ConfigError("obstacles: expected an array");
        for (size_t k = 0; k < j["obstacles"].size(); ++k) {
            const std::string path = "obstacles[" + std::to_string(k) + "]";
            Obstacle obs;
            obs.position = as_vector(member(j["obstacles"][k], "position", path), path + ".position");
            obs.clearance = as_number(member(j["obstacles"][k], "clearance", path), path + ".clearance");
            cfg.obstacles.push_back(std::move(obs));
        }
    }

    const nlohmann::json& goal = member(j, "goal", "scenario");
    const std::string goal_mode = as_string(member(goal, "mode", "goal"), "goal.mode");
    if (goal_mode == "shared") {
        cfg.goal_mode = GoalMode::shared;
        cfg.shared_goal = as_vector(member(goal, "position", "goal"), "goal.position");
    } else if (goal_mode == "spread_out") {
        cfg.goal_mode = GoalMode::spread_out;
        const nlohmann::json& lg = member(goal, "leader_goals", "goal");
        if (!lg.is_array()) throw ConfigError("goal.leader_goals: expected an array");
        for (size_t k = 0; k < lg.size(); ++k)
            cfg.leader_goals.push_back(
                as_vector(lg[k], "goal.leader_goals[" + std::to_string(k) + "]"));
    } else {
        throw ConfigError("goal.mode: must be 'shared' or 'spread_out'");
    }
    if (goal.contains("exit_line_y"))
        cfg.exit_line_y = as_number(goal["exit_line_y"], "goal.exit_line_y");

    const nlohmann::json& cons = member(j, "consensus", "scenario");
    const std::string cons_mode = as_string(member(cons, "mode", "consensus"), "consensus.mode");
    if (cons_mode == "wmsr")
        cfg.consensus_mode = ConsensusMode::wmsr;
    else if (cons_mode == "linear")
        cfg.consensus_mode = ConsensusMode::linear;
    else
        throw ConfigError("consensus.mode: must be 'wmsr' or 'linear'");
    cfg.tau = as_number(member(cons, "tau", "consensus"), "consensus.tau");
    cfg.threat_bound = as_int(member(cons, "threat_bound", "consensus"), "consensus.threat_bound");
    cfg.leader_reference =
        as_number(member(cons, "leader_reference", "consensus"), "consensus.leader_reference");
    cfg.consensus_tol = detail::number_or(cons, "tolerance", 1e-3, "consensus");

    const nlohmann::json& agents = member(j, "agents", "scenario");
    if (!agents.is_array()) throw ConfigError("agents: expected an array");
    for (size_t k = 0; k < agents.size(); ++k) {
        const std::string path = "agents[" + std::to_string(k) + "]";
        AgentConfig a;
        a.position = as_vector(member(agents[k], "position", path), path + ".position");
        if (agents[k].contains("velocity"))
            a.velocity = as_vector(agents[k]["velocity"], path + ".velocity");
        else
            a.velocity = Eigen::VectorXd::Zero(cfg.dimension);
        a.leader = detail::bool_or(agents[k], "leader", false, path);
        a.malicious = detail::bool_or(agents[k], "malicious", false, path);
        cfg.agents.push_back(std::move(a));
    }

    cfg.validate();
    return cfg;
}

inline ScenarioConfig parse_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("scenario file " + path + " is not valid JSON: " + e.what());
    }
    return parse_scenario_json(j);
}

}  // namespace rswarm
