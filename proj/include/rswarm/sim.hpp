#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rswarm/consensus.hpp"
#include "rswarm/log.hpp"
#include "rswarm/qp.hpp"
#include "rswarm/random.hpp"
#include "rswarm/robustness.hpp"
#include "rswarm/safety.hpp"
#include "rswarm/smooth_cbf.hpp"
#include "rswarm/state.hpp"

namespace rswarm {

enum class DynamicsMode { double_integrator, single_integrator };
enum class GoalMode { spread_out, shared };
enum class ConsensusMode { wmsr, linear };
enum class ComposeMode { rows, exponential };

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct SolverError : std::runtime_error {
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

struct AgentConfig {
    Eigen::VectorXd position;
    Eigen::VectorXd velocity;
    bool leader = false;
    bool malicious = false;
};

struct ScenarioConfig {
    std::string name = "scenario";
    std::uint64_t seed = 0;
    double dt = 0.01;
    double duration = 0.0;
    int dimension = 2;
    double comm_range = 0.0;
    DynamicsMode dynamics = DynamicsMode::double_integrator;
    ComposeMode compose_mode = ComposeMode::rows;
    int check_every = 10;  // oracle recheck stride, in steps

    SmoothParams smooth;
    HocbfGains robustness_gains;
    HocbfGains collision_gains;
    double alpha_robustness = 1.0;
    double robustness_weight = 1.0;  // per-follower composition weight
    double collision_weight = 1.0;   // weight of collision terms in exponential mode

    double min_distance = 0.0;  // pairwise clearance; <= 0 disables pair rows
    // Sampled-data buffer: barriers are enforced at clearance + margin so the
    // validated clearance survives the inter-sample motion of boundary-riding
    // agents.
    double collision_margin = 0.005;
    std::vector<Obstacle> obstacles;

    GoalMode goal_mode = GoalMode::shared;
    Eigen::VectorXd shared_goal;
    std::vector<Eigen::VectorXd> leader_goals;  // spread_out mode, one per leader
    std::optional<double> exit_line_y;          // goal-arrival line along the last axis

    ConsensusMode consensus_mode = ConsensusMode::wmsr;
    double tau = 0.5;
    int threat_bound = 0;
    double leader_reference = 0.5;
    double consensus_tol = 1e-3;

    std::vector<AgentConfig> agents;

    int size() const { return static_cast<int>(agents.size()); }
    int leader_count() const {
        int l = 0;
        for (const AgentConfig& a : agents)
            if (a.leader) ++l;
        return l;
    }
    int follower_count() const { return size() - leader_count(); }
    int step_count() const { return static_cast<int>(std::llround(duration / dt)); }

    std::vector<int> leader_indices() const {
        std::vector<int> out;
        for (int i = 0; i < size(); ++i)
            if (agents[static_cast<size_t>(i)].leader) out.push_back(i);
        return out;
    }

    std::vector<AgentRole> roles() const {
        std::vector<AgentRole> out;
        out.reserve(agents.size());
        for (const AgentConfig& a : agents) {
            if (a.leader)
                out.push_back(a.malicious ? AgentRole::malicious_leader : AgentRole::normal_leader);
            else
                out.push_back(a.malicious ? AgentRole::malicious_follower
                                          : AgentRole::normal_follower);
        }
        return out;
    }

    SwarmState initial_state() const {
        SwarmState st;
        st.time = 0.0;
        st.leader_count = leader_count();
        st.comm_range = comm_range;
        st.agents.reserve(agents.size());
        for (const AgentConfig& a : agents) st.agents.push_back({a.position, a.velocity});
        return st;
    }

    Eigen::VectorXd composition_weights() const {
        return Eigen::VectorXd::Constant(follower_count(), robustness_weight);
    }

    // Throws ConfigError describing the offending field.
    void validate() const;
};

inline void ScenarioConfig::validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    if (agents.empty()) fail("agents: at least one agent required");
    if (!(dt > 0.0)) fail("dt: must be positive");
    if (duration < 0.0) fail("duration: must be nonnegative");
    if (dimension < 1) fail("dimension: must be >= 1");
    if (!(comm_range > 0.0)) fail("communication_range: must be positive");
    if (!(tau > 0.0)) fail("consensus.tau: must be positive");
    if (threat_bound < 0) fail("consensus.threat_bound: must be >= 0");
    if (leader_reference < 0.0 || leader_reference > 1.0)
        fail("consensus.leader_reference: must be in [0,1]");
    if (!(consensus_tol > 0.0)) fail("consensus.tolerance: must be positive");
    if (check_every < 1) fail("check_every: must be >= 1");
    if (!(alpha_robustness > 0.0)) fail("gains.alpha_robustness: must be positive");
    if (!(robustness_weight > 0.0)) fail("weights.robustness: must be positive");
    if (!(collision_weight > 0.0)) fail("weights.collision: must be positive");

    const int l = leader_count();
    const int f = follower_count();
    if (l < 1) fail("agents: at least one leader required");
    if (f < 1) fail("agents: at least one follower required");
    bool seen_follower = false;
    for (int i = 0; i < size(); ++i) {
        const AgentConfig& a = agents[static_cast<size_t>(i)];
        if (a.leader && seen_follower)
            fail("agents[" + std::to_string(i) + "]: leaders must precede all followers");
        if (!a.leader) seen_follower = true;
        if (a.position.size() != dimension || a.velocity.size() != dimension)
            fail("agents[" + std::to_string(i) + "]: position/velocity must have 'dimension' entries");
        if (!a.position.allFinite() || !a.velocity.allFinite())
            fail("agents[" + std::to_string(i) + "]: non-finite state");
    }

    try {
        smooth.validate(l, f);
        robustness_gains.validate();
        collision_gains.validate();
    } catch (const std::invalid_argument& e) {
        fail(e.what());
    }

    if (min_distance < 0.0) fail("collision.min_distance: must be nonnegative");
    if (collision_margin < 0.0) fail("collision.enforcement_margin: must be nonnegative");
    for (size_t k = 0; k < obstacles.size(); ++k) {
        if (obstacles[k].position.size() != dimension)
            fail("obstacles[" + std::to_string(k) + "].position: must have 'dimension' entries");
        if (!(obstacles[k].clearance > 0.0))
            fail("obstacles[" + std::to_string(k) + "].clearance: must be positive");
    }

    if (goal_mode == GoalMode::shared) {
        if (shared_goal.size() != dimension) fail("goal.position: must have 'dimension' entries");
    } else {
        if (static_cast<int>(leader_goals.size()) != l)
            fail("goal.leader_goals: need exactly one goal per leader");
        for (size_t k = 0; k < leader_goals.size(); ++k)
            if (leader_goals[k].size() != dimension)
                fail("goal.leader_goals[" + std::to_string(k) + "]: must have 'dimension' entries");
    }

    // Load-time robustness of the initial communication graph.
    const SwarmState st = initial_state();
    const Eigen::MatrixXi adj = hard_adjacency(st.positions(), comm_range);
    std::vector<int> leaders(static_cast<size_t>(l));
    for (int i = 0; i < l; ++i) leaders[static_cast<size_t>(i)] = i;
    if (!percolates(adj, leaders, smooth.r))
        fail("agents: initial communication graph is not strongly r-robust (r = " +
             std::to_string(smooth.r) + ") with respect to the leader set");
}

// Semi-implicit Euler for the double integrator (v += u dt, then p += v dt);
// in single-integrator mode p += u dt and the velocity field reports u.
inline SwarmState step_dynamics(const SwarmState& state, const Eigen::VectorXd& u, double dt,
                                DynamicsMode mode = DynamicsMode::double_integrator) {
    if (!(dt > 0.0)) throw std::invalid_argument("step_dynamics: dt must be positive");
    const int m = state.dimension();
    if (u.size() != state.size() * m)
        throw std::invalid_argument("step_dynamics: control must have n*m entries");
    SwarmState next = state;
    for (int i = 0; i < state.size(); ++i) {
        AgentState& a = next.agents[static_cast<size_t>(i)];
        if (mode == DynamicsMode::double_integrator) {
            a.velocity += u.segment(i * m, m) * dt;
            a.position += a.velocity * dt;
        } else {
            a.position += u.segment(i * m, m) * dt;
            a.velocity = u.segment(i * m, m);
        }
    }
    next.time = state.time + dt;
    return next;
}

// Desired control: unit-norm attraction toward the goal minus velocity
// damping.  In spread-out mode only leaders are driven (followers get zero);
// in shared mode every agent heads for the common goal.  An agent standing
// exactly on its goal gets a zero direction term.
inline Eigen::VectorXd nominal_control(const SwarmState& state, const ScenarioConfig& cfg) {
    const int n = state.size();
    const int m = state.dimension();
    Eigen::VectorXd u = Eigen::VectorXd::Zero(n * m);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd goal;
        if (cfg.goal_mode == GoalMode::spread_out) {
            if (i >= state.leader_count) continue;  // followers: zero desired input
            goal = cfg.leader_goals[static_cast<size_t>(i)];
        } else {
            goal = cfg.shared_goal;
        }
        const Eigen::VectorXd offset = goal - state.agents[static_cast<size_t>(i)].position;
        const double dist = offset.norm();
        Eigen::VectorXd dir = Eigen::VectorXd::Zero(m);
        if (dist > 1e-12) dir = offset / dist;
        u.segment(i * m, m) = dir - state.agents[static_cast<size_t>(i)].velocity;
    }
    return u;
}

struct TraceStep {
    double t = 0.0;
    Eigen::MatrixXd positions;   // n x m
    Eigen::MatrixXd velocities;  // n x m
    Eigen::MatrixXd controls;    // n x m
    Eigen::VectorXd margin;      // f
    double phi = 0.0;
    Eigen::VectorXd consensus;   // n
    std::vector<std::string> active_rows;
};

struct Trace {
    std::vector<TraceStep> steps;
    // Filled by run_scenario; not derivable from the recorded series.
    int max_active_rows = 0;
    double max_kkt_residual = 0.0;
    std::optional<double> goal_arrival_time;
};

inline bool trace_steps_equal(const Trace& a, const Trace& b) {
    if (a.steps.size() != b.steps.size()) return false;
    for (size_t k = 0; k < a.steps.size(); ++k) {
        const TraceStep& x = a.steps[k];
        const TraceStep& y = b.steps[k];
        if (x.t != y.t || x.phi != y.phi) return false;
        if (x.positions != y.positions || x.velocities != y.velocities ||
            x.controls != y.controls)
            return false;
        if (x.margin.size() != y.margin.size() || x.margin != y.margin) return false;
        if (x.consensus.size() != y.consensus.size() || x.consensus != y.consensus) return false;
        if (x.active_rows != y.active_rows) return false;
    }
    return true;
}

namespace detail {

struct ControlResult {
    Eigen::VectorXd u;
    Eigen::VectorXd margin;
    double phi = 0.0;
    std::vector<std::string> active_rows;
    double kkt_residual = 0.0;
};

// Extreme agents must exist for the margin gradient to be guaranteed
// nonzero; warn when every axis is tied at both ends.
inline bool has_strict_extreme_agent(const Eigen::MatrixXd& positions) {
    const int n = static_cast<int>(positions.rows());
    if (n == 1) return true;
    for (int b = 0; b < positions.cols(); ++b) {
        int argmax = 0, argmin = 0;
        bool max_unique = true, min_unique = true;
        for (int i = 1; i < n; ++i) {
            if (positions(i, b) > positions(argmax, b)) {
                argmax = i;
                max_unique = true;
            } else if (positions(i, b) == positions(argmax, b)) {
                max_unique = false;
            }
            if (positions(i, b) < positions(argmin, b)) {
                argmin = i;
                min_unique = true;
            } else if (positions(i, b) == positions(argmin, b)) {
                min_unique = false;
            }
        }
        if (max_unique || min_unique) return true;
    }
    return false;
}

inline ControlResult compute_control(const SwarmState& state, const ScenarioConfig& cfg) {
    ControlResult out;
    QpProblem problem;
    problem.u_des = nominal_control(state, cfg);

    if (!has_strict_extreme_agent(state.positions()))
        log::warn("no strictly extreme agent at t = " + std::to_string(state.time) +
                  "; margin gradient may vanish");

    if (cfg.dynamics == DynamicsMode::double_integrator) {
        const HocbfChain chain = hocbf_chain(state, cfg.smooth, cfg.robustness_gains);
        out.margin = chain.psi0;
        const ComposedCbf composed = composed_cbf(chain, cfg.composition_weights());
        out.phi = composed.value;

        std::vector<BarrierChain> collision;
        if (cfg.min_distance > 0.0) {
            auto pair = agent_pair_chains(state, cfg.min_distance + cfg.collision_margin,
                                          cfg.collision_gains);
            collision.insert(collision.end(), pair.begin(), pair.end());
        }
        if (!cfg.obstacles.empty()) {
            std::vector<Obstacle> inflated = cfg.obstacles;
            for (Obstacle& o : inflated) o.clearance += cfg.collision_margin;
            auto obs = obstacle_chains(state, inflated, cfg.collision_gains);
            collision.insert(collision.end(), obs.begin(), obs.end());
        }

        if (cfg.compose_mode == ComposeMode::rows) {
            problem.rows.push_back(robustness_constraint(composed, cfg.alpha_robustness));
            for (const BarrierChain& c : collision)
                problem.rows.push_back(to_constraint_row(c, cfg.collision_gains.eta2));
        } else {
            std::vector<BarrierTerm> terms = barrier_terms(chain);
            const int f = static_cast<int>(terms.size());
            for (const BarrierChain& c : collision) terms.push_back(to_barrier_term(c));
            Eigen::VectorXd weights(static_cast<int>(terms.size()));
            weights.head(f) = cfg.composition_weights();
            weights.tail(static_cast<int>(terms.size()) - f).setConstant(cfg.collision_weight);
            const ComposedCbf everything = compose_exponential(terms, weights);
            ConstraintRow row = robustness_constraint(everything, cfg.alpha_robustness);
            row.label = "composed";
            problem.rows.push_back(row);
        }
    } else {
        // Single-integrator comparison mode: all barriers have relative
        // degree 1, so rows are b_dot >= -eta1 b with b_dot = (db/dp) u.
        const Eigen::MatrixXd jac = robustness_margin_grad(state, cfg.smooth);
        out.margin = robustness_margin(state, cfg.smooth);

        std::vector<BarrierTerm> terms(static_cast<size_t>(out.margin.size()));
        for (int c = 0; c < out.margin.size(); ++c) {
            terms[static_cast<size_t>(c)].psi1 = out.margin(c);
            terms[static_cast<size_t>(c)].psi1dot_drift = 0.0;
            terms[static_cast<size_t>(c)].u_coeff = jac.row(c);
        }
        const ComposedCbf composed = compose_exponential(terms, cfg.composition_weights());
        out.phi = composed.value;
        problem.rows.push_back(robustness_constraint(composed, cfg.alpha_robustness));

        const int n = state.size();
        const int m = state.dimension();
        auto degree_one_row = [&](const Eigen::VectorXd& d, double margin, int i, int j,
                                  std::string label) {
            ConstraintRow row;
            row.u_coeff = Eigen::RowVectorXd::Zero(n * m);
            row.u_coeff.segment(i * m, m) = 2.0 * d.transpose();
            if (j >= 0) row.u_coeff.segment(j * m, m) = -2.0 * d.transpose();
            row.rhs = -cfg.collision_gains.eta1 * (d.squaredNorm() - margin * margin);
            row.label = std::move(label);
            return row;
        };
        if (cfg.min_distance > 0.0)
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j)
                    problem.rows.push_back(degree_one_row(
                        state.agents[static_cast<size_t>(i)].position -
                            state.agents[static_cast<size_t>(j)].position,
                        cfg.min_distance + cfg.collision_margin, i, j,
                        "pair_" + std::to_string(i) + "_" + std::to_string(j)));
        for (int i = 0; i < n; ++i)
            for (size_t k = 0; k < cfg.obstacles.size(); ++k)
                problem.rows.push_back(degree_one_row(
                    state.agents[static_cast<size_t>(i)].position - cfg.obstacles[k].position,
                    cfg.obstacles[k].clearance + cfg.collision_margin, i, -1,
                    "obstacle_" + std::to_string(i) + "_" + std::to_string(k)));
    }

    QpSolution sol;
    try {
        sol = solve(problem);
    } catch (const std::exception& e) {
        throw SolverError(std::string("qp solve failed at t = ") + std::to_string(state.time) +
                          ": " + e.what());
    }
    if (sol.status == QpStatus::infeasible) {
        std::string rows_msg;
        for (const auto& [idx, weight] : sol.infeasibility_certificate)
            rows_msg += " " + problem.rows[static_cast<size_t>(idx)].label;
        throw SolverError("qp infeasible at t = " + std::to_string(state.time) +
                          "; conflicting rows:" + rows_msg);
    }
    out.u = sol.u_star;
    out.kkt_residual = sol.kkt_residual;
    for (int idx : sol.active_set)
        out.active_rows.push_back(problem.rows[static_cast<size_t>(idx)].label);
    return out;
}

inline TraceStep make_step(const SwarmState& state, const ControlResult& ctl,
                           const Eigen::VectorXd& consensus) {
    TraceStep step;
    step.t = state.time;
    const int n = state.size();
    const int m = state.dimension();
    step.positions.resize(n, m);
    step.velocities.resize(n, m);
    step.controls.resize(n, m);
    for (int i = 0; i < n; ++i) {
        step.positions.row(i) = state.agents[static_cast<size_t>(i)].position.transpose();
        step.velocities.row(i) = state.agents[static_cast<size_t>(i)].velocity.transpose();
        step.controls.row(i) = ctl.u.segment(i * m, m).transpose();
    }
    step.margin = ctl.margin;
    step.phi = ctl.phi;
    step.consensus = consensus;
    step.active_rows = ctl.active_rows;
    return step;
}

}  // namespace detail

// Runs a scenario to completion: at every dt step the graph, smooth margins,
// safety rows and QP are rebuilt and the swarm integrated; every tau seconds
// a consensus round runs over the hard graph at that instant.  Fully
// deterministic for a fixed config and seed.  The returned trace has one
// record per grid point t = k dt, k = 0..duration/dt.
inline Trace run_scenario(const ScenarioConfig& cfg) {
    cfg.validate();

    SwarmState state = cfg.initial_state();
    Rng rng(cfg.seed);
    const std::vector<AgentRole> roles = cfg.roles();
    const int n = cfg.size();

    // Round-0 consensus values: normal leaders hold the reference, everyone
    // else draws uniformly (ascending agent index).
    Eigen::VectorXd consensus(n);
    for (int i = 0; i < n; ++i) {
        if (roles[static_cast<size_t>(i)] == AgentRole::normal_leader)
            consensus(i) = cfg.leader_reference;
        else
            consensus(i) = rng.uniform01();
    }

    Trace trace;
    const int steps = cfg.step_count();
    trace.steps.reserve(static_cast<size_t>(steps) + 1);

    double next_round = cfg.tau;
    for (int k = 0; k <= steps; ++k) {
        state.time = k * cfg.dt;

        while (state.time >= next_round - 0.5 * cfg.dt) {
            const Eigen::MatrixXi adj = hard_adjacency(state.positions(), cfg.comm_range);
            if (cfg.consensus_mode == ConsensusMode::wmsr)
                consensus = wmsr_update(consensus, adj, roles, cfg.threat_bound,
                                        cfg.leader_reference, rng);
            else
                consensus = linear_update(consensus, adj, roles, cfg.leader_reference, rng);
            next_round += cfg.tau;
        }

        const detail::ControlResult ctl = detail::compute_control(state, cfg);
        trace.max_active_rows =
            std::max(trace.max_active_rows, static_cast<int>(ctl.active_rows.size()));
        trace.max_kkt_residual = std::max(trace.max_kkt_residual, ctl.kkt_residual);
        trace.steps.push_back(detail::make_step(state, ctl, consensus));

        if (!trace.goal_arrival_time && cfg.exit_line_y) {
            double lowest = std::numeric_limits<double>::infinity();
            for (int i = 0; i < n; ++i)
                lowest = std::min(lowest,
                                  state.agents[static_cast<size_t>(i)].position(cfg.dimension - 1));
            if (lowest >= *cfg.exit_line_y - 0.5) trace.goal_arrival_time = state.time;
        }

        if (k < steps) state = step_dynamics(state, ctl.u, cfg.dt, cfg.dynamics);
    }
    return trace;
}

struct InvariantViolation {
    double t = 0.0;
    std::string what;
};

// Post-hoc checks over a recorded trace: hard-graph robustness via the
// combinatorial oracle at a fixed stride, margin recomputation and sign,
// pairwise and obstacle clearances, and the consensus error at the end.
struct InvariantReport {
    std::vector<InvariantViolation> violations;
    double min_margin = std::numeric_limits<double>::infinity();
    double min_pair_distance = std::numeric_limits<double>::infinity();
    double min_obstacle_clearance = std::numeric_limits<double>::infinity();
    int maintained_level = 0;
    double final_consensus_error = 0.0;
    bool robustness_ok = true;
    bool margin_ok = true;
    bool collision_ok = true;
    bool consensus_ok = true;

    bool ok() const { return violations.empty(); }
};

inline InvariantReport check_invariants(const Trace& trace, const ScenarioConfig& cfg,
                                        int stride = 0) {
    if (stride < 1) stride = cfg.check_every;
    InvariantReport rep;
    if (trace.steps.empty()) return rep;
    constexpr double dist_tol = 1e-6;

    const std::vector<int> leaders = cfg.leader_indices();
    const std::vector<AgentRole> roles = cfg.roles();
    rep.maintained_level = std::numeric_limits<int>::max();

    const size_t count = trace.steps.size();
    for (size_t k = 0; k < count; ++k) {
        const TraceStep& step = trace.steps[k];
        const bool checkpoint = (k % static_cast<size_t>(stride) == 0) || k + 1 == count;

        if (checkpoint) {
            const Eigen::MatrixXi adj = hard_adjacency(step.positions, cfg.comm_range);
            if (!percolates(adj, leaders, cfg.smooth.r)) {
                rep.robustness_ok = false;
                rep.violations.push_back(
                    {step.t, "hard graph lost strong " + std::to_string(cfg.smooth.r) +
                                 "-robustness"});
            }
            rep.maintained_level =
                std::min(rep.maintained_level, max_strong_robustness(adj, leaders));

            SwarmState st;
            st.time = step.t;
            st.leader_count = static_cast<int>(leaders.size());
            st.comm_range = cfg.comm_range;
            for (int i = 0; i < step.positions.rows(); ++i)
                st.agents.push_back({step.positions.row(i).transpose(),
                                     step.velocities.row(i).transpose()});
            const Eigen::VectorXd margin = robustness_margin(st, cfg.smooth);
            if ((margin - step.margin).cwiseAbs().maxCoeff() > 1e-9) {
                rep.margin_ok = false;
                rep.violations.push_back({step.t, "recorded margin differs from recomputation"});
            }
        }

        const double step_min_margin = step.margin.minCoeff();
        rep.min_margin = std::min(rep.min_margin, step_min_margin);
        if (step_min_margin < 0.0) {
            rep.margin_ok = false;
            rep.violations.push_back({step.t, "robustness margin went negative"});
        }

        for (int i = 0; i < step.positions.rows(); ++i) {
            for (int j = i + 1; j < step.positions.rows(); ++j) {
                const double d = (step.positions.row(i) - step.positions.row(j)).norm();
                rep.min_pair_distance = std::min(rep.min_pair_distance, d);
                if (cfg.min_distance > 0.0 && d < cfg.min_distance - dist_tol) {
                    rep.collision_ok = false;
                    rep.violations.push_back(
                        {step.t, "agents " + std::to_string(i) + "," + std::to_string(j) +
                                     " closer than the minimum distance"});
                }
            }
            for (size_t o = 0; o < cfg.obstacles.size(); ++o) {
                const double d =
                    (step.positions.row(i).transpose() - cfg.obstacles[o].position).norm();
                rep.min_obstacle_clearance = std::min(rep.min_obstacle_clearance, d);
                if (d < cfg.obstacles[o].clearance - dist_tol) {
                    rep.collision_ok = false;
                    rep.violations.push_back(
                        {step.t, "agent " + std::to_string(i) + " violated clearance of obstacle " +
                                     std::to_string(o)});
                }
            }
        }
    }

    rep.final_consensus_error =
        consensus_error(trace.steps.back().consensus, roles, cfg.leader_reference);
    rep.consensus_ok = rep.final_consensus_error < cfg.consensus_tol;
    if (!rep.consensus_ok)
        rep.violations.push_back({trace.steps.back().t,
                                  "normal followers did not reach the leader reference"});
    if (rep.maintained_level == std::numeric_limits<int>::max()) rep.maintained_level = 0;
    return rep;
}

struct RunSummary {
    std::string scenario;
    double min_margin = 0.0;
    int maintained_level = 0;
    double final_consensus_error = 0.0;
    std::optional<double> goal_arrival_time;
    int max_active_rows = 0;
    double max_kkt_residual = 0.0;
    bool robustness_ok = false;
    bool margin_ok = false;
    bool collision_ok = false;
    bool consensus_ok = false;
    bool qp_ok = false;

    bool passed() const {
        return robustness_ok && margin_ok && collision_ok && consensus_ok && qp_ok;
    }
};

inline RunSummary summarize(const Trace& trace, const ScenarioConfig& cfg,
                            const InvariantReport& rep) {
    RunSummary s;
    s.scenario = cfg.name;
    s.min_margin = rep.min_margin;
    s.maintained_level = rep.maintained_level;
    s.final_consensus_error = rep.final_consensus_error;
    s.goal_arrival_time = trace.goal_arrival_time;
    s.max_active_rows = trace.max_active_rows;
    s.max_kkt_residual = trace.max_kkt_residual;
    s.robustness_ok = rep.robustness_ok;
    s.margin_ok = rep.margin_ok;
    s.collision_ok = rep.collision_ok;
    s.consensus_ok = rep.consensus_ok;
    s.qp_ok = trace.max_kkt_residual <= 1e-8;
    return s;
}

}  // namespace rswarm
