#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

#include "rswarm/qp.hpp"
#include "rswarm/smooth_cbf.hpp"
#include "rswarm/state.hpp"

namespace rswarm {

struct Obstacle {
    Eigen::VectorXd position;
    double clearance = 0.0;  // required distance from the obstacle point
};

// Relative-degree-2 chain of one squared-distance barrier b, kept in split
// form so it can either become a standalone QP row or a term of an
// exponential composition.
struct BarrierChain {
    double psi0 = 0.0;
    double psi1 = 0.0;
    double psi1dot_drift = 0.0;
    Eigen::RowVectorXd u_coeff;
    std::string label;
};

namespace detail {

// Chain for b = |d|^2 - margin^2 where d is the offset of agent i from agent
// j (j < 0 for a static obstacle) and dv its time derivative:
//   psi1 = 2 d.dv + eta1 b
//   psi1_dot = 2 |dv|^2 + 2 d.(du) + eta1 (2 d.dv)
inline BarrierChain distance_barrier_chain(const Eigen::VectorXd& d, const Eigen::VectorXd& dv,
                                           double margin, int agent_i, int agent_j, int n, int m,
                                           const HocbfGains& gains, std::string label) {
    BarrierChain chain;
    chain.label = std::move(label);
    chain.psi0 = d.squaredNorm() - margin * margin;
    const double b_dot = 2.0 * d.dot(dv);
    chain.psi1 = b_dot + gains.eta1 * chain.psi0;
    chain.psi1dot_drift = 2.0 * dv.squaredNorm() + gains.eta1 * b_dot;
    chain.u_coeff = Eigen::RowVectorXd::Zero(n * m);
    chain.u_coeff.segment(agent_i * m, m) = 2.0 * d.transpose();
    if (agent_j >= 0) chain.u_coeff.segment(agent_j * m, m) = -2.0 * d.transpose();
    return chain;
}

}  // namespace detail

// One chain per unordered agent pair keeping |p_i - p_j| >= min_distance.
inline std::vector<BarrierChain> agent_pair_chains(const SwarmState& state, double min_distance,
                                                   const HocbfGains& gains) {
    if (!(min_distance > 0.0)) throw std::invalid_argument("min_distance must be positive");
    gains.validate();
    const int n = state.size();
    const int m = state.dimension();
    std::vector<BarrierChain> chains;
    chains.reserve(static_cast<size_t>(n) * (n - 1) / 2);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const Eigen::VectorXd d = state.agents[i].position - state.agents[j].position;
            const Eigen::VectorXd dv = state.agents[i].velocity - state.agents[j].velocity;
            chains.push_back(detail::distance_barrier_chain(
                d, dv, min_distance, i, j, n, m, gains,
                "pair_" + std::to_string(i) + "_" + std::to_string(j)));
        }
    }
    return chains;
}

// One chain per (agent, obstacle) keeping |p_i - o_k| >= clearance_k.
inline std::vector<BarrierChain> obstacle_chains(const SwarmState& state,
                                                 const std::vector<Obstacle>& obstacles,
                                                 const HocbfGains& gains) {
    gains.validate();
    const int n = state.size();
    const int m = state.dimension();
    std::vector<BarrierChain> chains;
    chains.reserve(static_cast<size_t>(n) * obstacles.size());
    for (int i = 0; i < n; ++i) {
        for (size_t k = 0; k < obstacles.size(); ++k) {
            if (!(obstacles[k].clearance > 0.0))
                throw std::invalid_argument("obstacle clearance must be positive");
            const Eigen::VectorXd d = state.agents[i].position - obstacles[k].position;
            chains.push_back(detail::distance_barrier_chain(
                d, state.agents[i].velocity, obstacles[k].clearance, i, -1, n, m, gains,
                "obstacle_" + std::to_string(i) + "_" + std::to_string(k)));
        }
    }
    return chains;
}

// psi2 >= 0 written as u_coeff . u >= rhs.
inline ConstraintRow to_constraint_row(const BarrierChain& chain, double eta2) {
    ConstraintRow row;
    row.u_coeff = chain.u_coeff;
    row.rhs = -(chain.psi1dot_drift + eta2 * chain.psi1);
    row.label = chain.label;
    return row;
}

inline std::vector<ConstraintRow> agent_pair_constraints(const SwarmState& state,
                                                         double min_distance,
                                                         const HocbfGains& gains) {
    std::vector<ConstraintRow> rows;
    for (const BarrierChain& chain : agent_pair_chains(state, min_distance, gains))
        rows.push_back(to_constraint_row(chain, gains.eta2));
    return rows;
}

inline std::vector<ConstraintRow> obstacle_constraints(const SwarmState& state,
                                                       const std::vector<Obstacle>& obstacles,
                                                       const HocbfGains& gains) {
    std::vector<ConstraintRow> rows;
    for (const BarrierChain& chain : obstacle_chains(state, obstacles, gains))
        rows.push_back(to_constraint_row(chain, gains.eta2));
    return rows;
}

// The composed robustness barrier as a single QP row:
//   drift + u_coeff . u >= -alpha_gain * phi.
inline ConstraintRow robustness_constraint(const ComposedCbf& composed, double alpha_gain) {
    if (!(alpha_gain > 0.0)) throw std::invalid_argument("alpha_gain must be positive");
    ConstraintRow row;
    row.u_coeff = composed.u_coeff;
    row.rhs = -composed.drift - alpha_gain * composed.value;
    row.label = "robustness";
    return row;
}

inline BarrierTerm to_barrier_term(const BarrierChain& chain) {
    BarrierTerm term;
    term.psi1 = chain.psi1;
    term.psi1dot_drift = chain.psi1dot_drift;
    term.u_coeff = chain.u_coeff;
    return term;
}

}  // namespace rswarm
