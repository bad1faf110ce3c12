#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "rswarm/graph.hpp"
#include "rswarm/sigmoid.hpp"
#include "rswarm/state.hpp"

namespace rswarm {

// Parameters of the smooth robustness encoding.  s/q shape the step applied
// to layer sums, s_adj/q_adj shape the smooth adjacency, r is the robustness
// level to maintain, delta the recursion depth, epsilon the margin subtracted
// from the final activation.
struct SmoothParams {
    double s = 5.0;
    double s_adj = 10.0;
    double q = 0.5;
    double q_adj = 0.5;
    int r = 1;
    int delta = 4;
    double epsilon = 1e-4;

    void validate(int leader_count, int follower_count) const {
        if (!(s > 0.0)) throw std::invalid_argument("smooth.s must be positive");
        if (!(s_adj > 0.0)) throw std::invalid_argument("smooth.s_adj must be positive");
        if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("smooth.q must be in (0,1)");
        if (!(q_adj > 0.0 && q_adj < 1.0)) throw std::invalid_argument("smooth.q_adj must be in (0,1)");
        if (r < 1) throw std::invalid_argument("smooth.r must be >= 1");
        if (r > leader_count - 1)
            throw std::invalid_argument(
                "smooth.r must be at most leader_count - 1; the smooth activation of a follower "
                "cannot stay nonnegative otherwise");
        if (delta < 1 || delta > follower_count)
            throw std::invalid_argument("smooth.delta must be in [1, follower_count]");
        if (!(epsilon > 0.0)) throw std::invalid_argument("smooth.epsilon must be positive");
    }
};

// Smoothed activation layers: layers[k] holds the follower activation vector
// after k rounds, layers[0] = 0.  Every entry lies in the open interval
// (-q, 1).
struct SmoothActivation {
    std::vector<Eigen::VectorXd> layers;

    const Eigen::VectorXd& final_layer() const { return layers.back(); }
};

// Smooth analog of the activation recursion: follower j's next value is
// sigma_{s,q}(sum_i abar_ji * mu_i - r), where mu_i is 1 for leaders and the
// previous layer value for followers.  Summation order is fixed (ascending
// agent index) so results are bitwise deterministic.
inline SmoothActivation smooth_percolation(const Eigen::MatrixXd& smooth_adj, int leader_count,
                                           const SmoothParams& p) {
    const int n = static_cast<int>(smooth_adj.rows());
    if (leader_count < 1 || leader_count >= n)
        throw std::invalid_argument("smooth_percolation: need 1 <= leader_count < n");
    const int f = n - leader_count;

    SmoothActivation act;
    act.layers.reserve(static_cast<size_t>(p.delta) + 1);
    act.layers.push_back(Eigen::VectorXd::Zero(f));

    for (int k = 1; k <= p.delta; ++k) {
        const Eigen::VectorXd& prev = act.layers.back();
        Eigen::VectorXd next(f);
        for (int c = 0; c < f; ++c) {
            const int j = leader_count + c;
            double sum = -static_cast<double>(p.r);
            for (int i = 0; i < n; ++i) {
                if (i == j) continue;
                const double a = smooth_adj(j, i);
                sum += a * (i < leader_count ? 1.0 : prev(i - leader_count));
            }
            next(c) = sigmoid(sum, p.s, p.q);
        }
        act.layers.push_back(std::move(next));
    }
    return act;
}

namespace detail {

// One forward sweep through the smooth activation recursion carrying the
// value, its position Jacobian, and (optionally) the directional derivative
// of both along a direction field v on positions.  Column order of the
// Jacobian is agent-major: coordinate b of agent i sits at column i*m + b.
//
// Per layer, with B_j = sum_i abar_ji mu_i - r:
//   pi_j      = sigma(B_j)
//   dpi_j/dp  = sigma'(B_j) * dB_j/dp
//   (d/dt)pi_j = sigma'(B_j) * (d/dt)B_j
//   (d/dt)dpi_j/dp = sigma''(B_j) (d/dt)B_j dB_j/dp + sigma'(B_j) (d/dt)dB_j/dp
// where mu_i is 1 for leaders (constant) and the previous follower layer
// otherwise, and the adjacency differentials come from smooth_edge_diff.
struct MarginSweep {
    Eigen::VectorXd margin;      // f
    Eigen::VectorXd margin_dot;  // f, only when a direction is supplied
    Eigen::MatrixXd jac;         // f x M
    Eigen::MatrixXd jac_dot;     // f x M, only when a direction is supplied
};

inline MarginSweep margin_sweep(const SwarmState& state, const SmoothParams& p,
                                const Eigen::VectorXd* direction) {
    const int n = state.size();
    const int m = state.dimension();
    const int l = state.leader_count;
    const int f = n - l;
    const int M = n * m;
    p.validate(l, f);
    if (direction != nullptr && direction->size() != M)
        throw std::invalid_argument("margin_sweep: direction must have n*m entries");

    // Pairwise smooth adjacency differentials.  grads[j*n+i] = d abar_ji / d p_j.
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd a_dot = Eigen::MatrixXd::Zero(n, n);
    std::vector<Eigen::VectorXd> grads(static_cast<size_t>(n) * n, Eigen::VectorXd::Zero(m));
    std::vector<Eigen::VectorXd> grad_dots;
    if (direction != nullptr)
        grad_dots.assign(static_cast<size_t>(n) * n, Eigen::VectorXd::Zero(m));

    const Eigen::VectorXd zero_dir = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const Eigen::VectorXd d = state.agents[i].position - state.agents[j].position;
            Eigen::VectorXd dv = zero_dir;
            if (direction != nullptr)
                dv = direction->segment(i * m, m) - direction->segment(j * m, m);
            const SmoothEdgeDiff e = smooth_edge_diff(d, dv, state.comm_range, p.s_adj, p.q_adj);
            a(i, j) = e.value;
            a(j, i) = e.value;
            grads[static_cast<size_t>(i) * n + j] = e.grad;
            grads[static_cast<size_t>(j) * n + i] = -e.grad;
            if (direction != nullptr) {
                a_dot(i, j) = e.value_dot;
                a_dot(j, i) = e.value_dot;
                grad_dots[static_cast<size_t>(i) * n + j] = e.grad_dot;
                grad_dots[static_cast<size_t>(j) * n + i] = -e.grad_dot;
            }
        }
    }

    Eigen::VectorXd pi = Eigen::VectorXd::Zero(f);
    Eigen::VectorXd pi_dot = Eigen::VectorXd::Zero(f);
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(f, M);
    Eigen::MatrixXd G_dot = Eigen::MatrixXd::Zero(f, M);

    Eigen::RowVectorXd S(M), S_dot(M);
    for (int k = 1; k <= p.delta; ++k) {
        Eigen::VectorXd pi_next(f), pi_dot_next(f);
        Eigen::MatrixXd G_next(f, M), G_dot_next(f, M);
        for (int c = 0; c < f; ++c) {
            const int j = l + c;
            double B = -static_cast<double>(p.r);
            double B_dot = 0.0;
            S.setZero();
            if (direction != nullptr) S_dot.setZero();

            for (int i = 0; i < n; ++i) {
                if (i == j) continue;
                const double a_ji = a(j, i);
                const double mu = (i < l) ? 1.0 : pi(i - l);
                B += a_ji * mu;

                const Eigen::VectorXd& g = grads[static_cast<size_t>(j) * n + i];
                S.segment(j * m, m) += mu * g.transpose();
                S.segment(i * m, m) -= mu * g.transpose();
                if (i >= l) S += a_ji * G.row(i - l);

                if (direction != nullptr) {
                    const double mu_dot = (i < l) ? 0.0 : pi_dot(i - l);
                    const double ad = a_dot(j, i);
                    B_dot += ad * mu + a_ji * mu_dot;
                    const Eigen::VectorXd& gd = grad_dots[static_cast<size_t>(j) * n + i];
                    S_dot.segment(j * m, m) += (mu_dot * g + mu * gd).transpose();
                    S_dot.segment(i * m, m) -= (mu_dot * g + mu * gd).transpose();
                    if (i >= l) S_dot += ad * G.row(i - l) + a_ji * G_dot.row(i - l);
                }
            }

            const double sp = sigmoid_deriv(B, p.s, p.q);
            pi_next(c) = sigmoid(B, p.s, p.q);
            G_next.row(c) = sp * S;
            if (direction != nullptr) {
                const double spp = sigmoid_second_deriv(B, p.s, p.q);
                pi_dot_next(c) = sp * B_dot;
                G_dot_next.row(c) = (spp * B_dot) * S + sp * S_dot;
            }
        }
        pi.swap(pi_next);
        G.swap(G_next);
        if (direction != nullptr) {
            pi_dot.swap(pi_dot_next);
            G_dot.swap(G_dot_next);
        }
    }

    MarginSweep out;
    out.margin = pi.array() - p.epsilon;
    out.margin_dot = pi_dot;
    out.jac = std::move(G);
    out.jac_dot = std::move(G_dot);
    return out;
}

}  // namespace detail

// Robustness margin h_c per follower: final smooth activation minus epsilon.
// Entrywise nonnegativity certifies strong r-robustness of the hard graph
// with respect to the leader set (the converse does not hold).
inline Eigen::VectorXd robustness_margin(const SwarmState& state, const SmoothParams& p) {
    return detail::margin_sweep(state, p, nullptr).margin;
}

// f x M Jacobian of the margin with respect to stacked agent positions,
// accumulated forward through the recursion (exact chain rule, no automatic
// differentiation).
inline Eigen::MatrixXd robustness_margin_grad(const SwarmState& state, const SmoothParams& p) {
    return detail::margin_sweep(state, p, nullptr).jac;
}

// Directional derivative of the margin Jacobian along the position direction
// v (an M-vector): row c equals (d^2 h_c / d p^2) v.
inline Eigen::MatrixXd hessian_vector_product(const SwarmState& state, const SmoothParams& p,
                                              const Eigen::VectorXd& v) {
    return detail::margin_sweep(state, p, &v).jac_dot;
}

// Finite-difference fallback for the directional Jacobian derivative;
// kept for cross-validating the analytic sweep.
inline Eigen::MatrixXd hessian_vector_product_fd(const SwarmState& state, const SmoothParams& p,
                                                 const Eigen::VectorXd& v, double step = 1e-5) {
    const Eigen::VectorXd x0 = [&] {
        const int m = state.dimension();
        Eigen::VectorXd x(state.size() * m);
        for (int i = 0; i < state.size(); ++i)
            x.segment(i * m, m) = state.agents[static_cast<size_t>(i)].position;
        return x;
    }();
    SwarmState plus = state, minus = state;
    plus.set_stacked_positions(x0 + step * v);
    minus.set_stacked_positions(x0 - step * v);
    return (robustness_margin_grad(plus, p) - robustness_margin_grad(minus, p)) / (2.0 * step);
}

struct HocbfGains {
    double eta1 = 1.0;
    double eta2 = 1.0;

    void validate() const {
        if (!(eta1 > 0.0 && eta2 > 0.0))
            throw std::invalid_argument("chain gains eta1, eta2 must be positive");
    }
};

// Relative-degree-2 chains for all follower margins at once:
//   psi0 = h,  psi1 = dh/dp . v + eta1 psi0,
//   psi2 = psi1dot_drift + (dh/dp) u + eta2 psi1,
// with psi1dot_drift = v^T (d^2h/dp^2) v + eta1 (dh/dp) v.  u_coeff holds the
// control coefficient rows (the margin Jacobian).
struct HocbfChain {
    double eta1 = 1.0;
    double eta2 = 1.0;
    Eigen::VectorXd psi0;
    Eigen::VectorXd psi1;
    Eigen::VectorXd psi1dot_drift;
    Eigen::MatrixXd u_coeff;  // f x M

    Eigen::VectorXd psi2_drift() const { return psi1dot_drift + eta2 * psi1; }

    // psi2 evaluated at a concrete control input.
    Eigen::VectorXd psi2(const Eigen::VectorXd& u) const { return psi2_drift() + u_coeff * u; }
};

inline HocbfChain hocbf_chain(const SwarmState& state, const SmoothParams& p,
                              const HocbfGains& gains) {
    gains.validate();
    const Eigen::VectorXd v = state.stacked_velocities();
    const detail::MarginSweep sweep = detail::margin_sweep(state, p, &v);

    HocbfChain chain;
    chain.eta1 = gains.eta1;
    chain.eta2 = gains.eta2;
    chain.psi0 = sweep.margin;
    const Eigen::VectorXd h_dot = sweep.jac * v;
    chain.psi1 = h_dot + gains.eta1 * sweep.margin;
    chain.psi1dot_drift = sweep.jac_dot * v + gains.eta1 * h_dot;
    chain.u_coeff = sweep.jac;
    return chain;
}

// One term of an exponential barrier composition: a degree-1 barrier value
// psi1 with drift and control coefficient of its time derivative.
struct BarrierTerm {
    double psi1 = 0.0;
    double psi1dot_drift = 0.0;
    Eigen::RowVectorXd u_coeff;
};

// Composed barrier phi = 1 - sum_c exp(-w_c psi1_c) together with the affine
// form of its time derivative: phi_dot = drift + u_coeff . u.  phi >= 0
// forces every component psi1_c >= 0.
struct ComposedCbf {
    Eigen::VectorXd weights;
    double value = 0.0;
    Eigen::RowVectorXd u_coeff;
    double drift = 0.0;
};

inline ComposedCbf compose_exponential(const std::vector<BarrierTerm>& terms,
                                       const Eigen::VectorXd& weights) {
    if (static_cast<int>(terms.size()) != weights.size())
        throw std::invalid_argument("compose_exponential: one weight per term required");
    if (terms.empty()) throw std::invalid_argument("compose_exponential: need at least one term");
    for (int c = 0; c < weights.size(); ++c)
        if (!(weights(c) > 0.0))
            throw std::invalid_argument("compose_exponential: weights must be positive");

    const int M = static_cast<int>(terms.front().u_coeff.size());
    ComposedCbf out;
    out.weights = weights;
    out.value = 1.0;
    out.u_coeff = Eigen::RowVectorXd::Zero(M);
    out.drift = 0.0;
    for (size_t c = 0; c < terms.size(); ++c) {
        const double w = weights(static_cast<int>(c));
        // exp argument clamped just below overflow; barriers this deep in
        // violation saturate the certificate anyway
        const double e = std::exp(std::min(-w * terms[c].psi1, 700.0));
        out.value -= e;
        const double lambda = w * e;
        out.u_coeff += lambda * terms[c].u_coeff;
        out.drift += lambda * terms[c].psi1dot_drift;
    }
    return out;
}

inline std::vector<BarrierTerm> barrier_terms(const HocbfChain& chain) {
    std::vector<BarrierTerm> terms(static_cast<size_t>(chain.psi1.size()));
    for (int c = 0; c < chain.psi1.size(); ++c) {
        terms[static_cast<size_t>(c)].psi1 = chain.psi1(c);
        terms[static_cast<size_t>(c)].psi1dot_drift = chain.psi1dot_drift(c);
        terms[static_cast<size_t>(c)].u_coeff = chain.u_coeff.row(c);
    }
    return terms;
}

inline ComposedCbf composed_cbf(const HocbfChain& chain, const Eigen::VectorXd& weights) {
    return compose_exponential(barrier_terms(chain), weights);
}

// Gradient of the composed barrier value with respect to stacked positions,
// holding velocities fixed:
//   dphi/dp = sum_c w_c exp(-w_c psi1_c) (d psi1_c / dp)
// with d psi1_c / dp = (d^2 h_c/dp^2) v + eta1 dh_c/dp.
inline Eigen::RowVectorXd composed_cbf_position_gradient(const SwarmState& state,
                                                         const SmoothParams& p,
                                                         const HocbfGains& gains,
                                                         const Eigen::VectorXd& weights) {
    gains.validate();
    const Eigen::VectorXd v = state.stacked_velocities();
    const detail::MarginSweep sweep = detail::margin_sweep(state, p, &v);
    const int f = static_cast<int>(sweep.margin.size());
    if (weights.size() != f)
        throw std::invalid_argument("composed_cbf_position_gradient: one weight per follower");

    Eigen::RowVectorXd grad = Eigen::RowVectorXd::Zero(sweep.jac.cols());
    for (int c = 0; c < f; ++c) {
        const double psi1 = sweep.jac.row(c).dot(v) + gains.eta1 * sweep.margin(c);
        const double lambda = weights(c) * std::exp(std::min(-weights(c) * psi1, 700.0));
        grad += lambda * (sweep.jac_dot.row(c) + gains.eta1 * sweep.jac.row(c));
    }
    return grad;
}

}  // namespace rswarm
