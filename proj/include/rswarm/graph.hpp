#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "rswarm/sigmoid.hpp"

namespace rswarm {

// positions: one row per agent (n x m).

inline Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& positions) {
    const int n = static_cast<int>(positions.rows());
    if (n < 1) throw std::invalid_argument("pairwise_distances: need at least one agent");
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double dist = (positions.row(i) - positions.row(j)).norm();
            d(i, j) = dist;
            d(j, i) = dist;
        }
    }
    return d;
}

// Hard 0/1 adjacency: edge iff the pair distance is strictly below the
// communication range.  Comparison is done on squared norms so an agent pair
// at exactly the range never rounds into an edge.
inline Eigen::MatrixXi hard_adjacency(const Eigen::MatrixXd& positions, double comm_range) {
    if (!(comm_range > 0.0)) throw std::invalid_argument("hard_adjacency: comm_range must be positive");
    const int n = static_cast<int>(positions.rows());
    const double r2 = comm_range * comm_range;
    Eigen::MatrixXi a = Eigen::MatrixXi::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double nsq = (positions.row(i) - positions.row(j)).squaredNorm();
            const int e = nsq < r2 ? 1 : 0;
            a(i, j) = e;
            a(j, i) = e;
        }
    }
    return a;
}

// Smooth adjacency entry: sigma_{s,q}((R^2 - |p_i-p_j|^2)^3) inside the range,
// exactly 0 at and beyond it.  The cubic makes the entry twice continuously
// differentiable across the range boundary.  Entries live in [0, 1), strictly
// below the hard entry on every edge.
inline double smooth_adjacency_entry(double squared_distance, double comm_range,
                                     double s_adj, double q_adj) {
    const double c = comm_range * comm_range - squared_distance;
    if (c <= 0.0) return 0.0;
    return sigmoid(c * c * c, s_adj, q_adj);
}

inline Eigen::MatrixXd smooth_adjacency(const Eigen::MatrixXd& positions, double comm_range,
                                        double s_adj, double q_adj) {
    if (!(comm_range > 0.0)) throw std::invalid_argument("smooth_adjacency: comm_range must be positive");
    if (!(s_adj > 0.0)) throw std::invalid_argument("smooth_adjacency: s_adj must be positive");
    if (!(q_adj > 0.0 && q_adj < 1.0)) throw std::invalid_argument("smooth_adjacency: q_adj must be in (0,1)");
    const int n = static_cast<int>(positions.rows());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double nsq = (positions.row(i) - positions.row(j)).squaredNorm();
            const double e = smooth_adjacency_entry(nsq, comm_range, s_adj, q_adj);
            a(i, j) = e;
            a(j, i) = e;
        }
    }
    return a;
}

// First- and second-order differentials of one smooth adjacency entry.
// Inputs are the relative position d = p_i - p_j and relative velocity
// dv = v_i - v_j of the two endpoints.  grad is the derivative with respect
// to p_i (the derivative with respect to p_j is its negation); *_dot fields
// are time derivatives along dp/dt = v with the given relative velocity.
//
// Differentiation runs through the squared distance, so there is no
// square-root singularity at coincident agents.
struct SmoothEdgeDiff {
    double value = 0.0;
    double value_dot = 0.0;
    Eigen::VectorXd grad;
    Eigen::VectorXd grad_dot;
};

inline SmoothEdgeDiff smooth_edge_diff(const Eigen::VectorXd& d, const Eigen::VectorXd& dv,
                                       double comm_range, double s_adj, double q_adj) {
    SmoothEdgeDiff out;
    const int m = static_cast<int>(d.size());
    out.grad = Eigen::VectorXd::Zero(m);
    out.grad_dot = Eigen::VectorXd::Zero(m);
    const double nsq = d.squaredNorm();
    const double c = comm_range * comm_range - nsq;
    if (c <= 0.0) return out;  // constant-zero branch: all differentials vanish

    const double y = c * c * c;
    const double sp = sigmoid_deriv(y, s_adj, q_adj);
    const double spp = sigmoid_second_deriv(y, s_adj, q_adj);

    const double n_dot = 2.0 * d.dot(dv);
    const double y_dot = -3.0 * c * c * n_dot;

    out.value = sigmoid(y, s_adj, q_adj);
    out.value_dot = sp * y_dot;

    // grad = w * d with w = dsigma/dn = sigma' * (-3 c^2) * 2
    const double w = -6.0 * sp * c * c;
    const double w_dot = -6.0 * spp * y_dot * c * c + 12.0 * sp * c * n_dot;
    out.grad = w * d;
    out.grad_dot = w_dot * d + w * dv;
    return out;
}

// Gradients of every smooth adjacency entry with respect to agent positions.
// grad(i,j) holds d a_ij / d p_i; the partial with respect to p_j is the
// negation, and all other agents' coordinates have zero partials.
struct SmoothAdjacencyPartials {
    int n = 0;
    int m = 0;
    Eigen::MatrixXd value;
    std::vector<Eigen::VectorXd> grads;  // index i*n + j

    const Eigen::VectorXd& grad(int i, int j) const { return grads[static_cast<size_t>(i) * n + j]; }
};

inline SmoothAdjacencyPartials smooth_adjacency_partials(const Eigen::MatrixXd& positions,
                                                         double comm_range, double s_adj,
                                                         double q_adj) {
    SmoothAdjacencyPartials out;
    out.n = static_cast<int>(positions.rows());
    out.m = static_cast<int>(positions.cols());
    out.value = Eigen::MatrixXd::Zero(out.n, out.n);
    out.grads.assign(static_cast<size_t>(out.n) * out.n, Eigen::VectorXd::Zero(out.m));
    const Eigen::VectorXd zero_vel = Eigen::VectorXd::Zero(out.m);
    for (int i = 0; i < out.n; ++i) {
        for (int j = i + 1; j < out.n; ++j) {
            const Eigen::VectorXd d = (positions.row(i) - positions.row(j)).transpose();
            const SmoothEdgeDiff e = smooth_edge_diff(d, zero_vel, comm_range, s_adj, q_adj);
            out.value(i, j) = e.value;
            out.value(j, i) = e.value;
            out.grads[static_cast<size_t>(i) * out.n + j] = e.grad;
            out.grads[static_cast<size_t>(j) * out.n + i] = -e.grad;
        }
    }
    return out;
}

}  // namespace rswarm
