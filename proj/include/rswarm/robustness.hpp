#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace rswarm {

namespace detail {

inline void check_leader_set(const Eigen::MatrixXi& adj, const std::vector<int>& leaders) {
    const int n = static_cast<int>(adj.rows());
    if (adj.cols() != n) throw std::invalid_argument("adjacency matrix must be square");
    if (leaders.empty()) throw std::invalid_argument("leader set must be nonempty");
    std::vector<char> seen(static_cast<size_t>(n), 0);
    for (int v : leaders) {
        if (v < 0 || v >= n) throw std::invalid_argument("leader index out of range");
        if (seen[static_cast<size_t>(v)]) throw std::invalid_argument("duplicate leader index");
        seen[static_cast<size_t>(v)] = 1;
    }
}

// Row i of the adjacency as a neighbor bitmask (requires n <= 32).
inline std::vector<std::uint32_t> row_masks(const Eigen::MatrixXi& adj) {
    const int n = static_cast<int>(adj.rows());
    std::vector<std::uint32_t> rows(static_cast<size_t>(n), 0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && adj(i, j) != 0) rows[static_cast<size_t>(i)] |= (1u << j);
    return rows;
}

}  // namespace detail

// One activation process: iterations[k] is the 0/1 activation vector after k
// rounds, starting from the leader set.  Monotone per node; at most
// follower-count rounds are recorded (the process is stationary afterwards).
struct ActivationTrace {
    std::vector<Eigen::VectorXi> iterations;

    bool all_active() const {
        if (iterations.empty()) return false;
        const Eigen::VectorXi& last = iterations.back();
        for (int i = 0; i < last.size(); ++i)
            if (last(i) == 0) return false;
        return true;
    }
};

// Iterative activation with threshold r: an inactive node activates once it
// has at least r active neighbors; active nodes stay active.  Stops at the
// first fixed point (at most follower-count iterations).
inline ActivationTrace bootstrap_percolate(const Eigen::MatrixXi& adj,
                                           const std::vector<int>& leaders, int r) {
    detail::check_leader_set(adj, leaders);
    if (r < 1) throw std::invalid_argument("activation threshold r must be >= 1");
    const int n = static_cast<int>(adj.rows());

    Eigen::VectorXi active = Eigen::VectorXi::Zero(n);
    for (int v : leaders) active(v) = 1;

    ActivationTrace trace;
    trace.iterations.push_back(active);

    const int max_iters = n - static_cast<int>(leaders.size());
    for (int k = 0; k < max_iters; ++k) {
        Eigen::VectorXi next = active;
        bool changed = false;
        for (int j = 0; j < n; ++j) {
            if (active(j) != 0) continue;
            int count = 0;
            for (int i = 0; i < n; ++i)
                if (i != j && adj(j, i) != 0 && active(i) != 0) ++count;
            if (count >= r) {
                next(j) = 1;
                changed = true;
            }
        }
        if (!changed) break;
        active = next;
        trace.iterations.push_back(active);
    }
    return trace;
}

inline bool percolates(const Eigen::MatrixXi& adj, const std::vector<int>& leaders, int r) {
    return bootstrap_percolate(adj, leaders, r).all_active();
}

// Direct decision by definition: every nonempty subset S of non-leader nodes
// must contain a node with at least r neighbors outside S.  Exponential in
// the follower count, hence the size guard.
inline bool is_strongly_r_robust_bruteforce(const Eigen::MatrixXi& adj,
                                            const std::vector<int>& leaders, int r) {
    detail::check_leader_set(adj, leaders);
    if (r < 1) throw std::invalid_argument("robustness level r must be >= 1");
    const int n = static_cast<int>(adj.rows());
    if (n > 24) throw std::length_error("is_strongly_r_robust_bruteforce: n must be <= 24");

    std::vector<char> is_leader(static_cast<size_t>(n), 0);
    for (int v : leaders) is_leader[static_cast<size_t>(v)] = 1;
    std::vector<int> followers;
    for (int v = 0; v < n; ++v)
        if (!is_leader[static_cast<size_t>(v)]) followers.push_back(v);

    const int f = static_cast<int>(followers.size());
    const std::vector<std::uint32_t> rows = detail::row_masks(adj);

    for (std::uint32_t mask = 1; mask < (1u << f); ++mask) {
        std::uint32_t subset_nodes = 0;
        for (int b = 0; b < f; ++b)
            if (mask & (1u << b)) subset_nodes |= (1u << followers[static_cast<size_t>(b)]);
        bool reachable = false;
        for (int b = 0; b < f && !reachable; ++b) {
            if (!(mask & (1u << b))) continue;
            const int node = followers[static_cast<size_t>(b)];
            const int outside = std::popcount(rows[static_cast<size_t>(node)] & ~subset_nodes);
            if (outside >= r) reachable = true;
        }
        if (!reachable) return false;
    }
    return true;
}

// Largest r >= 1 at which the leader set still activates every node; 0 when
// even r = 1 fails.
inline int max_strong_robustness(const Eigen::MatrixXi& adj, const std::vector<int>& leaders) {
    detail::check_leader_set(adj, leaders);
    const int n = static_cast<int>(adj.rows());
    int best = 0;
    for (int r = 1; r <= n; ++r) {
        if (percolates(adj, leaders, r))
            best = r;
        else
            break;  // activation sets shrink monotonically in r
    }
    return best;
}

// True iff every node outside the suspect set has at most F suspect
// neighbors.
inline bool is_f_local(const Eigen::MatrixXi& adj, const std::vector<int>& suspects, int F) {
    const int n = static_cast<int>(adj.rows());
    if (F < 0) throw std::invalid_argument("is_f_local: F must be >= 0");
    std::vector<char> suspect(static_cast<size_t>(n), 0);
    for (int v : suspects) {
        if (v < 0 || v >= n) throw std::invalid_argument("suspect index out of range");
        suspect[static_cast<size_t>(v)] = 1;
    }
    for (int i = 0; i < n; ++i) {
        if (suspect[static_cast<size_t>(i)]) continue;
        int count = 0;
        for (int j = 0; j < n; ++j)
            if (j != i && adj(i, j) != 0 && suspect[static_cast<size_t>(j)]) ++count;
        if (count > F) return false;
    }
    return true;
}

}  // namespace rswarm
