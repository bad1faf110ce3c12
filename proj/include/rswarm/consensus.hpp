#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <stdexcept>
#include <vector>

#include "rswarm/random.hpp"

namespace rswarm {

enum class AgentRole { normal_leader, normal_follower, malicious_leader, malicious_follower };

inline bool is_leader_role(AgentRole r) {
    return r == AgentRole::normal_leader || r == AgentRole::malicious_leader;
}
inline bool is_malicious_role(AgentRole r) {
    return r == AgentRole::malicious_leader || r == AgentRole::malicious_follower;
}

// Scalar consensus layer clocked every tau seconds on top of the physical
// simulation.  Values live in [0, 1].
struct ConsensusState {
    Eigen::VectorXd values;
    std::vector<AgentRole> roles;
    double leader_reference = 0.0;  // value held and propagated by normal leaders
    double tau = 0.5;
    int threat_bound = 0;  // F
};

// Malicious broadcast: a fresh uniform draw from [0, 1].
inline double malicious_value(Rng& rng) { return rng.uniform01(); }

namespace detail {

inline void check_consensus_args(const Eigen::VectorXd& values, const Eigen::MatrixXi& adj,
                                 const std::vector<AgentRole>& roles) {
    const int n = static_cast<int>(values.size());
    if (adj.rows() != n || adj.cols() != n || static_cast<int>(roles.size()) != n)
        throw std::invalid_argument("consensus update: inconsistent sizes");
}

}  // namespace detail

// Nominal synchronous round: normal leaders hold the reference, normal
// followers take the equal-weight average over their closed neighborhood,
// malicious agents redraw at random.  All reads use the previous round.
inline Eigen::VectorXd linear_update(const Eigen::VectorXd& values, const Eigen::MatrixXi& adj,
                                     const std::vector<AgentRole>& roles, double reference,
                                     Rng& rng) {
    detail::check_consensus_args(values, adj, roles);
    const int n = static_cast<int>(values.size());
    Eigen::VectorXd next(n);
    for (int i = 0; i < n; ++i) {
        if (is_malicious_role(roles[static_cast<size_t>(i)])) {
            next(i) = malicious_value(rng);
        } else if (is_leader_role(roles[static_cast<size_t>(i)])) {
            next(i) = reference;
        } else {
            double sum = values(i);
            int count = 1;
            for (int j = 0; j < n; ++j) {
                if (j != i && adj(i, j) != 0) {
                    sum += values(j);
                    ++count;
                }
            }
            next(i) = sum / count;
        }
    }
    return next;
}

// Filtered round: each normal follower removes up to F neighbor values
// strictly above its own (largest first) and up to F strictly below (smallest
// first), then averages what remains together with its own value.  Ties among
// equal extremes break on the lower agent index so rounds are deterministic.
inline Eigen::VectorXd wmsr_update(const Eigen::VectorXd& values, const Eigen::MatrixXi& adj,
                                   const std::vector<AgentRole>& roles, int threat_bound,
                                   double reference, Rng& rng) {
    detail::check_consensus_args(values, adj, roles);
    if (threat_bound < 0) throw std::invalid_argument("wmsr_update: F must be >= 0");
    const int n = static_cast<int>(values.size());
    Eigen::VectorXd next(n);
    std::vector<std::pair<double, int>> higher, lower;
    for (int i = 0; i < n; ++i) {
        if (is_malicious_role(roles[static_cast<size_t>(i)])) {
            next(i) = malicious_value(rng);
            continue;
        }
        if (is_leader_role(roles[static_cast<size_t>(i)])) {
            next(i) = reference;
            continue;
        }
        const double own = values(i);
        higher.clear();
        lower.clear();
        double kept_sum = own;
        int kept_count = 1;
        for (int j = 0; j < n; ++j) {
            if (j == i || adj(i, j) == 0) continue;
            if (values(j) > own)
                higher.emplace_back(values(j), j);
            else if (values(j) < own)
                lower.emplace_back(values(j), j);
            else {
                kept_sum += values(j);
                ++kept_count;
            }
        }
        std::sort(higher.begin(), higher.end(), [](const auto& a, const auto& b) {
            return a.first != b.first ? a.first > b.first : a.second < b.second;
        });
        std::sort(lower.begin(), lower.end(), [](const auto& a, const auto& b) {
            return a.first != b.first ? a.first < b.first : a.second < b.second;
        });
        const size_t drop_high = std::min<size_t>(threat_bound, higher.size());
        const size_t drop_low = std::min<size_t>(threat_bound, lower.size());
        for (size_t k = drop_high; k < higher.size(); ++k) {
            kept_sum += higher[k].first;
            ++kept_count;
        }
        for (size_t k = drop_low; k < lower.size(); ++k) {
            kept_sum += lower[k].first;
            ++kept_count;
        }
        next(i) = kept_sum / kept_count;
    }
    return next;
}

// Largest deviation of a normal follower from the reference.
inline double consensus_error(const Eigen::VectorXd& values, const std::vector<AgentRole>& roles,
                              double reference) {
    double err = 0.0;
    for (int i = 0; i < values.size(); ++i)
        if (roles[static_cast<size_t>(i)] == AgentRole::normal_follower)
            err = std::max(err, std::abs(values(i) - reference));
    return err;
}

}  // namespace rswarm
