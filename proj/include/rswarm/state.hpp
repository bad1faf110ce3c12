#pragma once

#include <Eigen/Dense>
#include <vector>

namespace rswarm {

struct AgentState {
    Eigen::VectorXd position;
    Eigen::VectorXd velocity;
};

// Stacked physical state of the swarm.  Leaders are agents 0..leader_count-1
// by convention; followers come after.
struct SwarmState {
    double time = 0.0;
    std::vector<AgentState> agents;
    int leader_count = 0;
    double comm_range = 0.0;

    int size() const { return static_cast<int>(agents.size()); }
    int follower_count() const { return size() - leader_count; }
    int dimension() const { return agents.empty() ? 0 : static_cast<int>(agents[0].position.size()); }

    Eigen::MatrixXd positions() const {
        Eigen::MatrixXd p(size(), dimension());
        for (int i = 0; i < size(); ++i) p.row(i) = agents[i].position.transpose();
        return p;
    }

    Eigen::VectorXd stacked_positions() const {
        const int m = dimension();
        Eigen::VectorXd p(size() * m);
        for (int i = 0; i < size(); ++i) p.segment(i * m, m) = agents[i].position;
        return p;
    }

    Eigen::VectorXd stacked_velocities() const {
        const int m = dimension();
        Eigen::VectorXd v(size() * m);
        for (int i = 0; i < size(); ++i) v.segment(i * m, m) = agents[i].velocity;
        return v;
    }

    void set_stacked_positions(const Eigen::VectorXd& p) {
        const int m = dimension();
        for (int i = 0; i < size(); ++i) agents[i].position = p.segment(i * m, m);
    }
};

}  // namespace rswarm
