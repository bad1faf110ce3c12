#include <catch2/catch.hpp>

#include "oracles.hpp"
#include "rswarm/safety.hpp"

using namespace rswarm;

namespace {

SwarmState two_agents(const Eigen::Vector2d& p0, const Eigen::Vector2d& p1,
                      const Eigen::Vector2d& v0 = Eigen::Vector2d::Zero(),
                      const Eigen::Vector2d& v1 = Eigen::Vector2d::Zero()) {
    SwarmState st;
    st.leader_count = 1;
    st.comm_range = 3.0;
    st.agents = {{p0, v0}, {p1, v1}};
    return st;
}

}  // namespace

TEST_CASE("pair constraints") {
    const HocbfGains gains{1.0, 1.0};
    const double delta_d = 0.3;

    SECTION("stationary agents at twice the margin satisfy the row at rest") {
        const SwarmState st = two_agents({0, 0}, {2 * delta_d, 0});
        const std::vector<ConstraintRow> rows = agent_pair_constraints(st, delta_d, gains);
        REQUIRE(rows.size() == 1);
        const double b = 4 * delta_d * delta_d - delta_d * delta_d;
        REQUIRE(rows[0].rhs == Approx(-gains.eta2 * gains.eta1 * b));
        REQUIRE(rows[0].u_coeff.dot(Eigen::VectorXd::Zero(4)) >= rows[0].rhs);
    }

    SECTION("exactly at the margin with zero velocity gives a zero boundary row") {
        const SwarmState st = two_agents({0, 0}, {delta_d, 0});
        const std::vector<ConstraintRow> rows = agent_pair_constraints(st, delta_d, gains);
        REQUIRE(rows[0].rhs == Approx(0.0).margin(1e-15));
    }

    SECTION("u coefficient equals the velocity gradient of psi1") {
        Rng rng(3);
        for (int trial = 0; trial < 20; ++trial) {
            Eigen::Vector2d p0(rng.uniform(-1, 1), rng.uniform(-1, 1));
            Eigen::Vector2d p1(rng.uniform(-1, 1), rng.uniform(-1, 1));
            Eigen::Vector2d v0(rng.uniform(-1, 1), rng.uniform(-1, 1));
            Eigen::Vector2d v1(rng.uniform(-1, 1), rng.uniform(-1, 1));
            SwarmState st = two_agents(p0, p1, v0, v1);
            const std::vector<BarrierChain> chains = agent_pair_chains(st, delta_d, gains);

            // psi1 as a function of stacked velocities
            auto psi1_of = [&](const Eigen::VectorXd& vstack) {
                SwarmState s2 = st;
                s2.agents[0].velocity = vstack.segment(0, 2);
                s2.agents[1].velocity = vstack.segment(2, 2);
                return agent_pair_chains(s2, delta_d, gains)[0].psi1;
            };
            Eigen::VectorXd vstack(4);
            vstack << v0, v1;
            const Eigen::RowVectorXd fd = oracles::fd_gradient(psi1_of, vstack);
            REQUIRE(oracles::rel_err(Eigen::MatrixXd(chains[0].u_coeff), Eigen::MatrixXd(fd)) <
                    1e-7);
        }
    }

    SECTION("one row per unordered pair") {
        SwarmState st;
        st.leader_count = 2;
        st.comm_range = 3.0;
        Rng rng(9);
        for (int i = 0; i < 5; ++i) {
            Eigen::VectorXd p(2), v(2);
            p << rng.uniform(-1, 1), rng.uniform(-1, 1);
            v.setZero();
            st.agents.push_back({p, v});
        }
        REQUIRE(agent_pair_constraints(st, delta_d, gains).size() == 10);
    }
}

TEST_CASE("obstacle constraints") {
    const HocbfGains gains{1.0, 1.0};

    SECTION("no obstacles gives no rows") {
        const SwarmState st = two_agents({0, 0}, {1, 0});
        REQUIRE(obstacle_constraints(st, {}, gains).empty());
    }

    SECTION("a distant obstacle row is inactive at the desired input") {
        SwarmState st = two_agents({0, 0}, {1, 0});
        Obstacle obs;
        obs.position = Eigen::Vector2d(50.0, 0.0);
        obs.clearance = 0.5;
        const std::vector<ConstraintRow> rows = obstacle_constraints(st, {obs}, gains);
        REQUIRE(rows.size() == 2);
        Eigen::VectorXd u_des(4);
        u_des << 1.0, 0.2, -0.4, 0.1;
        for (const ConstraintRow& row : rows) REQUIRE(row.u_coeff.dot(u_des) > row.rhs);
    }

    SECTION("u coefficient matches the velocity gradient of psi1") {
        Rng rng(13);
        Obstacle obs;
        obs.position = Eigen::Vector2d(0.5, 0.4);
        obs.clearance = 0.4;
        for (int trial = 0; trial < 10; ++trial) {
            SwarmState st = two_agents({rng.uniform(-1, 1), rng.uniform(-1, 1)},
                                       {rng.uniform(-1, 1), rng.uniform(-1, 1)},
                                       {rng.uniform(-1, 1), rng.uniform(-1, 1)},
                                       {rng.uniform(-1, 1), rng.uniform(-1, 1)});
            const std::vector<BarrierChain> chains = obstacle_chains(st, {obs}, gains);
            auto psi1_of = [&](const Eigen::VectorXd& vstack) {
                SwarmState s2 = st;
                s2.agents[0].velocity = vstack.segment(0, 2);
                s2.agents[1].velocity = vstack.segment(2, 2);
                return obstacle_chains(s2, {obs}, gains)[0].psi1;
            };
            Eigen::VectorXd vstack(4);
            vstack << st.agents[0].velocity, st.agents[1].velocity;
            const Eigen::RowVectorXd fd = oracles::fd_gradient(psi1_of, vstack);
            REQUIRE(oracles::rel_err(Eigen::MatrixXd(chains[0].u_coeff), Eigen::MatrixXd(fd)) <
                    1e-7);
        }
    }
}

TEST_CASE("composed robustness row") {
    SECTION("coefficients pass through unchanged") {
        ComposedCbf composed;
        composed.value = 0.42;
        composed.drift = -0.1;
        composed.u_coeff = Eigen::RowVector3d(0.5, -0.25, 1.5);
        composed.weights = Eigen::VectorXd::Ones(1);
        const ConstraintRow row = robustness_constraint(composed, 2.0);
        REQUIRE(row.u_coeff == composed.u_coeff);
        REQUIRE(row.rhs == Approx(-composed.drift - 2.0 * composed.value));
        REQUIRE(row.label == "robustness");
    }

    SECTION("at the boundary the offset vanishes") {
        ComposedCbf composed;
        composed.value = 0.0;
        composed.drift = 0.7;
        composed.u_coeff = Eigen::RowVector2d(1.0, 0.0);
        composed.weights = Eigen::VectorXd::Ones(1);
        const ConstraintRow row = robustness_constraint(composed, 1.0);
        REQUIRE(row.rhs == Approx(-composed.drift));
    }

    SECTION("deep inside the safe set the row tolerates the desired input") {
        // compact cluster: every margin large, so the row must hold at any
        // moderate desired acceleration
        Rng rng(31);
        SwarmState st;
        st.leader_count = 2;
        st.comm_range = 3.0;
        for (int i = 0; i < 5; ++i) {
            Eigen::VectorXd p(2), v(2);
            p << 0.4 * i, 0.3 * (i % 2);
            v.setZero();
            st.agents.push_back({p, v});
        }
        SmoothParams params;
        params.r = 1;
        params.delta = 2;
        const HocbfChain chain = hocbf_chain(st, params, HocbfGains{});
        REQUIRE(chain.psi1.minCoeff() > 0.5);
        const ComposedCbf composed =
            composed_cbf(chain, Eigen::VectorXd::Constant(3, 10.0));
        REQUIRE(composed.value > 0.9);
        const ConstraintRow row = robustness_constraint(composed, 1.0);
        for (int trial = 0; trial < 50; ++trial) {
            Eigen::VectorXd u_des(10);
            for (int i = 0; i < 10; ++i) u_des(i) = rng.uniform(-1.0, 1.0);
            REQUIRE(row.u_coeff.dot(u_des) >= row.rhs);
        }
    }
}

TEST_CASE("rows are affine in the input") {
    Rng rng(21);
    const HocbfGains gains{0.8, 1.3};
    SwarmState st;
    st.leader_count = 1;
    st.comm_range = 3.0;
    for (int i = 0; i < 4; ++i) {
        Eigen::VectorXd p(2), v(2);
        p << rng.uniform(-1, 1), rng.uniform(-1, 1);
        v << rng.uniform(-1, 1), rng.uniform(-1, 1);
        st.agents.push_back({p, v});
    }
    for (const BarrierChain& chain : agent_pair_chains(st, 0.2, gains)) {
        // psi2(u) = psi1dot_drift + u_coeff u + eta2 psi1 must differ between
        // two inputs by exactly u_coeff (u - u')
        Eigen::VectorXd u1(8), u2(8);
        for (int i = 0; i < 8; ++i) {
            u1(i) = rng.uniform(-2, 2);
            u2(i) = rng.uniform(-2, 2);
        }
        const double psi2_u1 = chain.psi1dot_drift + chain.u_coeff.dot(u1) + gains.eta2 * chain.psi1;
        const double psi2_u2 = chain.psi1dot_drift + chain.u_coeff.dot(u2) + gains.eta2 * chain.psi1;
        REQUIRE(psi2_u1 - psi2_u2 == Approx(chain.u_coeff.dot(u1 - u2)).margin(1e-12));
    }
}
