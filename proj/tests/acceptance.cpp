// Acceptance suite: each criterion prints one pass/fail line; the process
// exits nonzero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "rswarm/rswarm.hpp"

using namespace rswarm;

namespace {

const std::string kScenarioDir = std::string(RSWARM_SOURCE_DIR) + "/scenarios";

int failures = 0;

void report(int criterion, bool ok, const std::string& detail) {
    std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", criterion, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

double seconds_since(const std::chrono::steady_clock::time_point& start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// ---------------------------------------------------------------- 1
void criterion_1_oracle_equivalence() {
    const auto start = std::chrono::steady_clock::now();
    long checked = 0;

    // Exhaustive: all graphs on 2..5 nodes, all nonempty proper leader sets,
    // all thresholds 1..n.
    for (int n = 2; n <= 5; ++n) {
        const int pairs = n * (n - 1) / 2;
        for (std::uint32_t mask = 0; mask < (1u << pairs); ++mask) {
            Eigen::MatrixXi adj = Eigen::MatrixXi::Zero(n, n);
            int bit = 0;
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j, ++bit)
                    if (mask & (1u << bit)) {
                        adj(i, j) = 1;
                        adj(j, i) = 1;
                    }
            for (int lmask = 1; lmask < (1 << n) - 1; ++lmask) {
                std::vector<int> leaders;
                for (int v = 0; v < n; ++v)
                    if (lmask & (1 << v)) leaders.push_back(v);
                for (int r = 1; r <= n; ++r) {
                    ++checked;
                    if (percolates(adj, leaders, r) !=
                        is_strongly_r_robust_bruteforce(adj, leaders, r)) {
                        report(1, false,
                               "deciders disagree on an exhaustive case (n=" + std::to_string(n) +
                                   ")");
                        return;
                    }
                }
            }
        }
    }

    // Sampled: 500 random graphs with n in 6..8, edge probability 0.3.
    Rng rng(1001);
    for (int trial = 0; trial < 500; ++trial) {
        const int n = rng.uniform_int(6, 8);
        const Eigen::MatrixXi adj = oracles::random_er_graph(n, 0.3, rng);
        const int l = rng.uniform_int(1, n - 1);
        std::vector<int> leaders;
        for (int lmask_count = 0; lmask_count < l; ++lmask_count) leaders.push_back(lmask_count);
        for (int r = 1; r <= n; ++r) {
            ++checked;
            if (percolates(adj, leaders, r) != is_strongly_r_robust_bruteforce(adj, leaders, r)) {
                report(1, false, "deciders disagree on a sampled graph");
                return;
            }
        }
    }

    const double elapsed = seconds_since(start);
    report(1, elapsed < 60.0,
           "activation and subset robustness deciders agree on " + std::to_string(checked) +
               " cases (exhaustive n<=5, 500 sampled n in 6..8) in " + std::to_string(elapsed) +
               " s");
}

// ---------------------------------------------------------------- 2
void criterion_2_strict_underapproximation() {
    Rng rng(1002);
    for (int k = 0; k < 10000; ++k) {
        const double y = rng.uniform(-10.0, 10.0);
        const double s = rng.uniform(1e-12, 20.0);
        const double q = rng.uniform(1e-12, 1.0 - 1e-12);
        if (!(sigmoid(y, s, q) < heaviside(y))) {
            report(2, false, "smooth step not strictly below the hard step at y=" +
                                 std::to_string(y));
            return;
        }
    }
    report(2, true, "smooth step strictly below the hard step on 10000 samples");
}

// ---------------------------------------------------------------- 3
void criterion_3_margin_implication() {
    Rng rng(1003);
    int positives = 0;
    const int samples = 1200;
    for (int trial = 0; trial < samples; ++trial) {
        const int n = rng.uniform_int(4, 10);
        const int l = rng.uniform_int(2, n - 1);
        SmoothParams p;
        p.r = rng.uniform_int(1, std::max(1, l - 1));
        p.delta = rng.uniform_int(1, std::min(4, n - l));
        const double spread = rng.uniform(0.4, 3.5);
        const SwarmState st = oracles::random_cluster_state(rng, n, l, spread, 3.0, false);
        const Eigen::VectorXd margin = robustness_margin(st, p);
        if (margin.minCoeff() < 0.0) continue;
        ++positives;
        std::vector<int> leaders;
        for (int v = 0; v < l; ++v) leaders.push_back(v);
        const Eigen::MatrixXi adj = hard_adjacency(st.positions(), st.comm_range);
        if (!is_strongly_r_robust_bruteforce(adj, leaders, p.r)) {
            report(3, false, "counterexample: nonnegative margin but oracle says not robust");
            return;
        }
    }
    report(3, positives > 100,
           "nonnegative margin implied oracle robustness on all " + std::to_string(positives) +
               " positive cases out of " + std::to_string(samples));
}

// ---------------------------------------------------------------- 4
void criterion_4_derivatives() {
    Rng rng(1004);

    double worst_jac = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = rng.uniform_int(4, 7);
        const int l = rng.uniform_int(2, 3);
        SmoothParams p;
        p.r = rng.uniform_int(1, std::max(1, l - 1));
        p.delta = rng.uniform_int(1, std::min(3, n - l));
        SwarmState st = oracles::random_cluster_state(rng, n, l, 2.0, 3.0, false);
        const Eigen::MatrixXd jac = robustness_margin_grad(st, p);
        auto margin_of = [&](const Eigen::VectorXd& x) {
            SwarmState s2 = st;
            s2.set_stacked_positions(x);
            return robustness_margin(s2, p);
        };
        worst_jac = std::max(
            worst_jac,
            oracles::rel_err(jac, oracles::fd_jacobian(margin_of, st.stacked_positions(), 1e-5)));
    }
    if (worst_jac >= 1e-5) {
        report(4, false, "margin jacobian error " + std::to_string(worst_jac) + " >= 1e-5");
        return;
    }

    double worst_hvp = 0.0;
    for (int trial = 0; trial < 60; ++trial) {
        const int n = rng.uniform_int(4, 6);
        const int l = 2;
        SmoothParams p;
        p.r = 1;
        p.delta = rng.uniform_int(1, std::min(3, n - l));
        SwarmState st = oracles::random_cluster_state(rng, n, l, 1.8, 3.0, true);
        const Eigen::VectorXd v = st.stacked_velocities();
        const Eigen::MatrixXd hvp = hessian_vector_product(st, p, v);
        const double eps = 1e-5;
        SwarmState sp = st, sm = st;
        sp.set_stacked_positions(st.stacked_positions() + eps * v);
        sm.set_stacked_positions(st.stacked_positions() - eps * v);
        const Eigen::MatrixXd fd =
            (robustness_margin_grad(sp, p) - robustness_margin_grad(sm, p)) / (2.0 * eps);
        worst_hvp = std::max(worst_hvp, oracles::rel_err(hvp, fd));
    }
    if (worst_hvp >= 1e-4) {
        report(4, false, "curvature-direction error " + std::to_string(worst_hvp) + " >= 1e-4");
        return;
    }

    double worst_grad = 0.0;
    for (int trial = 0; trial < 40; ++trial) {
        const int n = rng.uniform_int(4, 6);
        const int l = 2;
        SmoothParams p;
        p.r = 1;
        p.delta = rng.uniform_int(1, 2);
        const HocbfGains gains{};
        SwarmState st = oracles::random_cluster_state(rng, n, l, 1.8, 3.0, true);
        const Eigen::VectorXd w = Eigen::VectorXd::Constant(n - l, 2.0);
        const Eigen::RowVectorXd grad = composed_cbf_position_gradient(st, p, gains, w);
        auto phi_of = [&](const Eigen::VectorXd& x) {
            SwarmState s2 = st;
            s2.set_stacked_positions(x);
            return composed_cbf(hocbf_chain(s2, p, gains), w).value;
        };
        worst_grad = std::max(
            worst_grad, oracles::rel_err(Eigen::MatrixXd(grad),
                                         Eigen::MatrixXd(oracles::fd_gradient(
                                             phi_of, st.stacked_positions(), 1e-5))));
    }
    if (worst_grad >= 1e-5) {
        report(4, false, "composed gradient error " + std::to_string(worst_grad) + " >= 1e-5");
        return;
    }

    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "max rel. errors: jacobian %.2e (<1e-5), curvature %.2e (<1e-4), "
                  "composed gradient %.2e (<1e-5)",
                  worst_jac, worst_hvp, worst_grad);
    report(4, true, buf);
}

// ---------------------------------------------------------------- 5..7 shared helpers

struct RunOutcome {
    ScenarioConfig cfg;
    Trace trace;
    InvariantReport report;
};

std::optional<RunOutcome> run_shipped(int criterion, const std::string& file) {
    RunOutcome out;
    try {
        out.cfg = parse_scenario(kScenarioDir + "/" + file);
        out.trace = run_scenario(out.cfg);
        out.report = check_invariants(out.trace, out.cfg);
    } catch (const std::exception& e) {
        report(criterion, false, file + " failed to run: " + e.what());
        return std::nullopt;
    }
    return out;
}

void criterion_5_forward_invariance(const std::optional<RunOutcome>& spread) {
    if (!spread) return;
    const ScenarioConfig& cfg = spread->cfg;
    if (cfg.smooth.r != 5 || cfg.leader_count() != 6 || cfg.follower_count() != 8 ||
        cfg.dt != 0.01 || cfg.duration != 20.0) {
        report(5, false, "spread_out scenario does not match the required parameters");
        return;
    }

    double min_margin = std::numeric_limits<double>::infinity();
    for (const TraceStep& step : spread->trace.steps)
        min_margin = std::min(min_margin, step.margin.minCoeff());

    // oracle confirmation every 0.1 s (stride 10 at dt = 0.01)
    bool oracle_ok = true;
    const std::vector<int> leaders = cfg.leader_indices();
    for (size_t k = 0; k < spread->trace.steps.size(); k += 10) {
        const Eigen::MatrixXi adj =
            hard_adjacency(spread->trace.steps[k].positions, cfg.comm_range);
        if (!percolates(adj, leaders, 5)) {
            oracle_ok = false;
            break;
        }
    }

    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "spread-out 20 s run: min margin %.4f (>= 0), strong 5-robustness at every "
                  "0.1 s checkpoint: %s",
                  min_margin, oracle_ok ? "yes" : "NO");
    report(5, min_margin >= 0.0 && oracle_ok, buf);
}

void criterion_6_resilient_consensus(const std::optional<RunOutcome>& spread) {
    if (!spread) return;
    const double wmsr_error = spread->report.final_consensus_error;

    ScenarioConfig linear_cfg;
    double linear_error = 0.0;
    try {
        linear_cfg = parse_scenario(kScenarioDir + "/spread_out_linear.json");
        const Trace linear_trace = run_scenario(linear_cfg);
        linear_error = consensus_error(linear_trace.steps.back().consensus, linear_cfg.roles(),
                                       linear_cfg.leader_reference);
    } catch (const std::exception& e) {
        report(6, false, std::string("linear variant failed to run: ") + e.what());
        return;
    }

    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "filtered error %.2e (< 1e-3) vs unfiltered error %.3f (> 0.05) under the "
                  "same 2-local attack",
                  wmsr_error, linear_error);
    report(6, wmsr_error < 1e-3 && spread->cfg.threat_bound == 2 && linear_error > 0.05, buf);
}

void criterion_7_corridor(const std::optional<RunOutcome>& corridor) {
    if (!corridor) return;
    const InvariantReport& rep = corridor->report;
    const bool arrival = corridor->trace.goal_arrival_time.has_value();

    char buf[240];
    std::snprintf(
        buf, sizeof(buf),
        "corridor run: robustness %s, min pair distance %.4f (>= %.2f), min obstacle clearance "
        "%.4f, consensus error %.2e (< 1e-3), arrival %s",
        rep.robustness_ok ? "held" : "LOST", rep.min_pair_distance, corridor->cfg.min_distance,
        rep.min_obstacle_clearance, rep.final_consensus_error,
        arrival ? (std::to_string(*corridor->trace.goal_arrival_time) + " s").c_str() : "never");
    report(7,
           rep.robustness_ok && rep.collision_ok && rep.consensus_ok && rep.margin_ok && arrival,
           buf);
}

// ---------------------------------------------------------------- 8
void criterion_8_qp_exactness() {
    const auto start = std::chrono::steady_clock::now();
    Rng rng(1008);
    int optimal = 0, infeasible = 0;
    double worst_kkt = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        QpProblem problem;
        const int M = rng.uniform_int(1, 8);
        const int rows = rng.uniform_int(0, 12);
        problem.u_des.resize(M);
        for (int i = 0; i < M; ++i) problem.u_des(i) = rng.uniform(-2.0, 2.0);
        for (int r = 0; r < rows; ++r) {
            ConstraintRow row;
            row.u_coeff.resize(M);
            for (int i = 0; i < M; ++i) row.u_coeff(i) = rng.uniform(-1.0, 1.0);
            row.rhs = rng.uniform(-1.5, 1.5);
            problem.rows.push_back(std::move(row));
        }

        const QpSolution sol = solve(problem);
        const oracles::EnumerationResult ref = oracles::enumerate_qp(problem);
        if (ref.feasible != (sol.status == QpStatus::optimal)) {
            report(8, false, "status disagrees with the enumeration oracle");
            return;
        }
        if (!ref.feasible) {
            ++infeasible;
            continue;
        }
        ++optimal;
        if ((sol.u_star - ref.u).cwiseAbs().maxCoeff() > 1e-6) {
            report(8, false, "solution differs from the enumeration oracle by more than 1e-6");
            return;
        }
        const KktReport kkt = verify_kkt(problem, sol);
        worst_kkt = std::max(worst_kkt, kkt.residual);
        if (!kkt.ok) {
            report(8, false, "kkt verification failed with residual " +
                                 std::to_string(kkt.residual));
            return;
        }
    }
    const double elapsed = seconds_since(start);
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "1000 random instances match the enumeration oracle (%d optimal / %d "
                  "infeasible), worst kkt residual %.2e, %.1f s",
                  optimal, infeasible, worst_kkt, elapsed);
    report(8, elapsed < 30.0, buf);
}

// ---------------------------------------------------------------- 9
void criterion_9_determinism() {
    try {
        const ScenarioConfig cfg = parse_scenario(kScenarioDir + "/spread_out.json");
        ScenarioConfig quick = cfg;
        quick.duration = 2.0;  // two fresh runs of the same shipped config

        const std::string dir =
            (std::filesystem::temp_directory_path() / "rswarm_acceptance").string();
        std::filesystem::create_directories(dir);
        const std::string path_a = dir + "/run_a.csv";
        const std::string path_b = dir + "/run_b.csv";
        emit_trace(run_scenario(quick), path_a, TraceFormat::csv);
        emit_trace(run_scenario(quick), path_b, TraceFormat::csv);

        std::ifstream a(path_a, std::ios::binary), b(path_b, std::ios::binary);
        std::stringstream sa, sb;
        sa << a.rdbuf();
        sb << b.rdbuf();
        const bool identical = sa.str() == sb.str() && !sa.str().empty();
        std::filesystem::remove(path_a);
        std::filesystem::remove(path_b);
        report(9, identical, "two runs with the same seed emit byte-identical trace files");
    } catch (const std::exception& e) {
        report(9, false, std::string("determinism run failed: ") + e.what());
    }
}

}  // namespace

int main() {
    criterion_1_oracle_equivalence();
    criterion_2_strict_underapproximation();
    criterion_3_margin_implication();
    criterion_4_derivatives();

    const std::optional<RunOutcome> spread = run_shipped(5, "spread_out.json");
    criterion_5_forward_invariance(spread);
    criterion_6_resilient_consensus(spread);
    const std::optional<RunOutcome> corridor = run_shipped(7, "corridor.json");
    criterion_7_corridor(corridor);

    criterion_8_qp_exactness();
    criterion_9_determinism();

    if (failures == 0)
        std::printf("all acceptance criteria passed\n");
    else
        std::printf("%d acceptance criteria FAILED\n", failures);
    return failures == 0 ? 0 : 1;
}
