// Command-line front end: run scenarios, verify the library against its
// oracles, sweep parameters, and replay invariant checks on recorded traces.
//
// Exit codes: 0 pass, 1 invariant failure, 2 solver failure, 3 config error.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "rswarm/rswarm.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitInvariant = 1;
constexpr int kExitSolver = 2;
constexpr int kExitConfig = 3;

struct RunOptions {
    std::vector<std::string> scenarios;
    std::string out_dir = ".";
    std::string format = "csv";
    std::optional<std::uint64_t> seed;
    std::optional<double> dt;
    std::optional<std::string> compose_mode;
    int jobs = 1;
    int check_every = 0;
};

std::mutex print_mutex;

void print_line(const std::string& line) {
    std::lock_guard<std::mutex> lock(print_mutex);
    std::printf("%s\n", line.c_str());
}

void apply_overrides(rswarm::ScenarioConfig& cfg, const RunOptions& opt) {
    if (opt.seed) cfg.seed = *opt.seed;
    if (opt.dt) cfg.dt = *opt.dt;
    if (opt.check_every > 0) cfg.check_every = opt.check_every;
    if (opt.compose_mode) {
        if (*opt.compose_mode == "rows")
            cfg.compose_mode = rswarm::ComposeMode::rows;
        else if (*opt.compose_mode == "exponential")
            cfg.compose_mode = rswarm::ComposeMode::exponential;
        else
            throw rswarm::ConfigError("--compose-mode must be 'rows' or 'exponential'");
    }
    cfg.validate();
}

std::string summary_line(const rswarm::RunSummary& s) {
    std::string arrival = s.goal_arrival_time
                              ? std::to_string(*s.goal_arrival_time) + " s"
                              : std::string("n/a");
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "%s %s | min margin %.6g | maintained level %d | consensus err %.3g | "
                  "arrival %s | qp rows<=%d kkt %.2g",
                  s.passed() ? "[pass]" : "[FAIL]", s.scenario.c_str(), s.min_margin,
                  s.maintained_level, s.final_consensus_error, arrival.c_str(),
                  s.max_active_rows, s.max_kkt_residual);
    return buf;
}

int run_one_scenario(const std::string& path, const RunOptions& opt) {
    rswarm::ScenarioConfig cfg;
    try {
        cfg = rswarm::parse_scenario(path);
        apply_overrides(cfg, opt);
    } catch (const rswarm::ConfigError& e) {
        print_line(std::string("[config error] ") + path + ": " + e.what());
        return kExitConfig;
    }

    rswarm::Trace trace;
    try {
        trace = rswarm::run_scenario(cfg);
    } catch (const rswarm::SolverError& e) {
        print_line(std::string("[solver error] ") + cfg.name + ": " + e.what());
        return kExitSolver;
    } catch (const std::exception& e) {
        print_line(std::string("[solver error] ") + cfg.name + ": " + e.what());
        return kExitSolver;
    }

    const rswarm::TraceFormat format = rswarm::trace_format_from_string(opt.format);
    const std::string ext = opt.format == "csv" ? ".csv" : ".jsonl";
    std::filesystem::create_directories(opt.out_dir);
    const std::string trace_path = opt.out_dir + "/" + cfg.name + ext;
    const std::string summary_path = opt.out_dir + "/" + cfg.name + ".summary.json";

    const rswarm::InvariantReport report = rswarm::check_invariants(trace, cfg);
    const rswarm::RunSummary summary = rswarm::summarize(trace, cfg, report);
    rswarm::emit_trace(trace, trace_path, format);
    rswarm::write_summary(summary, summary_path);

    print_line(summary_line(summary));
    for (const rswarm::InvariantViolation& v : report.violations)
        print_line("  violation at t=" + std::to_string(v.t) + ": " + v.what);
    return summary.passed() ? kExitPass : kExitInvariant;
}

int run_many(const std::vector<std::string>& paths, const RunOptions& opt,
             int (*fn)(const std::string&, const RunOptions&)) {
    std::atomic<size_t> next{0};
    std::atomic<int> worst{kExitPass};
    const int jobs = std::max(1, std::min<int>(opt.jobs, static_cast<int>(paths.size())));
    auto worker = [&] {
        while (true) {
            const size_t idx = next.fetch_add(1);
            if (idx >= paths.size()) return;
            const int code = fn(paths[idx], opt);
            int cur = worst.load();
            while (code > cur && !worst.compare_exchange_weak(cur, code)) {
            }
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < jobs; ++i) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    return worst.load();
}

// ----------------------------------------------------------------------
// verify: self-contained oracle and property suites
// ----------------------------------------------------------------------

Eigen::MatrixXi random_er_graph(int n, double p, rswarm::Rng& rng) {
    Eigen::MatrixXi adj = Eigen::MatrixXi::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (rng.uniform01() < p) {
                adj(i, j) = 1;
                adj(j, i) = 1;
            }
    return adj;
}

bool verify_lemma_equivalence(int samples) {
    using namespace rswarm;
    // Exhaustive over all graphs on up to 4 nodes, all proper leader sets,
    // all thresholds.
    for (int n = 2; n <= 4; ++n) {
        const int pairs = n * (n - 1) / 2;
        for (int edges = 0; edges < (1 << pairs); ++edges) {
            Eigen::MatrixXi adj = Eigen::MatrixXi::Zero(n, n);
            int bit = 0;
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j, ++bit)
                    if (edges & (1 << bit)) {
                        adj(i, j) = 1;
                        adj(j, i) = 1;
                    }
            for (int lmask = 1; lmask < (1 << n) - 1; ++lmask) {
                std::vector<int> leaders;
                for (int v = 0; v < n; ++v)
                    if (lmask & (1 << v)) leaders.push_back(v);
                for (int r = 1; r <= n; ++r)
                    if (percolates(adj, leaders, r) !=
                        is_strongly_r_robust_bruteforce(adj, leaders, r))
                        return false;
            }
        }
    }
    Rng rng(2024);
    for (int k = 0; k < samples; ++k) {
        const int n = rng.uniform_int(6, 8);
        const Eigen::MatrixXi adj = random_er_graph(n, 0.3, rng);
        const int l = rng.uniform_int(1, n - 1);
        std::vector<int> leaders(static_cast<size_t>(l));
        for (int i = 0; i < l; ++i) leaders[static_cast<size_t>(i)] = i;
        const int r = rng.uniform_int(1, n);
        if (percolates(adj, leaders, r) != is_strongly_r_robust_bruteforce(adj, leaders, r))
            return false;
    }
    return true;
}

bool verify_smooth_step_strict(int samples) {
    rswarm::Rng rng(7);
    for (int k = 0; k < samples; ++k) {
        const double y = rng.uniform(-10.0, 10.0);
        const double s = rng.uniform(1e-6, 20.0);
        const double q = rng.uniform(1e-6, 1.0 - 1e-6);
        if (!(rswarm::sigmoid(y, s, q) < rswarm::heaviside(y))) return false;
    }
    return true;
}

rswarm::SwarmState random_cluster_state(rswarm::Rng& rng, int n, int l, double spread,
                                        double comm_range, bool with_velocity) {
    rswarm::SwarmState st;
    st.leader_count = l;
    st.comm_range = comm_range;
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd p(2), v(2);
        p << rng.uniform(-spread, spread), rng.uniform(-spread, spread);
        if (with_velocity)
            v << rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0);
        else
            v.setZero();
        st.agents.push_back({p, v});
    }
    return st;
}

bool verify_margin_implication(int samples) {
    using namespace rswarm;
    Rng rng(11);
    int positives = 0;
    for (int k = 0; k < samples; ++k) {
        const int n = rng.uniform_int(4, 10);
        const int l = rng.uniform_int(2, n - 1);
        SmoothParams params;
        params.r = rng.uniform_int(1, l - 1 > 0 ? l - 1 : 1);
        if (params.r > l - 1) params.r = l - 1;
        params.delta = std::min(3, n - l);
        const double spread = rng.uniform(0.5, 4.0);
        const SwarmState st = random_cluster_state(rng, n, l, spread, 3.0, false);
        const Eigen::VectorXd margin = robustness_margin(st, params);
        if (margin.minCoeff() >= 0.0) {
            ++positives;
            std::vector<int> leaders(static_cast<size_t>(l));
            for (int i = 0; i < l; ++i) leaders[static_cast<size_t>(i)] = i;
            const Eigen::MatrixXi adj = hard_adjacency(st.positions(), st.comm_range);
            if (!is_strongly_r_robust_bruteforce(adj, leaders, params.r)) return false;
        }
    }
    return positives > 0;
}

bool verify_derivatives(int samples) {
    using namespace rswarm;
    Rng rng(13);
    for (int k = 0; k < samples; ++k) {
        const int n = rng.uniform_int(4, 7);
        const int l = 2;
        SmoothParams params;
        params.r = 1;
        params.delta = std::min(2, n - l);
        SwarmState st = random_cluster_state(rng, n, l, 2.0, 3.0, true);

        const Eigen::MatrixXd jac = robustness_margin_grad(st, params);
        const double h = 1e-5;
        Eigen::MatrixXd fd(jac.rows(), jac.cols());
        const Eigen::VectorXd p0 = st.stacked_positions();
        for (int c = 0; c < jac.cols(); ++c) {
            Eigen::VectorXd pp = p0, pm = p0;
            pp(c) += h;
            pm(c) -= h;
            SwarmState sp = st, sm = st;
            sp.set_stacked_positions(pp);
            sm.set_stacked_positions(pm);
            fd.col(c) =
                (robustness_margin(sp, params) - robustness_margin(sm, params)) / (2.0 * h);
        }
        const double scale = std::max({1.0, jac.cwiseAbs().maxCoeff(), fd.cwiseAbs().maxCoeff()});
        if ((jac - fd).cwiseAbs().maxCoeff() / scale > 1e-5) return false;
    }
    return true;
}

bool verify_qp(int samples) {
    using namespace rswarm;
    Rng rng(17);
    for (int k = 0; k < samples; ++k) {
        const int M = rng.uniform_int(2, 6);
        const int rows = rng.uniform_int(0, 8);
        QpProblem problem;
        problem.u_des.resize(M);
        for (int i = 0; i < M; ++i) problem.u_des(i) = rng.uniform(-2.0, 2.0);
        for (int r = 0; r < rows; ++r) {
            ConstraintRow row;
            row.u_coeff.resize(M);
            for (int i = 0; i < M; ++i) row.u_coeff(i) = rng.uniform(-1.0, 1.0);
            row.rhs = rng.uniform(-1.0, 1.0);
            problem.rows.push_back(row);
        }
        const QpSolution sol = solve(problem);
        if (sol.status != QpStatus::optimal) continue;
        if (!verify_kkt(problem, sol).ok) return false;
        // projection property against random feasible points
        for (int t = 0; t < 20; ++t) {
            Eigen::VectorXd u(M);
            for (int i = 0; i < M; ++i) u(i) = rng.uniform(-4.0, 4.0);
            bool feasible = true;
            for (const ConstraintRow& row : problem.rows)
                if (row.u_coeff.dot(u) < row.rhs) feasible = false;
            if (feasible &&
                (u - problem.u_des).norm() < (sol.u_star - problem.u_des).norm() - 1e-9)
                return false;
        }
    }
    return true;
}

int cmd_verify(int samples) {
    struct Check {
        const char* name;
        bool ok;
    };
    std::vector<Check> checks;
    checks.push_back({"activation/subset robustness deciders agree",
                      verify_lemma_equivalence(samples)});
    checks.push_back({"smooth step strictly below hard step", verify_smooth_step_strict(samples * 10)});
    checks.push_back({"nonnegative margin implies oracle robustness",
                      verify_margin_implication(samples)});
    checks.push_back({"margin jacobian matches finite differences", verify_derivatives(20)});
    checks.push_back({"qp satisfies kkt and projection property", verify_qp(200)});

    bool all_ok = true;
    for (const Check& c : checks) {
        print_line(std::string(c.ok ? "[pass] " : "[FAIL] ") + c.name);
        all_ok = all_ok && c.ok;
    }
    return all_ok ? kExitPass : kExitInvariant;
}

// ----------------------------------------------------------------------
// sweep
// ----------------------------------------------------------------------

struct SweepAxis {
    std::string key;
    std::vector<double> values;
};

SweepAxis parse_axis(const std::string& text) {
    const size_t eq = text.find('=');
    if (eq == std::string::npos)
        throw rswarm::ConfigError("--param expects key=v1,v2,... got: " + text);
    SweepAxis axis;
    axis.key = text.substr(0, eq);
    for (const std::string& tok : [&] {
             std::vector<std::string> out;
             std::string cur;
             for (char c : text.substr(eq + 1)) {
                 if (c == ',') {
                     out.push_back(cur);
                     cur.clear();
                 } else
                     cur += c;
             }
             out.push_back(cur);
             return out;
         }()) {
        try {
            axis.values.push_back(std::stod(tok));
        } catch (...) {
            throw rswarm::ConfigError("--param " + axis.key + ": bad value '" + tok + "'");
        }
    }
    if (axis.values.empty()) throw rswarm::ConfigError("--param " + axis.key + ": no values");
    return axis;
}

void apply_axis(rswarm::ScenarioConfig& cfg, const std::string& key, double value) {
    if (key == "s")
        cfg.smooth.s = value;
    else if (key == "s_adj")
        cfg.smooth.s_adj = value;
    else if (key == "q")
        cfg.smooth.q = value;
    else if (key == "q_adj")
        cfg.smooth.q_adj = value;
    else if (key == "delta")
        cfg.smooth.delta = static_cast<int>(value);
    else if (key == "weight")
        cfg.robustness_weight = value;
    else
        throw rswarm::ConfigError("--param: unknown key '" + key +
                                  "' (expected s, s_adj, q, q_adj, delta, weight)");
}

int cmd_sweep(const std::string& scenario_path, const std::vector<std::string>& axis_args,
              const RunOptions& opt) {
    rswarm::ScenarioConfig base;
    std::vector<SweepAxis> axes;
    try {
        base = rswarm::parse_scenario(scenario_path);
        apply_overrides(base, opt);
        for (const std::string& arg : axis_args) axes.push_back(parse_axis(arg));
        if (axes.empty()) throw rswarm::ConfigError("sweep: at least one --param required");
    } catch (const rswarm::ConfigError& e) {
        print_line(std::string("[config error] ") + e.what());
        return kExitConfig;
    }

    // Cartesian product of axis values.
    std::vector<std::vector<double>> combos{{}};
    for (const SweepAxis& axis : axes) {
        std::vector<std::vector<double>> next;
        for (const auto& combo : combos)
            for (double v : axis.values) {
                auto extended = combo;
                extended.push_back(v);
                next.push_back(std::move(extended));
            }
        combos = std::move(next);
    }

    struct ComboResult {
        int code = kExitPass;
        std::string table_row;  // empty when the combo failed to run
    };
    std::vector<ComboResult> results(combos.size());

    auto run_combo = [&](size_t idx) {
        const auto& combo = combos[idx];
        rswarm::ScenarioConfig cfg = base;
        std::string tag;
        for (size_t a = 0; a < axes.size(); ++a) {
            apply_axis(cfg, axes[a].key, combo[a]);
            tag += " " + axes[a].key + "=" + std::to_string(combo[a]);
        }
        ComboResult& out = results[idx];
        try {
            cfg.validate();
            const rswarm::Trace trace = rswarm::run_scenario(cfg);
            const rswarm::InvariantReport rep = rswarm::check_invariants(trace, cfg);
            const rswarm::RunSummary summary = rswarm::summarize(trace, cfg, rep);
            std::ostringstream row;
            for (double v : combo) row << rswarm::detail::format_double(v) << ",";
            row << summary.min_margin << "," << summary.maintained_level << ","
                << summary.final_consensus_error << "," << (summary.passed() ? 1 : 0) << "\n";
            out.table_row = row.str();
            print_line((summary.passed() ? "[pass]" : "[FAIL]") + tag);
            out.code = summary.passed() ? kExitPass : kExitInvariant;
        } catch (const rswarm::ConfigError& e) {
            print_line("[config error]" + tag + ": " + e.what());
            out.code = kExitConfig;
        } catch (const std::exception& e) {
            print_line("[solver error]" + tag + ": " + e.what());
            out.code = kExitSolver;
        }
    };

    const int jobs = std::max(1, std::min<int>(opt.jobs, static_cast<int>(combos.size())));
    if (jobs == 1) {
        for (size_t idx = 0; idx < combos.size(); ++idx) run_combo(idx);
    } else {
        std::atomic<size_t> next{0};
        auto worker = [&] {
            while (true) {
                const size_t idx = next.fetch_add(1);
                if (idx >= combos.size()) return;
                run_combo(idx);
            }
        };
        std::vector<std::thread> pool;
        for (int i = 0; i < jobs; ++i) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }

    std::filesystem::create_directories(opt.out_dir);
    std::ofstream table(opt.out_dir + "/sweep.csv");
    for (const SweepAxis& axis : axes) table << axis.key << ",";
    table << "min_margin,maintained_level,final_consensus_error,passed\n";
    int worst = kExitPass;
    for (const ComboResult& r : results) {
        table << r.table_row;
        worst = std::max(worst, r.code);
    }
    return worst;
}

int cmd_replay(const std::string& scenario_path, const std::string& trace_path,
               const std::string& format, int check_every) {
    rswarm::ScenarioConfig cfg;
    try {
        cfg = rswarm::parse_scenario(scenario_path);
    } catch (const rswarm::ConfigError& e) {
        print_line(std::string("[config error] ") + e.what());
        return kExitConfig;
    }
    rswarm::Trace trace;
    try {
        trace = rswarm::parse_trace(trace_path, rswarm::trace_format_from_string(format));
    } catch (const std::exception& e) {
        print_line(std::string("[config error] ") + e.what());
        return kExitConfig;
    }
    const rswarm::InvariantReport rep =
        rswarm::check_invariants(trace, cfg, check_every > 0 ? check_every : 0);
    print_line(std::string(rep.ok() ? "[pass] " : "[FAIL] ") + cfg.name + " replay: " +
               std::to_string(rep.violations.size()) + " violation(s), min margin " +
               std::to_string(rep.min_margin) + ", maintained level " +
               std::to_string(rep.maintained_level));
    for (const rswarm::InvariantViolation& v : rep.violations)
        print_line("  violation at t=" + std::to_string(v.t) + ": " + v.what);
    return rep.ok() ? kExitPass : kExitInvariant;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"resilient swarm simulator"};
    app.require_subcommand(1);

    RunOptions opt;
    CLI::App* run = app.add_subcommand("run", "run one or more scenarios");
    run->add_option("--scenario", opt.scenarios, "scenario file(s)")->required();
    run->add_option("--out", opt.out_dir, "output directory");
    run->add_option("--format", opt.format, "trace format: csv|jsonl")
        ->check(CLI::IsMember({"csv", "jsonl"}));
    std::uint64_t seed_value = 0;
    CLI::Option* seed_opt = run->add_option("--seed", seed_value, "override scenario seed");
    double dt_value = 0.0;
    CLI::Option* dt_opt = run->add_option("--dt", dt_value, "override integration step");
    run->add_option("--jobs", opt.jobs, "parallel scenario jobs");
    run->add_option("--check-every", opt.check_every, "oracle recheck stride (steps)");
    std::string compose_value;
    CLI::Option* compose_opt =
        run->add_option("--compose-mode", compose_value, "rows|exponential")
            ->check(CLI::IsMember({"rows", "exponential"}));

    int verify_samples = 500;
    CLI::App* verify = app.add_subcommand("verify", "run oracle and property suites");
    verify->add_option("--samples", verify_samples, "sample count for randomized checks");

    std::string sweep_scenario;
    std::vector<std::string> sweep_params;
    CLI::App* sweep = app.add_subcommand("sweep", "grid-sweep smooth parameters");
    sweep->add_option("--scenario", sweep_scenario, "base scenario file")->required();
    sweep->add_option("--param", sweep_params, "axis key=v1,v2,... "
                                               "(s, s_adj, q, q_adj, delta, weight)");
    sweep->add_option("--out", opt.out_dir, "output directory");
    sweep->add_option("--jobs", opt.jobs, "parallel sweep jobs");

    std::string replay_scenario, replay_trace, replay_format = "csv";
    int replay_check_every = 0;
    CLI::App* replay = app.add_subcommand("replay", "re-check invariants on a recorded trace");
    replay->add_option("--scenario", replay_scenario, "scenario file")->required();
    replay->add_option("--trace", replay_trace, "trace file")->required();
    replay->add_option("--format", replay_format, "trace format: csv|jsonl")
        ->check(CLI::IsMember({"csv", "jsonl"}));
    replay->add_option("--check-every", replay_check_every, "oracle recheck stride (steps)");

    CLI11_PARSE(app, argc, argv);

    if (seed_opt->count() > 0) opt.seed = seed_value;
    if (dt_opt->count() > 0) opt.dt = dt_value;
    if (compose_opt->count() > 0) opt.compose_mode = compose_value;

    if (run->parsed()) return run_many(opt.scenarios, opt, run_one_scenario);
    if (verify->parsed()) return cmd_verify(verify_samples);
    if (sweep->parsed()) return cmd_sweep(sweep_scenario, sweep_params, opt);
    if (replay->parsed())
        return cmd_replay(replay_scenario, replay_trace, replay_format, replay_check_every);
    return kExitConfig;
}
