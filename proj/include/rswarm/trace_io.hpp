#pragma once

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rswarm/sim.hpp"

namespace rswarm {

enum class TraceFormat { csv, jsonl };

inline TraceFormat trace_format_from_string(const std::string& s) {
    if (s == "csv") return TraceFormat::csv;
    if (s == "jsonl") return TraceFormat::jsonl;
    throw std::invalid_argument("trace format must be 'csv' or 'jsonl'");
}

namespace detail {

// Shortest-exact decimal: 17 significant digits round-trip any double.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string axis_name(int b, int m) {
    static const char* named[] = {"x", "y", "z"};
    if (m <= 3) return named[b];
    return "a" + std::to_string(b);
}

inline std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

inline double parse_double(const std::string& s, const std::string& what) {
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) throw std::runtime_error("trace parse: bad number in " + what);
    return v;
}

}  // namespace detail

inline void emit_trace_csv(const Trace& trace, std::ostream& out) {
    int n = 0, m = 0, f = 0;
    if (!trace.steps.empty()) {
        n = static_cast<int>(trace.steps.front().positions.rows());
        m = static_cast<int>(trace.steps.front().positions.cols());
        f = static_cast<int>(trace.steps.front().margin.size());
    }
    out << "t";
    for (int i = 0; i < n; ++i) {
        for (int b = 0; b < m; ++b) out << ",p" << i << "_" << detail::axis_name(b, m);
        for (int b = 0; b < m; ++b) out << ",v" << i << "_" << detail::axis_name(b, m);
        for (int b = 0; b < m; ++b) out << ",u" << i << "_" << detail::axis_name(b, m);
    }
    for (int c = 0; c < f; ++c) out << ",h" << c;
    out << ",phi";
    for (int i = 0; i < n; ++i) out << ",y" << i;
    out << ",qp_active\n";

    for (const TraceStep& step : trace.steps) {
        out << detail::format_double(step.t);
        for (int i = 0; i < n; ++i) {
            for (int b = 0; b < m; ++b) out << "," << detail::format_double(step.positions(i, b));
            for (int b = 0; b < m; ++b) out << "," << detail::format_double(step.velocities(i, b));
            for (int b = 0; b < m; ++b) out << "," << detail::format_double(step.controls(i, b));
        }
        for (int c = 0; c < f; ++c) out << "," << detail::format_double(step.margin(c));
        out << "," << detail::format_double(step.phi);
        for (int i = 0; i < n; ++i) out << "," << detail::format_double(step.consensus(i));
        out << ",";
        for (size_t k = 0; k < step.active_rows.size(); ++k) {
            if (k > 0) out << "|";
            out << step.active_rows[k];
        }
        out << "\n";
    }
}

inline Trace parse_trace_csv(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("trace parse: missing header");
    const std::vector<std::string> cols = detail::split(header, ',');
    int n = 0, m = 0, f = 0;
    for (const std::string& c : cols) {
        if (c.rfind("p0_", 0) == 0) ++m;
        if (c.rfind('p', 0) == 0 && c.find('_') != std::string::npos) {
            const int idx = std::atoi(c.substr(1, c.find('_') - 1).c_str());
            n = std::max(n, idx + 1);
        }
        if (c.size() >= 2 && c[0] == 'h' && std::isdigit(static_cast<unsigned char>(c[1])))
            f = std::max(f, std::atoi(c.substr(1).c_str()) + 1);
    }

    Trace trace;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> cells = detail::split(line, ',');
        const size_t expected = 1 + static_cast<size_t>(n) * 3 * m + f + 1 + n + 1;
        if (cells.size() != expected)
            throw std::runtime_error("trace parse: row has wrong number of columns");
        TraceStep step;
        size_t at = 0;
        step.t = detail::parse_double(cells[at++], "t");
        step.positions.resize(n, m);
        step.velocities.resize(n, m);
        step.controls.resize(n, m);
        for (int i = 0; i < n; ++i) {
            for (int b = 0; b < m; ++b) step.positions(i, b) = detail::parse_double(cells[at++], "p");
            for (int b = 0; b < m; ++b) step.velocities(i, b) = detail::parse_double(cells[at++], "v");
            for (int b = 0; b < m; ++b) step.controls(i, b) = detail::parse_double(cells[at++], "u");
        }
        step.margin.resize(f);
        for (int c = 0; c < f; ++c) step.margin(c) = detail::parse_double(cells[at++], "h");
        step.phi = detail::parse_double(cells[at++], "phi");
        step.consensus.resize(n);
        for (int i = 0; i < n; ++i) step.consensus(i) = detail::parse_double(cells[at++], "y");
        if (!cells[at].empty())
            step.active_rows = detail::split(cells[at], '|');
        trace.steps.push_back(std::move(step));
    }
    return trace;
}

inline nlohmann::json trace_step_to_json(const TraceStep& step) {
    nlohmann::json rec;
    rec["t"] = step.t;
    const int n = static_cast<int>(step.positions.rows());
    const int m = static_cast<int>(step.positions.cols());
    auto matrix_to_json = [&](const Eigen::MatrixXd& M) {
        nlohmann::json rows = nlohmann::json::array();
        for (int i = 0; i < n; ++i) {
            nlohmann::json row = nlohmann::json::array();
            for (int b = 0; b < m; ++b) row.push_back(M(i, b));
            rows.push_back(std::move(row));
        }
        return rows;
    };
    rec["p"] = matrix_to_json(step.positions);
    rec["v"] = matrix_to_json(step.velocities);
    rec["u"] = matrix_to_json(step.controls);
    rec["h"] = nlohmann::json::array();
    for (int c = 0; c < step.margin.size(); ++c) rec["h"].push_back(step.margin(c));
    rec["phi"] = step.phi;
    rec["y"] = nlohmann::json::array();
    for (int i = 0; i < step.consensus.size(); ++i) rec["y"].push_back(step.consensus(i));
    rec["active"] = step.active_rows;
    return rec;
}

inline void emit_trace_jsonl(const Trace& trace, std::ostream& out) {
    for (const TraceStep& step : trace.steps) out << trace_step_to_json(step).dump() << "\n";
}

inline Trace parse_trace_jsonl(std::istream& in) {
    Trace trace;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const nlohmann::json rec = nlohmann::json::parse(line);
        TraceStep step;
        step.t = rec.at("t").get<double>();
        const auto& p = rec.at("p");
        const int n = static_cast<int>(p.size());
        const int m = n > 0 ? static_cast<int>(p[0].size()) : 0;
        auto read_matrix = [&](const nlohmann::json& rows) {
            Eigen::MatrixXd M(n, m);
            for (int i = 0; i < n; ++i)
                for (int b = 0; b < m; ++b) M(i, b) = rows[i][b].get<double>();
            return M;
        };
        step.positions = read_matrix(p);
        step.velocities = read_matrix(rec.at("v"));
        step.controls = read_matrix(rec.at("u"));
        const auto& h = rec.at("h");
        step.margin.resize(static_cast<int>(h.size()));
        for (size_t c = 0; c < h.size(); ++c) step.margin(static_cast<int>(c)) = h[c].get<double>();
        step.phi = rec.at("phi").get<double>();
        const auto& y = rec.at("y");
        step.consensus.resize(static_cast<int>(y.size()));
        for (size_t i = 0; i < y.size(); ++i)
            step.consensus(static_cast<int>(i)) = y[i].get<double>();
        step.active_rows = rec.at("active").get<std::vector<std::string>>();
        trace.steps.push_back(std::move(step));
    }
    return trace;
}

inline void emit_trace(const Trace& trace, const std::string& path, TraceFormat format) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open trace file for writing: " + path);
    if (format == TraceFormat::csv)
        emit_trace_csv(trace, out);
    else
        emit_trace_jsonl(trace, out);
    if (!out) throw std::runtime_error("failed writing trace file: " + path);
}

inline Trace parse_trace(const std::string& path, TraceFormat format) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open trace file: " + path);
    return format == TraceFormat::csv ? parse_trace_csv(in) : parse_trace_jsonl(in);
}

inline nlohmann::json summary_to_json(const RunSummary& s) {
    nlohmann::json j;
    j["scenario"] = s.scenario;
    j["min_margin"] = s.min_margin;
    j["maintained_level"] = s.maintained_level;
    j["final_consensus_error"] = s.final_consensus_error;
    if (s.goal_arrival_time)
        j["goal_arrival_time"] = *s.goal_arrival_time;
    else
        j["goal_arrival_time"] = nullptr;
    j["max_active_rows"] = s.max_active_rows;
    j["max_kkt_residual"] = s.max_kkt_residual;
    j["robustness_ok"] = s.robustness_ok;
    j["margin_ok"] = s.margin_ok;
    j["collision_ok"] = s.collision_ok;
    j["consensus_ok"] = s.consensus_ok;
    j["qp_ok"] = s.qp_ok;
    j["passed"] = s.passed();
    return j;
}

inline void write_summary(const RunSummary& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open summary file for writing: " + path);
    out << summary_to_json(s).dump(2) << "\n";
}

}  // namespace rswarm
