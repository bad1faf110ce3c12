#pragma once

#include <Eigen/Dense>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rswarm {

// One affine inequality u_coeff . u >= rhs handed to the QP.
struct ConstraintRow {
    Eigen::RowVectorXd u_coeff;
    double rhs = 0.0;
    std::string label;
};

struct QpProblem {
    Eigen::VectorXd u_des;
    std::vector<ConstraintRow> rows;
};

enum class QpStatus { optimal, infeasible };

struct QpSolution {
    QpStatus status = QpStatus::optimal;
    Eigen::VectorXd u_star;
    std::vector<int> active_set;  // ascending row indices
    Eigen::VectorXd multipliers;  // one per row, zero for inactive rows
    double kkt_residual = 0.0;
    // For infeasible problems: nonnegative weights y (index, weight) with
    // sum_k y_k a_k = 0 and sum_k y_k b_k > 0.
    std::vector<std::pair<int, double>> infeasibility_certificate;
    int iterations = 0;
};

struct KktReport {
    double stationarity = 0.0;
    double primal_violation = 0.0;
    double dual_violation = 0.0;
    double complementarity = 0.0;
    double residual = 0.0;
    bool ok = false;
};

namespace detail {

// Row-normalized residuals: feasibility and complementarity terms are scaled
// by max(1, |a_k|) so tolerances mean the same thing across row magnitudes.
inline KktReport kkt_residuals(const QpProblem& problem, const Eigen::VectorXd& u,
                               const Eigen::VectorXd& multipliers) {
    const int rows = static_cast<int>(problem.rows.size());
    Eigen::VectorXd grad = u - problem.u_des;
    KktReport rep;
    for (int k = 0; k < rows; ++k) {
        const ConstraintRow& row = problem.rows[k];
        const double scale = std::max(1.0, row.u_coeff.norm());
        const double slack = (row.u_coeff.dot(u) - row.rhs) / scale;
        const double lambda = multipliers(k) * scale;
        rep.primal_violation = std::max(rep.primal_violation, -slack);
        rep.dual_violation = std::max(rep.dual_violation, -lambda);
        // scaled so a near-degenerate active set (large multipliers on a row
        // held to solver precision) is not penalized for the product blowup
        rep.complementarity =
            std::max(rep.complementarity, std::abs(lambda * slack) / (1.0 + std::abs(lambda)));
        grad -= multipliers(k) * row.u_coeff.transpose();
    }
    rep.stationarity = grad.size() > 0 ? grad.cwiseAbs().maxCoeff() : 0.0;
    rep.residual = std::max({rep.stationarity, rep.primal_violation, rep.dual_violation,
                             rep.complementarity});
    return rep;
}

}  // namespace detail

// Minimizes |u_des - u|^2 subject to the constraint rows via a dual
// active-set method specialized to the identity Hessian: start at the
// unconstrained optimum, repeatedly pull in the lowest-index violated row
// (dropping active rows whose multiplier would go negative), with the working
// set kept linearly independent through a QR factorization.  Deterministic:
// ties break on the lowest row index.  Either returns the unique optimum with
// a verified KKT certificate or reports infeasibility with a Farkas-style
// certificate.
inline QpSolution solve(const QpProblem& problem) {
    const int M = static_cast<int>(problem.u_des.size());
    const int rows = static_cast<int>(problem.rows.size());
    constexpr double feas_tol = 1e-10;
    constexpr double z_tol = 1e-10;
    constexpr double r_tol = 1e-12;

    QpSolution sol;
    sol.u_star = problem.u_des;
    sol.multipliers = Eigen::VectorXd::Zero(rows);

    // Normalized copies of the rows; degenerate all-zero rows are either
    // vacuous or immediately infeasible.
    Eigen::MatrixXd an(M, rows);
    Eigen::VectorXd bn(rows), norms(rows);
    for (int k = 0; k < rows; ++k) {
        if (!problem.rows[k].u_coeff.allFinite() || !std::isfinite(problem.rows[k].rhs))
            throw std::invalid_argument("qp row " + std::to_string(k) + " has non-finite data");
        if (problem.rows[k].u_coeff.size() != M)
            throw std::invalid_argument("qp row " + std::to_string(k) + " has wrong width");
        const double nrm = problem.rows[k].u_coeff.norm();
        norms(k) = nrm;
        if (nrm <= std::numeric_limits<double>::min()) {
            if (problem.rows[k].rhs > feas_tol) {
                sol.status = QpStatus::infeasible;
                sol.infeasibility_certificate = {{k, 1.0}};
                return sol;
            }
            an.col(k).setZero();
            bn(k) = -1.0;  // never violated
        } else {
            an.col(k) = problem.rows[k].u_coeff.transpose() / nrm;
            bn(k) = problem.rows[k].rhs / nrm;
        }
    }

    Eigen::VectorXd x = problem.u_des;
    std::vector<int> W;
    std::vector<double> lam;
    const int max_iters = 200 + 50 * rows;

    auto in_working_set = [&](int k) {
        return std::find(W.begin(), W.end(), k) != W.end();
    };

    while (true) {
        // lowest-index violated row
        int p = -1;
        for (int k = 0; k < rows; ++k) {
            if (norms(k) <= std::numeric_limits<double>::min() || in_working_set(k)) continue;
            if (an.col(k).dot(x) - bn(k) < -feas_tol) {
                p = k;
                break;
            }
        }
        if (p < 0) break;  // primal feasible, hence optimal

        double lam_p = 0.0;
        while (true) {
            if (++sol.iterations > max_iters)
                throw std::runtime_error("qp solve: active-set iteration limit exceeded");

            const int q = static_cast<int>(W.size());
            Eigen::VectorXd z = an.col(p);
            Eigen::VectorXd r;
            Eigen::MatrixXd N;
            if (q > 0) {
                N.resize(M, q);
                for (int idx = 0; idx < q; ++idx) N.col(idx) = an.col(W[static_cast<size_t>(idx)]);
                Eigen::HouseholderQR<Eigen::MatrixXd> qr(N);
                const Eigen::MatrixXd Q1 = qr.householderQ() * Eigen::MatrixXd::Identity(M, q);
                const Eigen::MatrixXd R1 =
                    qr.matrixQR().topRows(q).template triangularView<Eigen::Upper>();
                const Eigen::VectorXd qtn = Q1.transpose() * an.col(p);
                r = R1.template triangularView<Eigen::Upper>().solve(qtn);
                z -= Q1 * qtn;
            }
            if (z.norm() <= z_tol) z.setZero();
            const double z_sq = z.squaredNorm();

            double t1 = std::numeric_limits<double>::infinity();
            int drop_idx = -1;
            for (int idx = 0; idx < q; ++idx) {
                if (r(idx) > r_tol) {
                    const double cand = lam[static_cast<size_t>(idx)] / r(idx);
                    if (cand < t1) {
                        t1 = cand;
                        drop_idx = idx;
                    }
                }
            }

            const double s_p = an.col(p).dot(x) - bn(p);
            const double t2 = z_sq > 0.0 ? -s_p / z_sq : std::numeric_limits<double>::infinity();

            if (!std::isfinite(t1) && !std::isfinite(t2)) {
                // a_p is a nonpositive combination of active rows: no u can
                // satisfy them all together.
                sol.status = QpStatus::infeasible;
                sol.infeasibility_certificate.clear();
                sol.infeasibility_certificate.emplace_back(p, 1.0 / norms(p));
                for (int idx = 0; idx < q; ++idx) {
                    const double y = -r(idx);
                    if (y > 0.0)
                        sol.infeasibility_certificate.emplace_back(
                            W[static_cast<size_t>(idx)], y / norms(W[static_cast<size_t>(idx)]));
                }
                sol.u_star = x;
                return sol;
            }

            const double t = std::min(t1, t2);
            for (int idx = 0; idx < q; ++idx) lam[static_cast<size_t>(idx)] -= t * r(idx);
            lam_p += t;
            if (z_sq > 0.0) x += t * z;

            if (t2 <= t1) {
                W.push_back(p);
                lam.push_back(lam_p);
                break;
            }
            W.erase(W.begin() + drop_idx);
            lam.erase(lam.begin() + drop_idx);
        }
    }

    // Polish: recompute multipliers and the iterate from the final working
    // set in one clean solve, then keep whichever satisfies KKT better.
    Eigen::VectorXd mult = Eigen::VectorXd::Zero(rows);
    for (size_t idx = 0; idx < W.size(); ++idx)
        mult(W[idx]) = lam[idx] / norms(W[idx]);
    KktReport raw_rep = detail::kkt_residuals(problem, x, mult);

    if (!W.empty()) {
        const int q = static_cast<int>(W.size());
        Eigen::MatrixXd N(M, q);
        Eigen::VectorXd bw(q);
        for (int idx = 0; idx < q; ++idx) {
            N.col(idx) = an.col(W[static_cast<size_t>(idx)]);
            bw(idx) = bn(W[static_cast<size_t>(idx)]);
        }
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(N);
        const Eigen::MatrixXd R1 = qr.matrixQR().topRows(q).template triangularView<Eigen::Upper>();
        const Eigen::VectorXd rhs = bw - N.transpose() * problem.u_des;
        const Eigen::VectorXd w =
            R1.transpose().template triangularView<Eigen::Lower>().solve(rhs);
        const Eigen::VectorXd lam_polish = R1.template triangularView<Eigen::Upper>().solve(w);
        bool lam_ok = true;
        for (int idx = 0; idx < q; ++idx)
            if (lam_polish(idx) < -1e-9) lam_ok = false;
        if (lam_ok) {
            const Eigen::VectorXd x_polish = problem.u_des + N * lam_polish;
            Eigen::VectorXd mult_polish = Eigen::VectorXd::Zero(rows);
            for (int idx = 0; idx < q; ++idx)
                mult_polish(W[static_cast<size_t>(idx)]) =
                    std::max(0.0, lam_polish(idx)) / norms(W[static_cast<size_t>(idx)]);
            const KktReport polish_rep =
                detail::kkt_residuals(problem, x_polish, mult_polish);
            if (polish_rep.residual <= raw_rep.residual) {
                x = x_polish;
                mult = mult_polish;
                raw_rep = polish_rep;
            }
        }
    }

    sol.status = QpStatus::optimal;
    sol.u_star = x;
    sol.multipliers = mult;
    sol.active_set = W;
    std::sort(sol.active_set.begin(), sol.active_set.end());
    sol.kkt_residual = raw_rep.residual;
    return sol;
}

// Independent check of the KKT conditions for a claimed optimal solution.
inline KktReport verify_kkt(const QpProblem& problem, const QpSolution& solution,
                            double tol_residual = 1e-8, double tol_primal = 1e-9) {
    if (solution.status != QpStatus::optimal)
        throw std::invalid_argument("verify_kkt: solution must have optimal status");
    KktReport rep = detail::kkt_residuals(problem, solution.u_star, solution.multipliers);
    rep.ok = rep.residual <= tol_residual && rep.primal_violation <= tol_primal;
    return rep;
}

}  // namespace rswarm
