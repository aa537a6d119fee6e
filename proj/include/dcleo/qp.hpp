#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <string>

namespace dcleo {

/// minimize 1/2 x^T q x + c^T x + constant
/// subject to a_ineq x <= b_ineq, lb <= x <= ub  (infinite bounds allowed)
struct QpProblem {
    Eigen::MatrixXd q;
    Eigen::VectorXd c;
    double constant = 0.0;
    Eigen::MatrixXd a_ineq;
    Eigen::VectorXd b_ineq;
    Eigen::VectorXd lb;
    Eigen::VectorXd ub;

    Eigen::Index num_vars() const { return c.size(); }
    Eigen::Index num_ineq() const { return b_ineq.size(); }
    double objective(const Eigen::VectorXd& x) const;
    /// Throws std::invalid_argument on inconsistent sizes, asymmetric or
    /// indefinite q, or lb > ub.
    void validate() const;
};

enum class QpStatus { optimal, infeasible, max_iter, unbounded };

std::string to_string(QpStatus status);

/// Scaled first-order optimality residuals of a returned point.
struct KktResiduals {
    double stationarity = 0.0;
    double primal = 0.0;
    double dual = 0.0;
    double complementarity = 0.0;

    double max() const;
};

struct QpResult {
    Eigen::VectorXd x;
    double objective = 0.0;
    QpStatus status = QpStatus::max_iter;
    int iterations = 0;
    KktResiduals kkt;
};

struct QpOptions {
    double tol = 1e-8;
    int max_iter = 0;  // 0 selects 10 * (n + m)
};

/// Primal active-set method for convex QPs, with a phase-one LP for the
/// starting point. Fixed variables (lb == ub) are eliminated up front.
/// Deterministic: identical inputs give bitwise-identical results. An
/// `optimal` return has kkt.max() <= tol; a failed certificate throws
/// SolverError.
QpResult solve(const QpProblem& problem, const QpOptions& options = {});

/// Plain-text dump of a problem for debugging.
void write_qp(std::ostream& out, const QpProblem& problem);

}  // namespace dcleo
