#include "dcleo/qp.hpp"

#include "dcleo/error.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace dcleo {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double inf_norm(const VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

/// Inequalities G x <= h over the free variables; the first `general`
/// rows come from a_ineq, the rest are finite box bounds.
struct RowSet {
    MatrixXd g;
    VectorXd h;
    Index general = 0;
};

struct CoreResult {
    VectorXd x;
    VectorXd lambda;  // one per row of G, zero off the working set
    QpStatus status = QpStatus::max_iter;
    int iterations = 0;
};

// Primal active-set iteration from a feasible x. Each pass minimizes over
// the face defined by the working set in the null-space basis Z. When the
// reduced Hessian is singular and the reduced gradient has a component in
// its kernel, the method follows that zero-curvature descent direction to
// the first blocking constraint instead of taking a Newton step.
CoreResult active_set(const MatrixXd& q, const VectorXd& c, const MatrixXd& g, const VectorXd& h, VectorXd x,
                      int max_iter) {
    const Index n = x.size();
    const Index m = g.rows();
    std::vector<Index> working;
    std::vector<char> in_working(static_cast<std::size_t>(m), 0);
    bool face_minimized = false;

    CoreResult out;
    out.lambda = VectorXd::Zero(m);

    for (int it = 0; it < max_iter; ++it) {
        out.iterations = it + 1;
        const VectorXd grad = q * x + c;
        const double gscale = std::max({1.0, inf_norm(c), inf_norm(q * x)});
        const Index w = static_cast<Index>(working.size());

        MatrixXd gw(w, n);
        for (Index k = 0; k < w; ++k) gw.row(k) = g.row(working[static_cast<std::size_t>(k)]);
        Eigen::HouseholderQR<MatrixXd> qr;
        MatrixXd z;
        if (w > 0) {
            qr.compute(gw.transpose());
            const MatrixXd basis = qr.householderQ();
            z = basis.rightCols(n - w);
        } else {
            z = MatrixXd::Identity(n, n);
        }

        VectorXd step = VectorXd::Zero(n);
        bool zero_curvature = false;
        bool stationary = face_minimized || n == w;
        if (!stationary) {
            const VectorXd reduced_grad = z.transpose() * grad;
            if (inf_norm(reduced_grad) <= 1e-13 * gscale) {
                stationary = true;
            } else {
                const MatrixXd hess = z.transpose() * q * z;
                Eigen::SelfAdjointEigenSolver<MatrixXd> eig(hess);
                const VectorXd& mu = eig.eigenvalues();
                const MatrixXd& v = eig.eigenvectors();
                const double mu_max = mu.cwiseAbs().maxCoeff();
                const double cutoff = 1e-11 * mu_max;
                const VectorXd coords = v.transpose() * reduced_grad;
                VectorXd flat = VectorXd::Zero(coords.size());
                VectorXd newton = VectorXd::Zero(coords.size());
                for (Index k = 0; k < coords.size(); ++k) {
                    if (mu(k) <= cutoff) {
                        flat(k) = coords(k);
                    } else {
                        newton(k) = coords(k) / mu(k);
                    }
                }
                if (inf_norm(flat) > 1e-13 * gscale) {
                    zero_curvature = true;
                    step = -(z * (v * flat));
                } else {
                    step = -(z * (v * newton));
                }
            }
        }

        if (stationary) {
            if (w == 0) {
                out.status = QpStatus::optimal;
                break;
            }
            const VectorXd lam = qr.solve(-grad);
            Index worst = 0;
            const double min_lam = lam.minCoeff(&worst);
            if (min_lam >= -1e-10 * gscale) {
                for (Index k = 0; k < w; ++k) out.lambda(working[static_cast<std::size_t>(k)]) = lam(k);
                out.status = QpStatus::optimal;
                break;
            }
            in_working[static_cast<std::size_t>(working[static_cast<std::size_t>(worst)])] = 0;
            working.erase(working.begin() + worst);
            face_minimized = false;
            continue;
        }

        double alpha = zero_curvature ? kInf : 1.0;
        Index blocking = -1;
        const double step_norm = inf_norm(step);
        for (Index i = 0; i < m; ++i) {
            if (in_working[static_cast<std::size_t>(i)]) continue;
            const double gp = g.row(i).dot(step);
            if (gp <= 1e-13 * inf_norm(g.row(i).transpose()) * step_norm) continue;
            const double room = std::max(0.0, h(i) - g.row(i).dot(x));
            const double a = room / gp;
            if (a < alpha) {
                alpha = a;
                blocking = i;
            }
        }
        if (!std::isfinite(alpha)) {
            out.status = QpStatus::unbounded;
            break;
        }
        x += alpha * step;
        if (blocking >= 0) {
            working.push_back(blocking);
            in_working[static_cast<std::size_t>(blocking)] = 1;
            face_minimized = false;
        } else {
            face_minimized = true;
        }
    }
    out.x = std::move(x);
    return out;
}

KktResiduals kkt_residuals(const MatrixXd& q, const VectorXd& c, const RowSet& rows, const VectorXd& x,
                           const VectorXd& lambda) {
    const VectorXd qx = q * x;
    const double gscale = std::max({1.0, inf_norm(c), inf_norm(qx)});
    const double hscale = std::max(1.0, inf_norm(rows.h));
    KktResiduals r;
    const VectorXd slack = rows.h - rows.g * x;  // >= 0 when feasible
    r.stationarity = inf_norm(qx + c + rows.g.transpose() * lambda) / gscale;
    if (slack.size() > 0) {
        r.primal = std::max(0.0, -slack.minCoeff()) / hscale;
        r.dual = std::max(0.0, -lambda.minCoeff()) / gscale;
        r.complementarity = inf_norm(lambda.cwiseProduct(slack)) / (gscale * hscale);
    }
    return r;
}

}  // namespace

double KktResiduals::max() const { return std::max({stationarity, primal, dual, complementarity}); }

std::string to_string(QpStatus status) {
    switch (status) {
        case QpStatus::optimal:
            return "optimal";
        case QpStatus::infeasible:
            return "infeasible";
        case QpStatus::max_iter:
            return "max_iter";
        case QpStatus::unbounded:
            return "unbounded";
    }
    return "unknown";
}

double QpProblem::objective(const VectorXd& x) const { return 0.5 * x.dot(q * x) + c.dot(x) + constant; }

void QpProblem::validate() const {
    const Index n = c.size();
    if (q.rows() != n || q.cols() != n) throw std::invalid_argument("qp: q must be n x n");
    if (lb.size() != n || ub.size() != n) throw std::invalid_argument("qp: bound vectors must have length n");
    if (a_ineq.rows() != b_ineq.size() || (a_ineq.rows() > 0 && a_ineq.cols() != n)) {
        throw std::invalid_argument("qp: a_ineq must be m x n with b_ineq of length m");
    }
    const double scale = std::max(1.0, n > 0 ? q.cwiseAbs().maxCoeff() : 0.0);
    if (n > 0 && (q - q.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw std::invalid_argument("qp: q is not symmetric");
    }
    if (n > 0) {
        Eigen::SelfAdjointEigenSolver<MatrixXd> eig(q, Eigen::EigenvaluesOnly);
        if (eig.eigenvalues().minCoeff() < -1e-10 * scale) throw std::invalid_argument("qp: q is not PSD");
    }
    for (Index i = 0; i < n; ++i) {
        if (std::isnan(lb(i)) || std::isnan(ub(i)) || lb(i) > ub(i)) {
            throw std::invalid_argument("qp: lb > ub at variable " + std::to_string(i));
        }
    }
}

QpResult solve(const QpProblem& problem, const QpOptions& options) {
    problem.validate();
    const Index n = problem.num_vars();

    // eliminate fixed variables
    std::vector<Index> free_vars;
    VectorXd x_full = VectorXd::Zero(n);
    for (Index i = 0; i < n; ++i) {
        if (problem.lb(i) == problem.ub(i)) {
            x_full(i) = problem.lb(i);
        } else {
            free_vars.push_back(i);
        }
    }
    const Index nf = static_cast<Index>(free_vars.size());
    const MatrixXd q_sym = 0.5 * (problem.q + problem.q.transpose());
    MatrixXd q(nf, nf);
    VectorXd c(nf);
    MatrixXd a(problem.num_ineq(), nf);
    for (Index j = 0; j < nf; ++j) {
        const Index fj = free_vars[static_cast<std::size_t>(j)];
        for (Index k = 0; k < nf; ++k) q(j, k) = q_sym(fj, free_vars[static_cast<std::size_t>(k)]);
        c(j) = problem.c(fj) + q_sym.row(fj).dot(x_full);
        a.col(j) = problem.a_ineq.col(fj);
    }
    VectorXd b = problem.b_ineq;
    if (problem.num_ineq() > 0) b -= problem.a_ineq * x_full;

    RowSet rows;
    {
        std::vector<std::pair<VectorXd, double>> box;
        for (Index j = 0; j < nf; ++j) {
            const Index fj = free_vars[static_cast<std::size_t>(j)];
            if (std::isfinite(problem.ub(fj))) {
                VectorXd e = VectorXd::Zero(nf);
                e(j) = 1.0;
                box.emplace_back(std::move(e), problem.ub(fj));
            }
            if (std::isfinite(problem.lb(fj))) {
                VectorXd e = VectorXd::Zero(nf);
                e(j) = -1.0;
                box.emplace_back(std::move(e), -problem.lb(fj));
            }
        }
        rows.general = a.rows();
        const Index m = rows.general + static_cast<Index>(box.size());
        rows.g.resize(m, nf);
        rows.h.resize(m);
        if (rows.general > 0) {
            rows.g.topRows(rows.general) = a;
            rows.h.head(rows.general) = b;
        }
        for (std::size_t k = 0; k < box.size(); ++k) {
            rows.g.row(rows.general + static_cast<Index>(k)) = box[k].first.transpose();
            rows.h(rows.general + static_cast<Index>(k)) = box[k].second;
        }
    }
    const Index m = rows.g.rows();
    const int cap = options.max_iter > 0 ? options.max_iter : static_cast<int>(10 * (nf + m));

    QpResult result;
    auto finish = [&](const VectorXd& x_free) {
        for (Index j = 0; j < nf; ++j) x_full(free_vars[static_cast<std::size_t>(j)]) = x_free(j);
        result.x = x_full;
        result.objective = problem.objective(x_full);
    };

    // starting point: zero clamped into the box
    VectorXd x0(nf);
    for (Index j = 0; j < nf; ++j) {
        const Index fj = free_vars[static_cast<std::size_t>(j)];
        x0(j) = std::clamp(0.0, problem.lb(fj), problem.ub(fj));
    }

    const double hscale = std::max(1.0, inf_norm(rows.h));
    const double feas_tol = options.tol * hscale;
    double worst = 0.0;
    if (rows.general > 0) worst = (rows.g.topRows(rows.general) * x0 - rows.h.head(rows.general)).maxCoeff();
    if (worst > 0.0) {
        // phase one: minimize t subject to A x - t <= b, box, t >= 0
        MatrixXd g1 = MatrixXd::Zero(m + 1, nf + 1);
        VectorXd h1(m + 1);
        g1.topLeftCorner(m, nf) = rows.g;
        g1.block(0, nf, rows.general, 1).setConstant(-1.0);
        h1.head(m) = rows.h;
        g1(m, nf) = -1.0;
        h1(m) = 0.0;
        VectorXd c1 = VectorXd::Zero(nf + 1);
        c1(nf) = 1.0;
        VectorXd y0(nf + 1);
        y0 << x0, worst;
        const CoreResult p1 = active_set(MatrixXd::Zero(nf + 1, nf + 1), c1, g1, h1, y0,
                                         static_cast<int>(10 * (nf + 1 + m + 1)));
        result.iterations += p1.iterations;
        if (p1.status != QpStatus::optimal) {
            finish(p1.x.head(nf));
            result.status = QpStatus::max_iter;
            return result;
        }
        if (p1.x(nf) > feas_tol) {
            finish(p1.x.head(nf));
            result.status = QpStatus::infeasible;
            return result;
        }
        x0 = p1.x.head(nf);
    }

    const CoreResult core = active_set(q, c, rows.g, rows.h, x0, cap);
    result.iterations += core.iterations;
    result.status = core.status;
    // snap box-bound roundoff
    VectorXd x = core.x;
    for (Index j = 0; j < nf; ++j) {
        const Index fj = free_vars[static_cast<std::size_t>(j)];
        x(j) = std::clamp(x(j), problem.lb(fj), problem.ub(fj));
    }
    finish(x);
    if (core.status == QpStatus::optimal) {
        result.kkt = kkt_residuals(q, c, rows, x, core.lambda);
        if (result.kkt.max() > options.tol) {
            throw SolverError("qp", "KKT certificate failed (residual " + std::to_string(result.kkt.max()) + ")");
        }
    }
    return result;
}

void write_qp(std::ostream& out, const QpProblem& problem) {
    const auto flags = out.flags();
    const auto precision = out.precision();
    out << std::setprecision(17);
    auto write_vec = [&](const VectorXd& v) {
        for (Index i = 0; i < v.size(); ++i) out << (i ? " " : "") << v(i);
        out << '\n';
    };
    const Index n = problem.num_vars();
    const Index m = problem.num_ineq();
    out << "qp n " << n << " m " << m << '\n';
    out << "q\n";
    for (Index i = 0; i < n; ++i) write_vec(problem.q.row(i).transpose());
    out << "c\n";
    write_vec(problem.c);
    out << "constant " << problem.constant << '\n';
    out << "a_ineq\n";
    for (Index i = 0; i < m; ++i) write_vec(problem.a_ineq.row(i).transpose());
    out << "b_ineq\n";
    write_vec(problem.b_ineq);
    out << "lb\n";
    write_vec(problem.lb);
    out << "ub\n";
    write_vec(problem.ub);
    out.flags(flags);
    out.precision(precision);
}

}  // namespace dcleo
