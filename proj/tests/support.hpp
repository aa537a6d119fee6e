#pragma once

// Fixtures and brute-force reference computations shared by the unit tests
// and the acceptance binary. None of these call into the code under test
// beyond building plain data.

#include "dcleo/netmodel.hpp"
#include "dcleo/qp.hpp"
#include "dcleo/rng.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace testsupport {

using dcleo::Matrix;
using dcleo::Vector;

inline std::filesystem::path data_file(const std::string& name) {
    return std::filesystem::path(DCLEO_DATA_DIR) / name;
}

/// Connected network with 2..max_buses buses: a random spanning tree plus
/// a few extra lines, random reactances, random slack.
inline dcleo::PowerSystem random_network(dcleo::Rng& rng, int max_buses = 6) {
    dcleo::PowerSystem sys;
    sys.name = "random";
    const int nb = 2 + static_cast<int>(rng.uniform() * (max_buses - 1));
    const int slack = static_cast<int>(rng.uniform() * nb);
    for (int i = 0; i < nb; ++i) sys.buses.push_back({i, i == slack, std::to_string(i)});
    for (int i = 1; i < nb; ++i) {
        const int j = static_cast<int>(rng.uniform() * i);
        sys.lines.push_back({i, j, rng.uniform(0.05, 0.5), 10.0});
    }
    const int extra = static_cast<int>(rng.uniform() * nb);
    for (int k = 0; k < extra; ++k) {
        const int i = static_cast<int>(rng.uniform() * nb);
        const int j = static_cast<int>(rng.uniform() * nb);
        if (i != j) sys.lines.push_back({i, j, rng.uniform(0.05, 0.5), 10.0});
    }
    return sys;
}

/// Line flows from a full DC solve: B theta = p with theta_slack = 0, where
/// p holds every bus's injection and the slack takes minus the sum of the rest.
inline Vector dc_flows_direct(const dcleo::PowerSystem& sys, const Vector& injection_by_bus) {
    const int nb = sys.num_buses();
    const int slack = sys.slack_bus();
    Matrix b = Matrix::Zero(nb, nb);
    for (const auto& line : sys.lines) {
        const double y = 1.0 / line.reactance;
        b(line.from_bus, line.from_bus) += y;
        b(line.to_bus, line.to_bus) += y;
        b(line.from_bus, line.to_bus) -= y;
        b(line.to_bus, line.from_bus) -= y;
    }
    Vector p = injection_by_bus;
    p(slack) = -(injection_by_bus.sum() - injection_by_bus(slack));
    b.row(slack).setZero();
    b(slack, slack) = 1.0;
    p(slack) = 0.0;
    const Vector theta = b.fullPivLu().solve(p);
    Vector flows(sys.num_lines());
    for (int l = 0; l < sys.num_lines(); ++l) {
        const auto& line = sys.lines[l];
        flows(l) = (theta(line.from_bus) - theta(line.to_bus)) / line.reactance;
    }
    return flows;
}

/// Two-variable convex QP with a box and three inequalities that keep a
/// neighbourhood of a known interior point feasible. Scaled so the
/// objective varies by well under 1e-4 across one 1e-3 grid cell.
inline dcleo::QpProblem random_qp2(dcleo::Rng& rng) {
    dcleo::QpProblem qp;
    Matrix m(2, 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
    if (rng.uniform() < 0.2) m.row(1) = 0.5 * m.row(0);  // singular Hessian now and then
    qp.q = 0.01 * m.transpose() * m;
    qp.c = Vector(2);
    qp.c << rng.uniform(-0.01, 0.01), rng.uniform(-0.01, 0.01);
    qp.lb = Vector(2);
    qp.ub = Vector(2);
    for (int i = 0; i < 2; ++i) {
        qp.lb(i) = rng.uniform(-0.5, 0.0);
        qp.ub(i) = qp.lb(i) + rng.uniform(0.3, 1.0);
    }
    Vector x0(2);
    for (int i = 0; i < 2; ++i) x0(i) = rng.uniform(qp.lb(i) + 0.1, qp.ub(i) - 0.1);
    qp.a_ineq = Matrix(3, 2);
    qp.b_ineq = Vector(3);
    for (int k = 0; k < 3; ++k) {
        const double angle = rng.uniform(0.0, 2.0 * M_PI);
        qp.a_ineq(k, 0) = std::cos(angle);
        qp.a_ineq(k, 1) = std::sin(angle);
        qp.b_ineq(k) = qp.a_ineq.row(k).dot(x0) + rng.uniform(0.05, 0.4);
    }
    return qp;
}

inline bool feasible(const dcleo::QpProblem& qp, const Vector& x, double tol = 0.0) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (x(i) < qp.lb(i) - tol || x(i) > qp.ub(i) + tol) return false;
    }
    if (qp.num_ineq() == 0) return true;
    return ((qp.a_ineq * x - qp.b_ineq).array() <= tol).all();
}

/// Minimum over the feasible points of the box grid with spacing h.
inline double grid_minimum(const dcleo::QpProblem& qp, double h) {
    double best = std::numeric_limits<double>::infinity();
    const int n0 = static_cast<int>(std::floor((qp.ub(0) - qp.lb(0)) / h));
    const int n1 = static_cast<int>(std::floor((qp.ub(1) - qp.lb(1)) / h));
    Vector x(2);
    for (int i = 0; i <= n0 + 1; ++i) {
        x(0) = std::min(qp.lb(0) + i * h, qp.ub(0));
        for (int j = 0; j <= n1 + 1; ++j) {
            x(1) = std::min(qp.lb(1) + j * h, qp.ub(1));
            bool ok = true;
            for (int k = 0; k < qp.num_ineq() && ok; ++k) ok = qp.a_ineq.row(k).dot(x) <= qp.b_ineq(k);
            if (ok) best = std::min(best, qp.objective(x));
        }
    }
    return best;
}

/// One generator at the slack bus, one DRP and the whole load at the other
/// bus. With gen cost 1000 p^2 + 2000 p, DR price 10000, load 5 and a
/// response 0.8 p + 0.1, the optimum accepted DR is 1.125.
inline dcleo::PowerSystem two_bus_system() {
    dcleo::PowerSystem sys;
    sys.name = "two-bus";
    sys.buses = {{0, true, "1"}, {1, false, "2"}};
    sys.lines = {{0, 1, 0.1, 100.0}};
    sys.generators = {{0, 1000.0, 2000.0, 0.0, 10.0}};
    sys.drps = {{1, 2.0, 30000.0, 20000.0, 10000.0, 10000.0}};  // dr_max = p_base = 2
    sys.loads = {{1, 5.0}};
    return sys;
}

/// f(p) of the two-bus system with the generator re-optimized, from the
/// adequacy condition g + a1 p + a0 >= load. Used as a 1-D brute-force oracle.
inline double two_bus_cost(const dcleo::PowerSystem& sys, double a1, double a0, double p) {
    const auto& g = sys.generators[0];
    const double need = sys.loads[0].p - (a1 * p + a0);
    const double unconstrained = -g.b / (2.0 * g.a);
    const double pg = std::clamp(std::max(need, unconstrained), g.p_min, g.p_max);
    if (pg < need) return std::numeric_limits<double>::infinity();
    return g.a * pg * pg + g.b * pg + sys.drps[0].pi_dr * (a1 * p + a0);
}

/// Single bus with one generator (a = 1, b = 0) and one RES whose deviation
/// is uniform on [-1, 1].
inline dcleo::PowerSystem single_generator_system() {
    dcleo::PowerSystem sys;
    sys.name = "single";
    sys.buses = {{0, true, "1"}};
    sys.generators = {{0, 1.0, 0.0, 0.0, 10.0}};
    sys.res_units = {{0, 1.0, 100.0}};
    return sys;
}

/// Least-squares slope of log(y) on log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace testsupport
