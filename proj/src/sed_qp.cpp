#include "dcleo/sed_qp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dcleo {

SedContext SedContext::build(const PowerSystem& sys, const Matrix& lambda, double adequacy_margin,
                             bool include_variance) {
    SedContext ctx;
    ctx.sys = sys;
    ctx.alpha = participation_factors(sys);
    ctx.a_prime = variance_cost_coeffs(sys, lambda);
    ctx.ptdf = compute_ptdf(sys);
    ctx.maps = incidence_maps(sys);
    ctx.dr_max = dcleo::dr_max(sys);
    ctx.flow_gen = ctx.ptdf * ctx.maps.gen;
    ctx.flow_drp = ctx.ptdf * ctx.maps.drp;

    Vector p_res(sys.num_res());
    for (int r = 0; r < sys.num_res(); ++r) p_res(r) = sys.res_units[r].p_nominal;
    Vector p_load(static_cast<Eigen::Index>(sys.loads.size()));
    for (std::size_t k = 0; k < sys.loads.size(); ++k) p_load(static_cast<Eigen::Index>(k)) = sys.loads[k].p;
    ctx.flow_base = ctx.ptdf * (ctx.maps.res * p_res - ctx.maps.load * p_load);
    ctx.adequacy_margin = adequacy_margin;
    ctx.include_variance = include_variance;
    return ctx;
}

double SedContext::variance_cost() const {
    return include_variance ? a_prime.dot(alpha.cwiseProduct(alpha)) : 0.0;
}

QpProblem assemble_sed_qp(const SedContext& ctx, const AffineResponse& model, const Vector& center,
                          double radius) {
    const auto& sys = ctx.sys;
    const int ng = sys.num_generators();
    const int nd = sys.num_drps();
    const int nl = sys.num_lines();
    if (model.a1.rows() != nd || model.a1.cols() != nd || model.a0.size() != nd || center.size() != nd) {
        throw std::invalid_argument("assemble_sed_qp: response model or center has wrong dimension");
    }
    const int n = ng + nd;

    Vector prices(nd);
    for (int j = 0; j < nd; ++j) prices(j) = sys.drps[j].pi_dr;

    QpProblem qp;
    qp.q = Matrix::Zero(n, n);
    qp.c = Vector::Zero(n);
    for (int i = 0; i < ng; ++i) {
        qp.q(i, i) = 2.0 * sys.generators[i].a;
        qp.c(i) = sys.generators[i].b;
    }
    // DR paid at the model mean: pi^T (A1^T p + A0)
    qp.c.tail(nd) = model.a1 * prices;
    qp.constant = prices.dot(model.a0) + ctx.variance_cost();

    qp.a_ineq = Matrix::Zero(1 + 2 * nl, n);
    qp.b_ineq = Vector::Zero(1 + 2 * nl);
    // adequacy: sum p_g + sum (A1^T p + A0) >= load - res + margin
    qp.a_ineq.row(0).head(ng).setConstant(-1.0);
    qp.a_ineq.row(0).tail(nd) = -(model.a1 * Vector::Ones(nd)).transpose();
    qp.b_ineq(0) = -(sys.total_load() - sys.total_res() - model.a0.sum() + ctx.adequacy_margin + kStrictAdequacyEps);
    for (int l = 0; l < nl; ++l) {
        const double limit = sys.lines[l].flow_limit;
        qp.a_ineq.row(1 + l).head(ng) = ctx.flow_gen.row(l);
        qp.a_ineq.row(1 + l).tail(nd) = ctx.flow_drp.row(l);
        qp.b_ineq(1 + l) = limit - ctx.flow_base(l);
        qp.a_ineq.row(1 + nl + l) = -qp.a_ineq.row(1 + l);
        qp.b_ineq(1 + nl + l) = limit + ctx.flow_base(l);
    }

    qp.lb = Vector(n);
    qp.ub = Vector(n);
    for (int i = 0; i < ng; ++i) {
        qp.lb(i) = sys.generators[i].p_min;
        qp.ub(i) = sys.generators[i].p_max;
    }
    for (int j = 0; j < nd; ++j) {
        double lo = 0.0;
        double hi = ctx.dr_max(j);
        if (std::isfinite(radius)) {
            lo = std::max(lo, center(j) - radius);
            hi = std::min(hi, center(j) + radius);
            if (radius == 0.0) lo = hi = std::clamp(center(j), 0.0, ctx.dr_max(j));
            if (lo > hi) lo = hi = std::clamp(center(j), 0.0, ctx.dr_max(j));
        }
        qp.lb(ng + j) = lo;
        qp.ub(ng + j) = hi;
    }
    return qp;
}

SedSolution solve_sed(const SedContext& ctx, const AffineResponse& model, const Vector& center, double radius,
                      const QpOptions& options) {
    const QpProblem qp = assemble_sed_qp(ctx, model, center, radius);
    const QpResult res = solve(qp, options);
    SedSolution out;
    out.status = res.status;
    const int ng = ctx.sys.num_generators();
    out.decision.p_g_base = res.x.head(ng);
    out.decision.p_rd = res.x.tail(ctx.sys.num_drps());
    if (res.status == QpStatus::optimal) out.objective = res.objective;
    return out;
}

}  // namespace dcleo
