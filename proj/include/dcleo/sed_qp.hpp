#pragma once

#include "dcleo/dispatch.hpp"
#include "dcleo/netmodel.hpp"
#include "dcleo/qp.hpp"

#include <limits>

namespace dcleo {

/// Supply must beat demand by this much inside the optimizer so that the
/// strict adequacy inequality holds at the returned point.
inline constexpr double kStrictAdequacyEps = 1e-9;

/// Everything about a system that the dispatch programs reuse across solves.
struct SedContext {
    PowerSystem sys;
    Vector alpha;
    Vector a_prime;
    Matrix ptdf;
    IncidenceMaps maps;
    Vector dr_max;
    Matrix flow_gen;   // ptdf * I1
    Matrix flow_drp;   // ptdf * I2
    Vector flow_base;  // ptdf * (I3 P^R - I4 P^L) at zero RES deviation
    double adequacy_margin = 0.0;
    bool include_variance = true;

    /// lambda is the RES covariance; include_variance=false drops the
    /// sum a'_i alpha_i^2 term (deterministic dispatch).
    static SedContext build(const PowerSystem& sys, const Matrix& lambda, double adequacy_margin,
                            bool include_variance);

    double variance_cost() const;
    Eigen::Index num_vars() const { return sys.num_generators() + sys.num_drps(); }
};

/// The dispatch program over x = [p_g_base; p_rd] with the DR response
/// replaced by an affine model: quadratic generation cost, DR paid at the
/// model mean, adequacy on the model mean, line limits with accepted DR at
/// zero RES deviation, generation bounds, 0 <= p_rd <= dr_max, and the box
/// |p_rd - center|_inf <= radius. radius = infinity drops the ball, radius
/// = 0 fixes p_rd at center.
QpProblem assemble_sed_qp(const SedContext& ctx, const AffineResponse& model, const Vector& center,
                          double radius = std::numeric_limits<double>::infinity());

struct SedSolution {
    QpStatus status = QpStatus::infeasible;
    Decision decision;
    double objective = std::numeric_limits<double>::infinity();
};

SedSolution solve_sed(const SedContext& ctx, const AffineResponse& model, const Vector& center,
                      double radius = std::numeric_limits<double>::infinity(), const QpOptions& options = {});

}  // namespace dcleo
