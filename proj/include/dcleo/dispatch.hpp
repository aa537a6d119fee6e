#pragma once

#include "dcleo/netmodel.hpp"
#include "dcleo/scenario.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace dcleo {

/// Operator decision: base-case generation and accepted DR commitments, pu.
struct Decision {
    Vector p_g_base;
    Vector p_rd;
};

/// Affine DR response r(p) = A1^T p + A0.
struct AffineResponse {
    Matrix a1;
    Vector a0;

    Vector mean(const Vector& p_rd) const { return a1.transpose() * p_rd + a0; }
    static AffineResponse identity(int n_drp);
};

enum class ConstraintKind { adequacy, line_flow, generation, dr_limit };

struct Violation {
    ConstraintKind kind;
    int index;         // line / generator / DRP index; 0 for adequacy
    double magnitude;  // amount by which the bound is exceeded, pu

    std::string id() const;
};

struct DispatchEvaluation {
    double expected_cost = 0.0;
    double gen_cost = 0.0;
    double variance_cost = 0.0;
    double dr_cost = 0.0;
    std::vector<Violation> constraint_violations;
};

/// Realized DR for accepted p_rd on noise draw `draw`.
using ResponseFn = std::function<Vector(const Vector& p_rd, std::size_t draw)>;

ResponseFn identity_response();

/// alpha_i = (1/a_i) / sum_j (1/a_j). Throws ValidationError if any a_i <= 0.
Vector participation_factors(const PowerSystem& sys);

/// P^G_i = p_g_base_i - alpha_i * sum_j zeta_j.
Vector recourse_generation(const Decision& d, const Vector& alpha, const ResScenario& zeta);

/// sum_i a_i p_i^2 + b_i p_i.
double generation_cost(const Vector& p_g, const PowerSystem& sys);

/// Ceiling on the accepted commitment from the linear aggregated demand curve.
double dr_max(const Drp& drp);
Vector dr_max(const PowerSystem& sys);

/// Expected supply-side cost.
///
/// With `analytic` set, gen_cost is the base-case cost and variance_cost is
/// sum_i a'_i alpha_i^2, the closed form of the recourse spread. Otherwise
/// the recourse cost is averaged over `scenarios`; gen_cost keeps the base
/// case part and variance_cost holds the sampled excess, so both modes
/// decompose the same way. dr_cost averages sum_j response_j * pi_dr_j over
/// one response draw per scenario. Throws std::invalid_argument on an empty
/// scenario set.
DispatchEvaluation expected_cost(const Decision& d, const PowerSystem& sys, const Vector& alpha,
                                 const Vector& a_prime, const ResponseFn& response,
                                 std::span<const ResScenario> scenarios, bool analytic);

struct CheckOptions {
    double adequacy_margin = 0.0;
    double tol = 1e-9;  // slack allowed on the non-strict constraints
};

/// Violated constraints of the dispatch at one RES scenario; empty iff feasible.
/// Adequacy is strict: supply - load must exceed the margin.
std::vector<Violation> check_constraints(const Decision& d, const PowerSystem& sys, const Vector& alpha,
                                         const Matrix& ptdf, const IncidenceMaps& maps,
                                         const Vector& response_mean, const ResScenario& zeta_eval,
                                         const CheckOptions& options = {});

/// Fraction of scenarios in which each constraint family is violated.
struct ViolationReport {
    std::size_t samples = 0;
    double adequacy = 0.0;
    double line_flow = 0.0;
    double generation = 0.0;
    double dr_limit = 0.0;
    double any = 0.0;
};

ViolationReport violation_rates(const Decision& d, const PowerSystem& sys, const Vector& alpha,
                                const Matrix& ptdf, const IncidenceMaps& maps, const Vector& response_mean,
                                std::span<const ResScenario> scenarios, const CheckOptions& options = {});

}  // namespace dcleo
