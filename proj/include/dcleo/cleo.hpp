#pragma once

#include "dcleo/dispatch.hpp"
#include "dcleo/oracle.hpp"
#include "dcleo/qp.hpp"
#include "dcleo/sed_qp.hpp"

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace dcleo {

/// Affine fit of realized on accepted DR plus the empirical residual sample.
struct LlrModel {
    Matrix a1_hat;
    Vector a0_hat;
    std::vector<Vector> residuals;

    AffineResponse affine() const { return {a1_hat, a0_hat}; }
    Vector predict(const Vector& p_rd) const { return a1_hat.transpose() * p_rd + a0_hat; }
    Vector mean_residual() const;
};

struct LlrOptions {
    double window_scale = 2.0;  // keep pairs with |p - center|_inf <= window_scale * radius
};

/// Ordinary least squares with intercept over all pairs. Throws
/// SolverError("llr", ...) when there are fewer than N_DRP + 1 pairs or the
/// centered design is rank deficient.
LlrModel fit_ols(std::span<const ResponsePair> data);

/// Local fit: pairs inside the window around `center`, or the most recent
/// N_DRP + 5 pairs when fewer than that qualify.
LlrModel fit_llr(std::span<const ResponsePair> data, const Vector& center, double radius,
                 const LlrOptions& options = {});

/// A1^T p + A0 + eps_draw.
Vector surrogate(const LlrModel& model, const Vector& p_rd, const Vector& eps_draw);

/// Response function drawing residual (draw mod N_k).
ResponseFn surrogate_response(const LlrModel& model);

struct CleoConfig {
    double delta0 = 0.0;
    double delta_min = 1e-6;
    double delta_max = 0.0;
    double eta1 = 0.1;
    double gamma_shrink = 0.5;
    double gamma_grow = 2.0;
    int max_iters = 500;
    int batch = 3;
    double tol = 1e-6;  // stationarity: predicted decrease per unit radius, relative to |f|
    double window_scale = 2.0;

    /// Throws ValidationError.
    void validate() const;
};

/// delta0 = max(dr_max) / 4, delta_max = max(dr_max), batch = max(3, N_DRP + 1).
CleoConfig default_cleo_config(const PowerSystem& sys);

enum class Termination { radius, stationary, max_iters, direct };

std::string to_string(Termination t);

struct IterationRecord {
    int iter = 0;
    double objective = 0.0;       // estimate at the center after this iteration
    double best_objective = 0.0;  // running minimum of objective
    double radius = 0.0;          // radius used by this iteration
    double rho = std::numeric_limits<double>::quiet_NaN();
    bool accepted = false;
    double predicted_decrease = std::numeric_limits<double>::quiet_NaN();
    double step_norm = 0.0;  // |s|_inf of the candidate step
};

struct TrustRegionState {
    Vector center;
    double radius = 0.0;
    std::vector<ResponsePair> dataset;
    int iter = 0;
    std::vector<IterationRecord> history;
};

/// Surrogate dispatch objective at fixed p_rd: the program value with the
/// model mean plus the residual-sample average of the DR payment. +inf if
/// the program is infeasible at p_rd. p_g_out receives the optimal base
/// generation when feasible.
double model_objective(const SedContext& ctx, const LlrModel& model, const Vector& p_rd,
                       Vector* p_g_out = nullptr, const QpOptions& options = {});

struct SubproblemStep {
    Vector step;                 // zero when infeasible
    Decision candidate;          // center + step with re-optimized generation
    double center_value = 0.0;   // model objective at the center (+inf if infeasible there)
    double candidate_value = 0.0;
    double predicted_decrease = 0.0;
    bool infeasible = false;
};

/// Minimizes the surrogate dispatch objective over the ball
/// |p_rd - center|_inf <= radius jointly with base generation. The exact
/// minimizer of the convex program, so its decrease dominates the Cauchy
/// point's.
SubproblemStep solve_subproblem(const TrustRegionState& state, const LlrModel& model, const SedContext& ctx,
                                const QpOptions& options = {});

/// (u_center - u_trial) / predicted_decrease; NaN when the prediction is not positive.
double ratio(double u_center, double u_trial, double predicted_decrease);

struct RatioEstimate {
    double u_center = 0.0;
    double u_trial = 0.0;
    double rho = std::numeric_limits<double>::quiet_NaN();
};

/// u_center from the model fitted at the center, u_trial from the model refit
/// at the trial point with fresh oracle data.
RatioEstimate estimate_ratio(const SedContext& ctx, const Vector& center, const Vector& trial,
                             const LlrModel& center_model, const LlrModel& trial_model, double predicted_decrease,
                             const QpOptions& options = {});

struct CleoResult {
    Decision decision;
    DispatchEvaluation evaluation;
    double objective = 0.0;  // best model estimate
    LlrModel model;          // model behind the returned decision
    std::vector<IterationRecord> history;
    Termination termination = Termination::max_iters;
    std::size_t oracle_calls = 0;
    std::size_t dataset_size = 0;
};

/// The learn-then-optimize trust-region loop.
///
/// Each iteration queries `batch` points in the current ball, fits the local
/// model, solves the ball subproblem, queries a fresh batch at the trial
/// point, refits there and accepts on rho >= eta1 (radius grows) or rejects
/// (radius shrinks). Stops on radius < delta_min, on a stationary model
/// (predicted decrease per unit radius below tol * (1 + |f|)) or at
/// max_iters. Returns the decision with the best objective estimate;
/// `scenarios` drive the final expected-cost evaluation.
CleoResult run_cleo(const SedContext& ctx, ResponseOracle& oracle, const CleoConfig& config,
                    std::uint64_t exploration_seed, std::span<const ResScenario> scenarios, bool analytic = true,
                    const QpOptions& options = {});

}  // namespace dcleo
