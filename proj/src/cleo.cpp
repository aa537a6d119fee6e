#include "dcleo/cleo.hpp"

#include "dcleo/error.hpp"
#include "dcleo/rng.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace dcleo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vector drp_prices(const PowerSystem& sys) {
    Vector prices(sys.num_drps());
    for (int j = 0; j < sys.num_drps(); ++j) prices(j) = sys.drps[j].pi_dr;
    return prices;
}

Vector perturb(Rng& rng, const Vector& center, double radius, const Vector& upper) {
    Vector p(center.size());
    for (Eigen::Index j = 0; j < center.size(); ++j) {
        p(j) = std::clamp(center(j) + rng.uniform(-radius, radius), 0.0, upper(j));
    }
    return p;
}

}  // namespace

Vector LlrModel::mean_residual() const {
    Vector mean = Vector::Zero(a0_hat.size());
    if (residuals.empty()) return mean;
    for (const auto& e : residuals) mean += e;
    return mean / static_cast<double>(residuals.size());
}

LlrModel fit_ols(std::span<const ResponsePair> data) {
    if (data.empty()) throw SolverError("llr", "no data");
    const Eigen::Index d = data.front().p_rd.size();
    const auto n = static_cast<Eigen::Index>(data.size());
    if (n < d + 1) {
        throw SolverError("llr", "need at least " + std::to_string(d + 1) + " pairs, have " + std::to_string(n));
    }
    Matrix x(n, d);
    Matrix y(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        x.row(i) = data[static_cast<std::size_t>(i)].p_rd.transpose();
        y.row(i) = data[static_cast<std::size_t>(i)].p_rd_enu.transpose();
    }
    const Eigen::RowVectorXd x_mean = x.colwise().mean();
    const Eigen::RowVectorXd y_mean = y.colwise().mean();
    const Matrix xc = x.rowwise() - x_mean;
    const Matrix yc = y.rowwise() - y_mean;

    Eigen::JacobiSVD<Matrix> svd(xc, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sv = svd.singularValues();
    const double s_max = sv.size() ? sv(0) : 0.0;
    const double s_min = sv.size() ? sv(sv.size() - 1) : 0.0;
    if (!(s_max > 0.0) || s_min <= 1e-12 * s_max) {
        throw SolverError("llr", "rank-deficient design (accepted commitments do not span the DR space)");
    }

    LlrModel model;
    if (s_min <= 1e-8 * s_max) {
        // near-degenerate: ridge on the centered normal equations
        const double ridge = 1e-8 * s_max * s_max;
        const Matrix gram = xc.transpose() * xc + ridge * Matrix::Identity(d, d);
        model.a1_hat = gram.ldlt().solve(xc.transpose() * yc);
    } else {
        model.a1_hat = svd.solve(yc);
    }
    model.a0_hat = (y_mean - x_mean * model.a1_hat).transpose();
    model.residuals.reserve(data.size());
    for (const auto& pair : data) model.residuals.push_back(pair.p_rd_enu - model.predict(pair.p_rd));
    return model;
}

LlrModel fit_llr(std::span<const ResponsePair> data, const Vector& center, double radius,
                 const LlrOptions& options) {
    if (data.empty()) throw SolverError("llr", "no data");
    const std::size_t fallback = static_cast<std::size_t>(center.size()) + 5;
    const double window = options.window_scale * radius;
    std::vector<ResponsePair> local;
    for (const auto& pair : data) {
        if ((pair.p_rd - center).cwiseAbs().maxCoeff() <= window) local.push_back(pair);
    }
    if (local.size() < fallback) {
        const std::size_t take = std::min(fallback, data.size());
        return fit_ols(data.subspan(data.size() - take));
    }
    return fit_ols(local);
}

Vector surrogate(const LlrModel& model, const Vector& p_rd, const Vector& eps_draw) {
    return model.predict(p_rd) + eps_draw;
}

ResponseFn surrogate_response(const LlrModel& model) {
    return [model](const Vector& p_rd, std::size_t draw) {
        if (model.residuals.empty()) return model.predict(p_rd);
        return surrogate(model, p_rd, model.residuals[draw % model.residuals.size()]);
    };
}

void CleoConfig::validate() const {
    if (!(eta1 > 0.0 && eta1 < 1.0)) throw ValidationError("cleo.eta1 must lie in (0, 1)");
    if (!(gamma_shrink > 0.0 && gamma_shrink < 1.0)) throw ValidationError("cleo.gamma_shrink must lie in (0, 1)");
    if (!(gamma_grow > 1.0)) throw ValidationError("cleo.gamma_grow must exceed 1");
    if (!(delta_min > 0.0 && delta_min < delta0 && delta0 < delta_max)) {
        throw ValidationError("cleo radii must satisfy 0 < delta_min < delta0 < delta_max");
    }
    if (max_iters < 1) throw ValidationError("cleo.max_iters must be positive");
    if (batch < 1) throw ValidationError("cleo.batch must be positive");
    if (!(tol >= 0.0)) throw ValidationError("cleo.tol must be nonnegative");
    if (!(window_scale > 0.0)) throw ValidationError("cleo.window_scale must be positive");
}

CleoConfig default_cleo_config(const PowerSystem& sys) {
    CleoConfig config;
    const Vector caps = dr_max(sys);
    const double widest = caps.size() ? caps.maxCoeff() : 0.0;
    config.delta_max = widest;
    config.delta0 = 0.25 * widest;
    config.batch = std::max(3, sys.num_drps() + 1);
    return config;
}

std::string to_string(Termination t) {
    switch (t) {
        case Termination::radius:
            return "radius";
        case Termination::stationary:
            return "stationary";
        case Termination::max_iters:
            return "max_iters";
        case Termination::direct:
            return "direct";
    }
    return "unknown";
}

double model_objective(const SedContext& ctx, const LlrModel& model, const Vector& p_rd, Vector* p_g_out,
                       const QpOptions& options) {
    const SedSolution sol = solve_sed(ctx, model.affine(), p_rd, 0.0, options);
    if (sol.status != QpStatus::optimal) return kInf;
    if (p_g_out) *p_g_out = sol.decision.p_g_base;
    return sol.objective + drp_prices(ctx.sys).dot(model.mean_residual());
}

SubproblemStep solve_subproblem(const TrustRegionState& state, const LlrModel& model, const SedContext& ctx,
                                const QpOptions& options) {
    SubproblemStep out;
    out.center_value = model_objective(ctx, model, state.center, nullptr, options);
    const SedSolution sol = solve_sed(ctx, model.affine(), state.center, state.radius, options);
    if (sol.status != QpStatus::optimal) {
        out.infeasible = true;
        out.step = Vector::Zero(state.center.size());
        out.candidate_value = kInf;
        out.predicted_decrease = 0.0;
        return out;
    }
    out.candidate = sol.decision;
    out.step = sol.decision.p_rd - state.center;
    out.candidate_value = sol.objective + drp_prices(ctx.sys).dot(model.mean_residual());
    out.predicted_decrease = out.center_value - out.candidate_value;
    if (std::isfinite(out.center_value) &&
        out.predicted_decrease <= 1e-12 * (1.0 + std::abs(out.center_value))) {
        // flat model around the center: stay put
        Vector p_g;
        model_objective(ctx, model, state.center, &p_g, options);
        out.candidate = {p_g, state.center};
        out.step = Vector::Zero(state.center.size());
        out.candidate_value = out.center_value;
        out.predicted_decrease = 0.0;
    }
    return out;
}

double ratio(double u_center, double u_trial, double predicted_decrease) {
    if (!(predicted_decrease > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return (u_center - u_trial) / predicted_decrease;
}

RatioEstimate estimate_ratio(const SedContext& ctx, const Vector& center, const Vector& trial,
                             const LlrModel& center_model, const LlrModel& trial_model, double predicted_decrease,
                             const QpOptions& options) {
    RatioEstimate est;
    est.u_center = model_objective(ctx, center_model, center, nullptr, options);
    est.u_trial = model_objective(ctx, trial_model, trial, nullptr, options);
    est.rho = ratio(est.u_center, est.u_trial, predicted_decrease);
    return est;
}

CleoResult run_cleo(const SedContext& ctx, ResponseOracle& oracle, const CleoConfig& config,
                    std::uint64_t exploration_seed, std::span<const ResScenario> scenarios, bool analytic,
                    const QpOptions& options) {
    config.validate();
    const auto& sys = ctx.sys;
    const int nd = sys.num_drps();
    const Vector& upper = ctx.dr_max;
    const LlrOptions llr{config.window_scale};
    Rng rng(exploration_seed);

    TrustRegionState state;
    state.center = 0.5 * upper;
    state.radius = config.delta0;

    auto query = [&](const Vector& anchor, int count, bool include_anchor) {
        std::vector<Vector> points;
        if (include_anchor) points.push_back(anchor);
        while (static_cast<int>(points.size()) < count) points.push_back(perturb(rng, anchor, state.radius, upper));
        for (auto& pair : oracle.collect(points)) state.dataset.push_back(std::move(pair));
    };

    // initial design around the starting point
    query(state.center, nd + 5, true);

    struct Best {
        double value = kInf;
        Vector p_rd;
        Vector p_g;
        std::optional<LlrModel> model;
    } best;
    auto offer_best = [&](double value, const Vector& p_rd, const LlrModel& model) {
        if (!(value < best.value)) return;
        Vector p_g;
        model_objective(ctx, model, p_rd, &p_g, options);
        best = {value, p_rd, p_g, model};
    };

    CleoResult result;
    result.termination = Termination::max_iters;
    std::optional<SolverError> last_failure;

    for (int k = 0; k < config.max_iters; ++k) {
        state.iter = k;
        IterationRecord rec;
        rec.iter = k;
        rec.radius = state.radius;

        query(state.center, config.batch, false);
        std::optional<LlrModel> model;
        try {
            model = fit_llr(state.dataset, state.center, state.radius, llr);
        } catch (const SolverError& e) {
            last_failure = e;
        }

        bool accepted = false;
        double estimate = best.value;
        if (model) {
            const SubproblemStep sub = solve_subproblem(state, *model, ctx, options);
            const bool center_feasible = std::isfinite(sub.center_value);
            if (center_feasible) {
                offer_best(sub.center_value, state.center, *model);
                estimate = sub.center_value;
            }
            rec.predicted_decrease = sub.predicted_decrease;
            rec.step_norm = sub.step.size() ? sub.step.cwiseAbs().maxCoeff() : 0.0;

            if (!sub.infeasible) {
                const double scale = 1.0 + std::abs(sub.center_value);
                if (center_feasible && sub.predicted_decrease <= config.tol * scale * state.radius) {
                    rec.objective = estimate;
                    rec.best_objective = best.value;
                    state.history.push_back(rec);
                    result.termination = Termination::stationary;
                    break;
                }
                const Vector trial = sub.candidate.p_rd;
                query(trial, config.batch, true);
                std::optional<LlrModel> trial_model;
                try {
                    trial_model = fit_llr(state.dataset, trial, state.radius, llr);
                } catch (const SolverError& e) {
                    last_failure = e;
                }
                if (trial_model) {
                    const double u_trial = model_objective(ctx, *trial_model, trial, nullptr, options);
                    if (center_feasible) {
                        // the center model is the one fitted at the center, so u_center = f_k(center)
                        rec.rho = ratio(sub.center_value, u_trial, sub.predicted_decrease);
                        accepted = rec.rho >= config.eta1;
                    } else {
                        // restoration: any point the refit model deems feasible is progress
                        accepted = std::isfinite(u_trial);
                    }
                    if (accepted) {
                        state.center = trial;
                        estimate = u_trial;
                        offer_best(u_trial, trial, *trial_model);
                    }
                }
            }
        }

        rec.accepted = accepted;
        rec.objective = estimate;
        rec.best_objective = best.value;
        state.history.push_back(rec);
        if (accepted) {
            state.radius = std::min(config.gamma_grow * state.radius, config.delta_max);
        } else {
            state.radius *= config.gamma_shrink;
            if (state.radius < config.delta_min) {
                result.termination = Termination::radius;
                break;
            }
        }
    }

    if (!best.model) {
        if (last_failure) throw *last_failure;
        throw SolverError("cleo", "no feasible decision found");
    }
    result.decision = {best.p_g, best.p_rd};
    result.objective = best.value;
    result.model = *best.model;
    result.history = std::move(state.history);
    result.oracle_calls = oracle.calls();
    result.dataset_size = state.dataset.size();
    if (!scenarios.empty()) {
        result.evaluation = expected_cost(result.decision, sys, ctx.alpha, ctx.include_variance ? ctx.a_prime
                                                                                                : Vector::Zero(ctx.a_prime.size()),
                                          surrogate_response(result.model), scenarios, analytic);
    }
    return result;
}

}  // namespace dcleo
