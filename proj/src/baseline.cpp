#include "dcleo/baseline.hpp"

#include "dcleo/error.hpp"
#include "dcleo/rng.hpp"
#include "dcleo/sed_qp.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace dcleo {

using nlohmann::json;

CaseId parse_case_id(const std::string& name) {
    if (name == "case1" || name == "1") return CaseId::endogenous;
    if (name == "case2" || name == "2") return CaseId::deterministic;
    if (name == "case3" || name == "3") return CaseId::exogenous;
    throw ParseError("unknown scenario '" + name + "' (expected case1, case2 or case3)");
}

std::string to_string(CaseId id) { return "case" + std::to_string(static_cast<int>(id)); }

namespace {

void require_optimal(const SedSolution& sol, const char* stage) {
    if (sol.status != QpStatus::optimal) {
        throw SolverError(stage, "dispatch program " + to_string(sol.status) +
                                     " (energy adequacy, line limits or generation bounds cannot be met)");
    }
}

void finish(CaseResult& r, const SedContext& ctx, std::span<const ResScenario> scenarios, const ResponseFn& response,
            bool analytic, double adequacy_margin) {
    const Vector a_prime = ctx.include_variance ? ctx.a_prime : Vector::Zero(ctx.a_prime.size());
    r.evaluation = expected_cost(r.decision, ctx.sys, ctx.alpha, a_prime, response, scenarios, analytic);
    const ResScenario zero{Vector::Zero(ctx.sys.num_res())};
    const CheckOptions check{adequacy_margin, 1e-9};
    r.evaluation.constraint_violations =
        check_constraints(r.decision, ctx.sys, ctx.alpha, ctx.ptdf, ctx.maps, r.dr_expected_response, zero, check);
    r.violations = violation_rates(r.decision, ctx.sys, ctx.alpha, ctx.ptdf, ctx.maps, r.dr_expected_response,
                                   scenarios, check);
    r.objective = r.evaluation.expected_cost;
    r.dr_commitment_total = r.decision.p_rd.sum();
}

}  // namespace

CaseResult run_case(const PowerSystem& sys, const ConsumerModel& oracle_model, CaseId case_id,
                    const ExperimentConfig& config) {
    const DispatchSettings settings = config.dispatch();
    const UncertaintyModel uncertainty = config.uncertainty_model(sys);
    const QpOptions qp = config.qp_options();
    const int nd = sys.num_drps();

    CaseResult r;
    r.case_id = case_id;

    if (case_id == CaseId::deterministic) {
        const SedContext ctx = SedContext::build(sys, covariance_of(uncertainty), settings.adequacy_margin, false);
        const SedSolution sol = solve_sed(ctx, AffineResponse::identity(nd), Vector::Zero(nd),
                                          std::numeric_limits<double>::infinity(), qp);
        require_optimal(sol, "case2");
        r.decision = sol.decision;
        r.dr_expected_response = sol.decision.p_rd;
        const std::vector<ResScenario> none{ResScenario{Vector::Zero(sys.num_res())}};
        finish(r, ctx, none, identity_response(), true, settings.adequacy_margin);
        r.history.push_back({0, r.objective, r.objective, 0.0, std::numeric_limits<double>::quiet_NaN(), true,
                             std::numeric_limits<double>::quiet_NaN(), 0.0});
        return r;
    }

    const SedContext ctx = SedContext::build(sys, covariance_of(uncertainty), settings.adequacy_margin, true);
    const auto scenarios = sample_scenarios(uncertainty, settings.samples);

    if (case_id == CaseId::exogenous) {
        const SedSolution sol = solve_sed(ctx, AffineResponse::identity(nd), Vector::Zero(nd),
                                          std::numeric_limits<double>::infinity(), qp);
        require_optimal(sol, "case3");
        r.decision = sol.decision;
        r.dr_expected_response = sol.decision.p_rd;
        finish(r, ctx, scenarios, identity_response(), settings.analytic_expectation, settings.adequacy_margin);
        r.history.push_back({0, r.objective, r.objective, 0.0, std::numeric_limits<double>::quiet_NaN(), true,
                             std::numeric_limits<double>::quiet_NaN(), 0.0});
        return r;
    }

    ResponseOracle oracle(oracle_model);
    CleoResult cleo = run_cleo(ctx, oracle, config.cleo_config(sys), config.exploration_seed(), {},
                               settings.analytic_expectation, qp);
    r.decision = cleo.decision;
    r.dr_expected_response = cleo.model.predict(cleo.decision.p_rd);
    r.history = std::move(cleo.history);
    r.termination = cleo.termination;
    r.oracle_calls = cleo.oracle_calls;
    finish(r, ctx, scenarios, surrogate_response(cleo.model), settings.analytic_expectation,
           settings.adequacy_margin);
    r.model = std::move(cleo.model);
    return r;
}

LlrModel global_regression_baseline(std::span<const ResponsePair> data) { return fit_ols(data); }

RegressionBaselineResult run_regression_baseline(const PowerSystem& sys, const ConsumerModel& oracle_model,
                                                 std::size_t samples, const ExperimentConfig& config) {
    const DispatchSettings settings = config.dispatch();
    const SedContext ctx =
        SedContext::build(sys, covariance_of(config.uncertainty_model(sys)), settings.adequacy_margin, true);
    ResponseOracle oracle(oracle_model);
    Rng rng(config.exploration_seed());
    std::vector<Vector> points;
    points.reserve(samples);
    for (std::size_t s = 0; s < samples; ++s) {
        Vector p(sys.num_drps());
        for (int j = 0; j < sys.num_drps(); ++j) p(j) = rng.uniform(0.0, ctx.dr_max(j));
        points.push_back(std::move(p));
    }
    const auto data = oracle.collect(points);

    RegressionBaselineResult out;
    out.model = global_regression_baseline(data);
    const SedSolution sol = solve_sed(ctx, out.model.affine(), Vector::Zero(sys.num_drps()),
                                      std::numeric_limits<double>::infinity(), config.qp_options());
    require_optimal(sol, "regression baseline");
    out.decision = sol.decision;
    out.objective = model_objective(ctx, out.model, sol.decision.p_rd, nullptr, config.qp_options());
    return out;
}

std::vector<MethodStats> compare_surrogates(const PowerSystem& sys, const ExperimentConfig& config,
                                            std::span<const std::uint64_t> seeds, std::size_t regression_samples) {
    using clock = std::chrono::steady_clock;
    MethodStats cleo{"cleo", {}, {}, 0.0, 0.0, 0.0};
    MethodStats linreg{"linear_regression", {}, {}, 0.0, 0.0, 0.0};
    for (const std::uint64_t seed : seeds) {
        ExperimentConfig cfg = config;
        cfg.set_seed(seed);
        const ConsumerModel world = cfg.consumer_model(sys);

        auto t0 = clock::now();
        const CaseResult c1 = run_case(sys, world, CaseId::endogenous, cfg);
        cleo.mean_seconds += std::chrono::duration<double>(clock::now() - t0).count();
        cleo.objectives.push_back(c1.objective);
        cleo.dr_totals.push_back(c1.dr_commitment_total);

        t0 = clock::now();
        const RegressionBaselineResult lr = run_regression_baseline(sys, world, regression_samples, cfg);
        linreg.mean_seconds += std::chrono::duration<double>(clock::now() - t0).count();
        linreg.objectives.push_back(lr.objective);
        linreg.dr_totals.push_back(lr.decision.p_rd.sum());
    }
    for (MethodStats* m : {&cleo, &linreg}) {
        const double n = static_cast<double>(m->objectives.size());
        if (n == 0) continue;
        m->mean_objective = std::accumulate(m->objectives.begin(), m->objectives.end(), 0.0) / n;
        double ss = 0.0;
        for (double v : m->objectives) ss += (v - m->mean_objective) * (v - m->mean_objective);
        m->std_objective = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
        m->mean_seconds /= n;
    }
    return {cleo, linreg};
}

namespace {

json to_json(const Vector& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

json to_json(const Matrix& m) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) arr.push_back(to_json(Vector(m.row(i).transpose())));
    return arr;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

json summary_json(const CaseResult& r, const PowerSystem& sys, const ExperimentConfig& config) {
    json out;
    out["schema"] = 1;
    out["system"] = sys.name;
    out["base_mva"] = sys.base_mva;
    out["scenario"] = to_string(r.case_id);
    out["seed"] = config.seed();
    out["samples"] = config.dispatch().samples;
    out["objective"] = r.objective;
    out["cost"] = {{"expected", r.evaluation.expected_cost},
                   {"generation", r.evaluation.gen_cost},
                   {"variance", r.evaluation.variance_cost},
                   {"dr", r.evaluation.dr_cost}};
    out["dr_commitment_total"] = r.dr_commitment_total;

    json drps = json::array();
    for (int j = 0; j < sys.num_drps(); ++j) {
        drps.push_back({{"bus", sys.buses[sys.drps[j].bus].label},
                        {"accepted", r.decision.p_rd(j)},
                        {"expected_response", r.dr_expected_response(j)},
                        {"dr_max", dr_max(sys.drps[j])}});
    }
    out["dr_commitments"] = drps;

    json gens = json::array();
    for (int i = 0; i < sys.num_generators(); ++i) {
        gens.push_back({{"bus", sys.buses[sys.generators[i].bus].label}, {"p_g_base", r.decision.p_g_base(i)}});
    }
    out["dispatch"] = gens;

    json at_zero = json::array();
    for (const auto& v : r.evaluation.constraint_violations) at_zero.push_back({{"constraint", v.id()}, {"magnitude", v.magnitude}});
    out["violations"] = {{"at_zero_deviation", at_zero},
                         {"samples", r.violations.samples},
                         {"rate",
                          {{"energy_adequacy", r.violations.adequacy},
                           {"line_flow", r.violations.line_flow},
                           {"generation_limit", r.violations.generation},
                           {"dr_limit", r.violations.dr_limit},
                           {"any", r.violations.any}}}};

    out["termination"] = to_string(r.termination);
    out["iterations"] = r.history.size();
    out["oracle_calls"] = r.oracle_calls;
    if (r.model) {
        out["model"] = {{"a1", to_json(r.model->a1_hat)},
                        {"a0", to_json(r.model->a0_hat)},
                        {"residual_count", r.model->residuals.size()}};
    }
    return out;
}

std::string convergence_csv(std::span<const IterationRecord> history) {
    std::string out = "iter,objective,radius,rho,accepted\n";
    for (const auto& rec : history) {
        out += std::to_string(rec.iter) + "," + format_double(rec.objective) + "," + format_double(rec.radius) + "," +
               format_double(rec.rho) + "," + (rec.accepted ? "1" : "0") + "\n";
    }
    return out;
}

}  // namespace dcleo
