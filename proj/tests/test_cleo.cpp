#include "dcleo/cleo.hpp"
#include "dcleo/error.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace dcleo;

namespace {

ConsumerModel affine_world(const PowerSystem& sys, const Matrix& a1, const Vector& a0, double noise,
                           std::uint64_t seed) {
    ConsumerModel m = default_consumer_model(sys, seed);
    m.a1_true = a1;
    m.a0_true = a0;
    m.noise_std = Vector::Constant(a0.size(), noise);
    return m;
}

std::vector<ResponsePair> pairs_from(ResponseOracle& oracle, const std::vector<Vector>& points) {
    return oracle.collect(points);
}

SedContext two_bus_context() {
    return SedContext::build(testsupport::two_bus_system(), Matrix::Zero(0, 0), 0.0, true);
}

LlrModel exact_model(double a1, double a0) {
    return {Matrix::Constant(1, 1, a1), Vector::Constant(1, a0), {}};
}

}  // namespace

TEST_CASE("two points are interpolated exactly") {
    const std::vector<ResponsePair> data{{Vector::Constant(1, 0.0), Vector::Constant(1, 1.0)},
                                         {Vector::Constant(1, 1.0), Vector::Constant(1, 3.0)}};
    const LlrModel m = fit_ols(data);
    CHECK(m.a1_hat(0, 0) == doctest::Approx(2.0));
    CHECK(m.a0_hat(0) == doctest::Approx(1.0));
    for (const auto& e : m.residuals) CHECK(std::abs(e(0)) <= 1e-14);
}

TEST_CASE("noiseless affine data is recovered from N+1 points") {
    Rng rng(21);
    for (int t = 0; t < 50; ++t) {
        const int n = 1 + static_cast<int>(rng.uniform() * 4);
        Matrix a1(n, n);
        Vector a0(n);
        for (int i = 0; i < n; ++i) {
            a0(i) = rng.uniform(-0.1, 0.1);
            for (int j = 0; j < n; ++j) a1(i, j) = rng.uniform(-1, 1);
        }
        PowerSystem dummy;
        dummy.drps.assign(n, {0, 1.0, 300.0, 400.0, 100.0, 100.0});
        ResponseOracle oracle(affine_world(dummy, a1, a0, 0.0, 1));
        std::vector<Vector> points;
        for (int k = 0; k <= n; ++k) {
            Vector p(n);
            for (int j = 0; j < n; ++j) p(j) = rng.uniform(0, 1);
            points.push_back(p);
        }
        const LlrModel m = fit_ols(pairs_from(oracle, points));
        CHECK((m.a1_hat - a1).cwiseAbs().maxCoeff() <= 1e-8);
        CHECK((m.a0_hat - a0).cwiseAbs().maxCoeff() <= 1e-8);
    }
}

TEST_CASE("degenerate designs are rejected") {
    std::vector<ResponsePair> same(5, {Vector::Constant(2, 0.3), Vector::Constant(2, 0.2)});
    CHECK_THROWS_AS(fit_ols(same), SolverError);
    CHECK_THROWS_AS(fit_ols(std::span(same).first(2)), SolverError);
}

TEST_CASE("residual properties with noise") {
    const PowerSystem sys = load_case(testsupport::data_file("ieee14.case"));
    ResponseOracle oracle(default_consumer_model(sys, 3));
    Rng rng(3);
    std::vector<Vector> points;
    for (int k = 0; k < 40; ++k) points.push_back(Vector::NullaryExpr(2, [&](Eigen::Index) { return rng.uniform(0, 0.6); }));
    const auto data = oracle.collect(points);
    const LlrModel m = fit_ols(data);
    CHECK(m.residuals.size() == data.size());
    CHECK(m.mean_residual().cwiseAbs().maxCoeff() <= 1e-10);
    for (std::size_t i = 0; i < data.size(); ++i) {
        CHECK((surrogate(m, data[i].p_rd, m.residuals[i]) - data[i].p_rd_enu).cwiseAbs().maxCoeff() <= 1e-12);
    }
    CHECK(surrogate(m, data[0].p_rd, Vector::Zero(2)) == m.predict(data[0].p_rd));
    const ResponseFn fn = surrogate_response(m);
    CHECK(fn(data[3].p_rd, 3).isApprox(data[3].p_rd_enu));
    CHECK(fn(data[3].p_rd, 3 + m.residuals.size()).isApprox(data[3].p_rd_enu));
}

TEST_CASE("local fit uses the window and falls back to recent pairs") {
    // slope 1 far away, slope 3 near the center
    std::vector<ResponsePair> data;
    for (int k = 0; k < 10; ++k) {
        const double x = 5.0 + 0.1 * k;
        data.push_back({Vector::Constant(1, x), Vector::Constant(1, x)});
    }
    for (int k = 0; k < 10; ++k) {
        const double x = 0.01 * k;
        data.push_back({Vector::Constant(1, x), Vector::Constant(1, 3.0 * x)});
    }
    const LlrModel local = fit_llr(data, Vector::Constant(1, 0.05), 0.05);
    CHECK(local.a1_hat(0, 0) == doctest::Approx(3.0));
    CHECK(local.residuals.size() == 10);

    // nothing near x = 2: the most recent N_DRP + 5 = 6 pairs are used
    const LlrModel fallback = fit_llr(data, Vector::Constant(1, 2.0), 0.01);
    CHECK(fallback.a1_hat(0, 0) == doctest::Approx(3.0));
    CHECK(fallback.residuals.size() == 6);
}

TEST_CASE("subproblem steps") {
    const SedContext ctx = two_bus_context();
    const LlrModel m = exact_model(0.8, 0.1);

    SUBCASE("minimizer inside the ball") {
        TrustRegionState st;
        st.center = Vector::Constant(1, 1.0);
        st.radius = 0.5;
        const SubproblemStep s = solve_subproblem(st, m, ctx);
        REQUIRE_FALSE(s.infeasible);
        CHECK(s.candidate.p_rd(0) == doctest::Approx(1.125).epsilon(1e-6));
        CHECK(s.predicted_decrease > 0.0);
    }
    SUBCASE("minimizer outside the ball") {
        TrustRegionState st;
        st.center = Vector::Constant(1, 0.5);
        st.radius = 0.1;
        const SubproblemStep s = solve_subproblem(st, m, ctx);
        CHECK(std::abs(s.step(0)) == doctest::Approx(0.1));
    }
    SUBCASE("flat model") {
        TrustRegionState st;
        st.center = Vector::Constant(1, 0.7);
        st.radius = 0.3;
        const SubproblemStep s = solve_subproblem(st, exact_model(0.0, 0.1), ctx);
        CHECK(s.step.isZero());
        CHECK(s.predicted_decrease == 0.0);
    }
    SUBCASE("already at the minimizer") {
        TrustRegionState st;
        st.center = Vector::Constant(1, 1.125);
        st.radius = 0.3;
        const SubproblemStep s = solve_subproblem(st, m, ctx);
        CHECK(s.step.cwiseAbs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("ratio arithmetic") {
    CHECK(ratio(3.0, 2.0, 2.0) == 0.5);
    CHECK(ratio(3.0, 3.0, 2.0) == 0.0);
    CHECK(std::isnan(ratio(3.0, 2.0, 0.0)));
    CHECK(std::isnan(ratio(3.0, 2.0, -1.0)));
}

TEST_CASE("an exact surrogate gives a unit ratio") {
    const SedContext ctx = two_bus_context();
    const LlrModel m = exact_model(0.8, 0.1);
    TrustRegionState st;
    st.center = Vector::Constant(1, 0.4);
    st.radius = 0.3;
    const SubproblemStep s = solve_subproblem(st, m, ctx);
    const RatioEstimate r = estimate_ratio(ctx, st.center, s.candidate.p_rd, m, m, s.predicted_decrease);
    CHECK(std::abs(r.rho - 1.0) <= 1e-8);
}

TEST_CASE("one DRP, noiseless oracle: CLEO finds the grid optimum") {
    const PowerSystem sys = testsupport::two_bus_system();
    const SedContext ctx = two_bus_context();
    ResponseOracle oracle(affine_world(sys, Matrix::Constant(1, 1, 0.8), Vector::Constant(1, 0.1), 0.0, 1));
    const CleoResult r = run_cleo(ctx, oracle, default_cleo_config(sys), 5, {});
    double best_p = 0.0, best_f = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 2000; ++k) {
        const double p = 1e-3 * k;
        const double f = testsupport::two_bus_cost(sys, 0.8, 0.1, p);
        if (f < best_f) {
            best_f = f;
            best_p = p;
        }
    }
    CHECK(std::abs(r.decision.p_rd(0) - best_p) <= 1e-2);
    CHECK(std::abs(r.decision.p_rd(0) - 1.125) <= 1e-6);
    CHECK(r.termination != Termination::max_iters);
    for (const auto& rec : r.history) {
        if (!std::isnan(rec.rho)) CHECK(std::abs(rec.rho - 1.0) <= 1e-6);
    }
}

TEST_CASE("trust-region invariants on a noisy run") {
    const PowerSystem sys = load_case(testsupport::data_file("ieee14.case"));
    const SedContext ctx = SedContext::build(sys, Matrix::Zero(2, 2), 0.0, true);
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        ResponseOracle oracle(default_consumer_model(sys, seed));
        const CleoConfig cfg = default_cleo_config(sys);
        const CleoResult r = run_cleo(ctx, oracle, cfg, seed, {});
        REQUIRE_FALSE(r.history.empty());
        CHECK(r.dataset_size == r.oracle_calls);
        for (std::size_t k = 0; k < r.history.size(); ++k) {
            const auto& rec = r.history[k];
            CHECK(rec.radius <= cfg.delta_max);
            CHECK(rec.radius >= cfg.delta_min);
            if (rec.accepted) CHECK(rec.step_norm <= rec.radius * (1 + 1e-12));
            if (k > 0) CHECK(rec.best_objective <= r.history[k - 1].best_objective);
            if (k + 1 < r.history.size()) {
                const double next = r.history[k + 1].radius;
                if (rec.accepted) {
                    CHECK(next >= rec.radius);
                } else {
                    CHECK(next < rec.radius);
                }
            }
        }
        CHECK(r.objective == r.history.back().best_objective);
    }
}

TEST_CASE("configuration checks") {
    const PowerSystem sys = load_case(testsupport::data_file("ieee39.case"));
    const CleoConfig d = default_cleo_config(sys);
    CHECK(d.delta_max == doctest::Approx(0.6));
    CHECK(d.delta0 == doctest::Approx(0.15));
    CHECK(d.batch == 3);
    CHECK_NOTHROW(d.validate());
    CleoConfig bad = d;
    bad.eta1 = 1.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = d;
    bad.delta0 = 2.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = d;
    bad.gamma_shrink = 1.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}
