#include "dcleo/baseline.hpp"
#include "dcleo/sed_qp.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace dcleo;

TEST_CASE("classic economic dispatch meets equal incremental cost") {
    PowerSystem sys;
    sys.buses = {{0, true, "1"}, {1, false, "2"}};
    sys.lines = {{0, 1, 0.1, 100.0}};
    sys.generators = {{0, 1.0, 10.0, 0.0, 100.0}, {1, 2.0, 5.0, 0.0, 100.0}};
    sys.loads = {{1, 10.0}};
    const SedContext ctx = SedContext::build(sys, Matrix::Zero(0, 0), 0.0, false);
    const SedSolution sol = solve_sed(ctx, AffineResponse::identity(0), Vector::Zero(0));
    REQUIRE(sol.status == QpStatus::optimal);
    // lambda = 2 a_i p_i + b_i for both units and p_1 + p_2 = 10
    const double lambda = 65.0 / 3.0;
    CHECK(sol.decision.p_g_base(0) == doctest::Approx((lambda - 10.0) / 2.0).epsilon(1e-9));
    CHECK(sol.decision.p_g_base(1) == doctest::Approx((lambda - 5.0) / 4.0).epsilon(1e-9));
}

TEST_CASE("identity response without a ball is the exogenous-only program") {
    const PowerSystem sys = load_case(testsupport::data_file("ieee14.case"));
    ExperimentConfig cfg;
    cfg.set_seed(4);
    const CaseResult c3 = run_case(sys, cfg.consumer_model(sys), CaseId::exogenous, cfg);
    const SedContext ctx = SedContext::build(sys, covariance_of(cfg.uncertainty_model(sys)), 0.0, true);
    const SedSolution sol = solve_sed(ctx, AffineResponse::identity(2), Vector::Zero(2));
    REQUIRE(sol.status == QpStatus::optimal);
    CHECK(sol.decision.p_rd == c3.decision.p_rd);
    CHECK(sol.decision.p_g_base == c3.decision.p_g_base);
    // the variance term is a constant in the program
    CHECK(assemble_sed_qp(ctx, AffineResponse::identity(2), Vector::Zero(2)).constant ==
          doctest::Approx(ctx.variance_cost()));
}

TEST_CASE("a zero-slope model decouples DR from adequacy") {
    const PowerSystem sys = load_case(testsupport::data_file("ieee39.case"));
    const SedContext ctx = SedContext::build(sys, Matrix::Zero(3, 3), 0.0, true);
    AffineResponse flat{Matrix::Zero(2, 2), Vector::Constant(2, 0.1)};
    const QpProblem qp = assemble_sed_qp(ctx, flat, Vector::Zero(2));
    CHECK(qp.a_ineq.row(0).tail(2).isZero());
    CHECK(qp.c.tail(2).isZero());
    CHECK(qp.constant == doctest::Approx(2 * 0.1 * sys.drps[0].pi_dr + ctx.variance_cost()));
}

TEST_CASE("ball bounds") {
    const PowerSystem sys = load_case(testsupport::data_file("ieee14.case"));
    const SedContext ctx = SedContext::build(sys, Matrix::Zero(2, 2), 0.0, false);
    Vector center(2);
    center << 0.55, 0.1;
    const QpProblem ball = assemble_sed_qp(ctx, AffineResponse::identity(2), center, 0.2);
    CHECK(ball.lb(2) == doctest::Approx(0.35));
    CHECK(ball.ub(2) == doctest::Approx(0.6));  // clipped at dr_max
    CHECK(ball.lb(3) == 0.0);
    CHECK(ball.ub(3) == doctest::Approx(0.3));
    const QpProblem fixed = assemble_sed_qp(ctx, AffineResponse::identity(2), center, 0.0);
    CHECK(fixed.lb.tail(2) == center);
    CHECK(fixed.ub.tail(2) == center);
    CHECK_THROWS_AS(assemble_sed_qp(ctx, AffineResponse::identity(3), Vector::Zero(3)), std::invalid_argument);
}

TEST_CASE("adequacy holds strictly at the optimum") {
    const PowerSystem sys = load_case(testsupport::data_file("ieee14.case"));
    const SedContext ctx = SedContext::build(sys, Matrix::Zero(2, 2), 0.0, false);
    const SedSolution sol = solve_sed(ctx, AffineResponse::identity(2), Vector::Zero(2));
    REQUIRE(sol.status == QpStatus::optimal);
    const double supply = sol.decision.p_g_base.sum() + sys.total_res() + sol.decision.p_rd.sum();
    CHECK(supply > sys.total_load());
}

TEST_CASE("an overloaded system is infeasible") {
    PowerSystem sys = load_case(testsupport::data_file("ieee14.case"));
    sys.loads[0].p += 5.0;
    const SedContext ctx = SedContext::build(sys, Matrix::Zero(2, 2), 0.0, false);
    CHECK(solve_sed(ctx, AffineResponse::identity(2), Vector::Zero(2)).status == QpStatus::infeasible);
}
