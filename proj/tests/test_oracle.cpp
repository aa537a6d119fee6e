#include "dcleo/error.hpp"
#include "dcleo/oracle.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace dcleo;

namespace {

ConsumerModel affine(double a1, int n, double noise = 0.0, std::uint64_t seed = 1) {
    ConsumerModel m;
    m.a1_true = a1 * Matrix::Identity(n, n);
    m.a0_true = Vector::Zero(n);
    m.noise_std = Vector::Constant(n, noise);
    m.seed = seed;
    return m;
}

Vector vec2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

}  // namespace

TEST_CASE("noiseless responses are the affine map") {
    ResponseOracle partial(affine(0.8, 2));
    const Vector r = partial.respond(vec2(10, 5));
    CHECK(r(0) == doctest::Approx(8.0));
    CHECK(r(1) == doctest::Approx(4.0));

    ResponseOracle exogenous(affine(1.0, 2));
    CHECK(exogenous.respond(vec2(0.3, 0.7)) == vec2(0.3, 0.7));
}

TEST_CASE("noiseless responses preserve convex combinations") {
    ConsumerModel m = affine(0.0, 3);
    m.a1_true << 0.7, 0.1, 0.0, -0.2, 0.9, 0.05, 0.0, 0.3, 0.6;
    m.a0_true << 0.01, -0.02, 0.03;
    ResponseOracle o(m);
    Rng rng(4);
    for (int t = 0; t < 500; ++t) {
        Vector x(3), y(3);
        for (int j = 0; j < 3; ++j) {
            x(j) = rng.uniform(0, 2);
            y(j) = rng.uniform(0, 2);
        }
        const double lam = rng.uniform();
        const Vector lhs = o.respond(lam * x + (1 - lam) * y);
        const Vector rhs = lam * o.respond(x) + (1 - lam) * o.respond(y);
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("noise averages out at the CLT rate") {
    const double sigma = 0.05;
    ResponseOracle o(affine(0.8, 1, sigma, 9));
    const Vector p = Vector::Constant(1, 0.5);
    const int n = 100000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += o.respond(p)(0);
    CHECK(std::abs(sum / n - 0.4) <= 4.0 * sigma / std::sqrt(static_cast<double>(n)));
    CHECK(o.calls() == static_cast<std::size_t>(n));
}

TEST_CASE("collect") {
    ResponseOracle o(affine(0.8, 2));
    CHECK_THROWS_AS(o.collect({}), std::invalid_argument);
    const std::vector<Vector> one{vec2(1, 2)};
    const auto pairs = o.collect(one);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].p_rd == vec2(1, 2));
    CHECK(pairs[0].p_rd_enu.isApprox(vec2(0.8, 1.6)));

    std::vector<Vector> many;
    for (int i = 0; i < 20; ++i) many.push_back(vec2(0.1 * i, 0.05 * i));
    ResponseOracle a(affine(0.8, 2, 0.1, 77));
    ResponseOracle b(affine(0.8, 2, 0.1, 77));
    const auto ra = a.collect(many);
    const auto rb = b.collect(many);
    for (std::size_t i = 0; i < many.size(); ++i) CHECK(ra[i].p_rd_enu == rb[i].p_rd_enu);
}

TEST_CASE("clipping keeps responses inside [0, dr_max]") {
    ConsumerModel m = affine(1.0, 1, 0.5, 3);
    m.clip = true;
    m.clip_max = Vector::Constant(1, 0.6);
    ResponseOracle o(m);
    for (int i = 0; i < 1000; ++i) {
        const double r = o.respond(Vector::Constant(1, 0.3))(0);
        CHECK(r >= 0.0);
        CHECK(r <= 0.6);
    }
}

TEST_CASE("model validation") {
    ConsumerModel m = affine(0.8, 2);
    m.noise_std(1) = -1.0;
    CHECK_THROWS_AS(ResponseOracle{m}, ValidationError);
    ConsumerModel wrong = affine(0.8, 2);
    wrong.a0_true = Vector::Zero(3);
    CHECK_THROWS_AS(ResponseOracle{wrong}, ValidationError);
}
