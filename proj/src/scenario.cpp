#include "dcleo/scenario.hpp"

#include "dcleo/error.hpp"
#include "dcleo/rng.hpp"

#include <cmath>
#include <numbers>

namespace dcleo {

namespace {

// Truncation point in standard deviations for the truncnormal family.
constexpr double kTruncBeta = 2.0;

double truncnormal_variance_factor() {
    const double phi = std::exp(-0.5 * kTruncBeta * kTruncBeta) / std::sqrt(2.0 * std::numbers::pi);
    const double mass = std::erf(kTruncBeta / std::numbers::sqrt2);  // 2 Phi(beta) - 1
    return 1.0 - 2.0 * kTruncBeta * phi / mass;
}

}  // namespace

ResScenario sample_scenario(const UncertaintyModel& model, std::uint64_t index) {
    Rng rng(derive_seed(model.seed, index));
    const auto n = static_cast<Eigen::Index>(model.res_units.size());
    ResScenario s{Vector::Zero(n)};
    for (Eigen::Index i = 0; i < n; ++i) {
        const double w = model.res_units[static_cast<std::size_t>(i)].half_width();
        if (model.distribution == Distribution::uniform) {
            s.zeta(i) = rng.uniform(-w, w);
        } else {
            const double sigma = w / kTruncBeta;
            double z;
            do {
                z = rng.normal();
            } while (std::abs(z) > kTruncBeta);
            s.zeta(i) = sigma * z;
        }
    }
    return s;
}

std::vector<ResScenario> sample_scenarios(const UncertaintyModel& model, std::size_t n, std::uint64_t first) {
    std::vector<ResScenario> out;
    out.reserve(n);
    for (std::size_t k = 0; k < n; ++k) out.push_back(sample_scenario(model, first + k));
    return out;
}

Matrix covariance_of(const UncertaintyModel& model) {
    const auto n = static_cast<Eigen::Index>(model.res_units.size());
    if (model.covariance) {
        const Matrix& lambda = *model.covariance;
        if (lambda.rows() != n || lambda.cols() != n) {
            throw ValidationError("covariance must be " + std::to_string(n) + "x" + std::to_string(n));
        }
        const double scale = std::max(1.0, lambda.cwiseAbs().maxCoeff());
        if ((lambda - lambda.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
            throw ValidationError("covariance is not symmetric");
        }
        if (n > 0) {
            Eigen::SelfAdjointEigenSolver<Matrix> eig(lambda, Eigen::EigenvaluesOnly);
            if (eig.eigenvalues().minCoeff() < -1e-12 * scale) {
                throw ValidationError("covariance is not positive semidefinite");
            }
        }
        return lambda;
    }
    const double factor = model.distribution == Distribution::uniform ? 1.0 / 3.0
                                                                        : truncnormal_variance_factor() /
                                                                              (kTruncBeta * kTruncBeta);
    Matrix lambda = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double w = model.res_units[static_cast<std::size_t>(i)].half_width();
        lambda(i, i) = factor * w * w;
    }
    return lambda;
}

Vector variance_cost_coeffs(const PowerSystem& sys, const Matrix& lambda) {
    if (lambda.rows() != sys.num_res() || lambda.cols() != sys.num_res()) {
        throw ValidationError("covariance dimension does not match the number of RES units");
    }
    const double total = lambda.sum();
    Vector a_prime(sys.num_generators());
    for (int i = 0; i < sys.num_generators(); ++i) a_prime(i) = total * sys.generators[i].a;
    return a_prime;
}

Distribution parse_distribution(const std::string& name) {
    if (name == "uniform") return Distribution::uniform;
    if (name == "truncnormal") return Distribution::truncnormal;
    throw ParseError("unknown uncertainty.distribution '" + name + "' (expected uniform or truncnormal)");
}

std::string to_string(Distribution d) { return d == Distribution::uniform ? "uniform" : "truncnormal"; }

}  // namespace dcleo
