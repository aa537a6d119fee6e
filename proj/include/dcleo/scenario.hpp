#pragma once

#include "dcleo/netmodel.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace dcleo {

enum class Distribution { uniform, truncnormal };

/// One draw of RES forecast deviations, pu, one entry per RES unit.
struct ResScenario {
    Vector zeta;
};

/// Zero-mean RES forecast error model.
///
/// Each deviation lives on [-P_R r/100, +P_R r/100]. `uniform` draws on the
/// whole interval; `truncnormal` uses sigma = half-width / 2 truncated at the
/// interval ends. Units are sampled independently. An explicit covariance, if
/// supplied, replaces the independent one in every cost computation but does
/// not change how scenarios are drawn.
struct UncertaintyModel {
    std::vector<ResUnit> res_units;
    std::optional<Matrix> covariance;
    std::uint64_t seed = 0;
    Distribution distribution = Distribution::uniform;
};

/// The index-th scenario of the model's stream; a pure function of (seed, index).
ResScenario sample_scenario(const UncertaintyModel& model, std::uint64_t index);

/// Scenarios [first, first + n) of the stream.
std::vector<ResScenario> sample_scenarios(const UncertaintyModel& model, std::size_t n, std::uint64_t first = 0);

/// Covariance of the deviation vector. Throws ValidationError when a
/// supplied matrix has the wrong size or is not symmetric PSD.
Matrix covariance_of(const UncertaintyModel& model);

/// a'_i = (sum of all entries of lambda) * a_i.
Vector variance_cost_coeffs(const PowerSystem& sys, const Matrix& lambda);

Distribution parse_distribution(const std::string& name);
std::string to_string(Distribution d);

}  // namespace dcleo
