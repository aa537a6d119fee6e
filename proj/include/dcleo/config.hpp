#pragma once

#include "dcleo/cleo.hpp"
#include "dcleo/netmodel.hpp"
#include "dcleo/oracle.hpp"
#include "dcleo/qp.hpp"
#include "dcleo/scenario.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>

namespace dcleo {

struct DispatchSettings {
    double adequacy_margin = 0.0;
    bool analytic_expectation = true;
    std::size_t samples = 1000;
};

/// Experiment settings as a nested key-value tree.
///
/// Recognized keys (dotted form): seed; uncertainty.{distribution,
/// covariance, seed}; dispatch.{adequacy_margin, analytic_expectation,
/// samples}; oracle.{a1, a0, noise_std, noise_frac, clip, seed};
/// cleo.{delta0, delta_min, delta_max, eta1, gamma_shrink, gamma_grow,
/// max_iters, batch, tol, window_scale}; qp.tol. Unknown keys are rejected.
///
/// Every random stream derives from `seed` unless its own seed key is set.
class ExperimentConfig {
public:
    ExperimentConfig() : tree_(nlohmann::json::object()) {}

    static ExperimentConfig from_json(const nlohmann::json& tree);
    static ExperimentConfig load(const std::filesystem::path& path);

    /// Sets a dotted key; throws ParseError for unknown keys.
    void set(const std::string& dotted_key, const nlohmann::json& value);
    /// "key=value" where value is JSON if it parses as JSON, else a string.
    void set_assignment(const std::string& assignment);

    const nlohmann::json& tree() const { return tree_; }

    std::uint64_t seed() const;
    void set_seed(std::uint64_t seed) { set("seed", seed); }

    DispatchSettings dispatch() const;
    UncertaintyModel uncertainty_model(const PowerSystem& sys) const;
    ConsumerModel consumer_model(const PowerSystem& sys) const;
    CleoConfig cleo_config(const PowerSystem& sys) const;
    QpOptions qp_options() const;
    std::uint64_t exploration_seed() const;

private:
    const nlohmann::json* find(const std::string& dotted_key) const;

    nlohmann::json tree_;
};

}  // namespace dcleo
