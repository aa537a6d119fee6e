#include "dcleo/config.hpp"

#include "dcleo/dispatch.hpp"
#include "dcleo/error.hpp"
#include "dcleo/rng.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

namespace dcleo {

using nlohmann::json;

namespace {

constexpr std::array kKnownKeys = {
    "seed",
    "uncertainty.distribution", "uncertainty.covariance", "uncertainty.seed",
    "dispatch.adequacy_margin", "dispatch.analytic_expectation", "dispatch.samples",
    "oracle.a1", "oracle.a0", "oracle.noise_std", "oracle.noise_frac", "oracle.clip", "oracle.seed",
    "cleo.delta0", "cleo.delta_min", "cleo.delta_max", "cleo.eta1", "cleo.gamma_shrink", "cleo.gamma_grow",
    "cleo.max_iters", "cleo.batch", "cleo.tol", "cleo.window_scale",
    "qp.tol",
};

bool known(const std::string& key) {
    return std::find(kKnownKeys.begin(), kKnownKeys.end(), key) != kKnownKeys.end();
}

json::json_pointer pointer_of(const std::string& dotted) {
    std::string path = "/" + dotted;
    std::replace(path.begin(), path.end(), '.', '/');
    return json::json_pointer(path);
}

void collect_leaves(const json& node, const std::string& prefix, std::vector<std::pair<std::string, json>>& out) {
    if (node.is_object()) {
        for (auto it = node.begin(); it != node.end(); ++it) {
            const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
            if (known(key)) {
                out.emplace_back(key, it.value());
            } else {
                collect_leaves(it.value(), key, out);
            }
        }
        return;
    }
    throw ParseError("unknown config key '" + prefix + "'");
}

double number(const json& v, const std::string& key) {
    if (!v.is_number()) throw ParseError("config key '" + key + "' must be a number");
    return v.get<double>();
}

std::uint64_t unsigned_integer(const json& v, const std::string& key) {
    if (!v.is_number_integer() || v.get<long long>() < 0) {
        throw ParseError("config key '" + key + "' must be a nonnegative integer");
    }
    return v.get<std::uint64_t>();
}

bool boolean(const json& v, const std::string& key) {
    if (!v.is_boolean()) throw ParseError("config key '" + key + "' must be true or false");
    return v.get<bool>();
}

/// Scalar s -> s * I, or a full n x n array.
Matrix square_matrix(const json& v, int n, const std::string& key) {
    if (v.is_number()) return v.get<double>() * Matrix::Identity(n, n);
    if (!v.is_array() || static_cast<int>(v.size()) != n) {
        throw ParseError("config key '" + key + "' must be a number or a " + std::to_string(n) + "x" +
                         std::to_string(n) + " array");
    }
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) {
        if (!v[i].is_array() || static_cast<int>(v[i].size()) != n) {
            throw ParseError("config key '" + key + "' row " + std::to_string(i) + " has wrong length");
        }
        for (int j = 0; j < n; ++j) m(i, j) = number(v[i][j], key);
    }
    return m;
}

/// Scalar broadcast or an array of length n.
Vector vector_of(const json& v, int n, const std::string& key) {
    if (v.is_number()) return Vector::Constant(n, v.get<double>());
    if (!v.is_array() || static_cast<int>(v.size()) != n) {
        throw ParseError("config key '" + key + "' must be a number or an array of length " + std::to_string(n));
    }
    Vector out(n);
    for (int i = 0; i < n; ++i) out(i) = number(v[i], key);
    return out;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const json& tree) {
    if (!tree.is_object()) throw ParseError("config must be a JSON object");
    std::vector<std::pair<std::string, json>> leaves;
    collect_leaves(tree, "", leaves);
    ExperimentConfig config;
    for (const auto& [key, value] : leaves) config.set(key, value);
    return config;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string() + ": cannot open config file");
    std::ostringstream buf;
    buf << in.rdbuf();
    json tree;
    try {
        tree = json::parse(buf.str());
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": malformed config (" + e.what() + ")");
    }
    return from_json(tree);
}

void ExperimentConfig::set(const std::string& dotted_key, const json& value) {
    if (!known(dotted_key)) throw ParseError("unknown config key '" + dotted_key + "'");
    tree_[pointer_of(dotted_key)] = value;
}

void ExperimentConfig::set_assignment(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ParseError("expected key=value, got '" + assignment + "'");
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    set(key, value);
}

const json* ExperimentConfig::find(const std::string& dotted_key) const {
    const auto ptr = pointer_of(dotted_key);
    return tree_.contains(ptr) ? &tree_.at(ptr) : nullptr;
}

std::uint64_t ExperimentConfig::seed() const {
    const json* v = find("seed");
    return v ? unsigned_integer(*v, "seed") : 0;
}

std::uint64_t ExperimentConfig::exploration_seed() const { return derive_seed(seed(), "exploration"); }

DispatchSettings ExperimentConfig::dispatch() const {
    DispatchSettings s;
    if (const json* v = find("dispatch.adequacy_margin")) s.adequacy_margin = number(*v, "dispatch.adequacy_margin");
    if (const json* v = find("dispatch.analytic_expectation")) {
        s.analytic_expectation = boolean(*v, "dispatch.analytic_expectation");
    }
    if (const json* v = find("dispatch.samples")) {
        s.samples = static_cast<std::size_t>(unsigned_integer(*v, "dispatch.samples"));
        if (s.samples == 0) throw ParseError("dispatch.samples must be at least 1");
    }
    return s;
}

UncertaintyModel ExperimentConfig::uncertainty_model(const PowerSystem& sys) const {
    UncertaintyModel model;
    model.res_units = sys.res_units;
    model.seed = derive_seed(seed(), "scenarios");
    if (const json* v = find("uncertainty.seed")) model.seed = unsigned_integer(*v, "uncertainty.seed");
    if (const json* v = find("uncertainty.distribution")) {
        if (!v->is_string()) throw ParseError("uncertainty.distribution must be a string");
        model.distribution = parse_distribution(v->get<std::string>());
    }
    if (const json* v = find("uncertainty.covariance")) {
        model.covariance = square_matrix(*v, sys.num_res(), "uncertainty.covariance");
    }
    return model;
}

ConsumerModel ExperimentConfig::consumer_model(const PowerSystem& sys) const {
    const int n = sys.num_drps();
    ConsumerModel model = default_consumer_model(sys, derive_seed(seed(), "oracle"));
    if (const json* v = find("oracle.seed")) model.seed = unsigned_integer(*v, "oracle.seed");
    if (const json* v = find("oracle.a1")) model.a1_true = square_matrix(*v, n, "oracle.a1");
    if (const json* v = find("oracle.a0")) model.a0_true = vector_of(*v, n, "oracle.a0");
    if (const json* v = find("oracle.noise_frac")) {
        const double frac = number(*v, "oracle.noise_frac");
        for (int j = 0; j < n; ++j) model.noise_std(j) = frac * sys.drps[j].p_base;
    }
    if (const json* v = find("oracle.noise_std")) model.noise_std = vector_of(*v, n, "oracle.noise_std");
    if (const json* v = find("oracle.clip")) model.clip = boolean(*v, "oracle.clip");
    model.validate();
    return model;
}

CleoConfig ExperimentConfig::cleo_config(const PowerSystem& sys) const {
    CleoConfig c = default_cleo_config(sys);
    auto num = [&](const char* key, double& field) {
        if (const json* v = find(key)) field = number(*v, key);
    };
    auto integer = [&](const char* key, int& field) {
        if (const json* v = find(key)) field = static_cast<int>(unsigned_integer(*v, key));
    };
    num("cleo.delta0", c.delta0);
    num("cleo.delta_min", c.delta_min);
    num("cleo.delta_max", c.delta_max);
    num("cleo.eta1", c.eta1);
    num("cleo.gamma_shrink", c.gamma_shrink);
    num("cleo.gamma_grow", c.gamma_grow);
    integer("cleo.max_iters", c.max_iters);
    integer("cleo.batch", c.batch);
    num("cleo.tol", c.tol);
    num("cleo.window_scale", c.window_scale);
    c.validate();
    return c;
}

QpOptions ExperimentConfig::qp_options() const {
    QpOptions o;
    if (const json* v = find("qp.tol")) o.tol = number(*v, "qp.tol");
    return o;
}

}  // namespace dcleo
