#include "dcleo/dispatch.hpp"

#include "dcleo/error.hpp"
#include "dcleo/parallel.hpp"

#include <algorithm>
#include <stdexcept>

namespace dcleo {

AffineResponse AffineResponse::identity(int n_drp) {
    return {Matrix::Identity(n_drp, n_drp), Vector::Zero(n_drp)};
}

std::string Violation::id() const {
    switch (kind) {
        case ConstraintKind::adequacy:
            return "energy_adequacy";
        case ConstraintKind::line_flow:
            return "line_flow[" + std::to_string(index) + "]";
        case ConstraintKind::generation:
            return "generation_limit[" + std::to_string(index) + "]";
        case ConstraintKind::dr_limit:
            return "dr_limit[" + std::to_string(index) + "]";
    }
    return "unknown";
}

ResponseFn identity_response() {
    return [](const Vector& p_rd, std::size_t) { return p_rd; };
}

Vector participation_factors(const PowerSystem& sys) {
    Vector inv(sys.num_generators());
    for (int i = 0; i < sys.num_generators(); ++i) {
        const double a = sys.generators[i].a;
        if (!(a > 0.0)) throw ValidationError("generator " + std::to_string(i) + ": a must be positive");
        inv(i) = 1.0 / a;
    }
    return inv / inv.sum();
}

Vector recourse_generation(const Decision& d, const Vector& alpha, const ResScenario& zeta) {
    return d.p_g_base - alpha * zeta.zeta.sum();
}

double generation_cost(const Vector& p_g, const PowerSystem& sys) {
    double cost = 0.0;
    for (int i = 0; i < sys.num_generators(); ++i) {
        const auto& g = sys.generators[i];
        cost += g.a * p_g(i) * p_g(i) + g.b * p_g(i);
    }
    return cost;
}

double dr_max(const Drp& drp) {
    if (!(drp.pi_max > drp.pi_rr)) throw ValidationError("drp: pi_max must exceed pi_rr");
    return std::min(drp.p_base, drp.pi_s / (drp.pi_max - drp.pi_rr) * drp.p_base);
}

Vector dr_max(const PowerSystem& sys) {
    Vector out(sys.num_drps());
    for (int j = 0; j < sys.num_drps(); ++j) out(j) = dr_max(sys.drps[j]);
    return out;
}

DispatchEvaluation expected_cost(const Decision& d, const PowerSystem& sys, const Vector& alpha,
                                 const Vector& a_prime, const ResponseFn& response,
                                 std::span<const ResScenario> scenarios, bool analytic) {
    if (scenarios.empty()) throw std::invalid_argument("expected_cost: empty scenario set");
    const std::size_t n = scenarios.size();

    Vector prices(sys.num_drps());
    for (int j = 0; j < sys.num_drps(); ++j) prices(j) = sys.drps[j].pi_dr;

    std::vector<double> dr_terms(n);
    std::vector<double> gen_terms(analytic ? 0 : n);
    parallel_for(n, [&](std::size_t s) {
        dr_terms[s] = prices.dot(response(d.p_rd, s));
        if (!analytic) gen_terms[s] = generation_cost(recourse_generation(d, alpha, scenarios[s]), sys);
    });

    DispatchEvaluation eval;
    eval.gen_cost = generation_cost(d.p_g_base, sys);
    if (analytic) {
        eval.variance_cost = a_prime.dot(alpha.cwiseProduct(alpha));
    } else {
        eval.variance_cost = pairwise_sum(gen_terms) / static_cast<double>(n) - eval.gen_cost;
    }
    eval.dr_cost = pairwise_sum(dr_terms) / static_cast<double>(n);
    eval.expected_cost = eval.gen_cost + eval.variance_cost + eval.dr_cost;
    return eval;
}

std::vector<Violation> check_constraints(const Decision& d, const PowerSystem& sys, const Vector& alpha,
                                         const Matrix& ptdf, const IncidenceMaps& maps,
                                         const Vector& response_mean, const ResScenario& zeta_eval,
                                         const CheckOptions& options) {
    std::vector<Violation> out;
    const Vector p_g = recourse_generation(d, alpha, zeta_eval);

    // energy adequacy, strict
    const double supply = p_g.sum() + sys.total_res() + response_mean.sum();
    const double excess = supply - sys.total_load() - options.adequacy_margin;
    if (!(excess > 0.0)) out.push_back({ConstraintKind::adequacy, 0, -excess});

    // line flows, accepted DR as injection, RES at nominal plus deviation
    Vector p_res(sys.num_res());
    for (int r = 0; r < sys.num_res(); ++r) p_res(r) = sys.res_units[r].p_nominal + zeta_eval.zeta(r);
    Vector p_load(static_cast<Eigen::Index>(sys.loads.size()));
    for (std::size_t k = 0; k < sys.loads.size(); ++k) p_load(static_cast<Eigen::Index>(k)) = sys.loads[k].p;
    const Vector injection = maps.gen * p_g + maps.drp * d.p_rd + maps.res * p_res - maps.load * p_load;
    const Vector flows = ptdf * injection;
    for (int l = 0; l < sys.num_lines(); ++l) {
        const double over = std::abs(flows(l)) - sys.lines[l].flow_limit;
        if (over > options.tol) out.push_back({ConstraintKind::line_flow, l, over});
    }

    for (int i = 0; i < sys.num_generators(); ++i) {
        const auto& g = sys.generators[i];
        const double over = std::max(g.p_min - p_g(i), p_g(i) - g.p_max);
        if (over > options.tol) out.push_back({ConstraintKind::generation, i, over});
    }

    for (int j = 0; j < sys.num_drps(); ++j) {
        const double over = std::max(-d.p_rd(j), d.p_rd(j) - dr_max(sys.drps[j]));
        if (over > options.tol) out.push_back({ConstraintKind::dr_limit, j, over});
    }
    return out;
}

ViolationReport violation_rates(const Decision& d, const PowerSystem& sys, const Vector& alpha,
                                const Matrix& ptdf, const IncidenceMaps& maps, const Vector& response_mean,
                                std::span<const ResScenario> scenarios, const CheckOptions& options) {
    const std::size_t n = scenarios.size();
    // bit flags per scenario: 1 adequacy, 2 line, 4 generation, 8 dr
    std::vector<unsigned> flags(n, 0);
    parallel_for(n, [&](std::size_t s) {
        for (const auto& v : check_constraints(d, sys, alpha, ptdf, maps, response_mean, scenarios[s], options)) {
            flags[s] |= 1u << static_cast<unsigned>(v.kind);
        }
    });
    ViolationReport report;
    report.samples = n;
    if (n == 0) return report;
    std::size_t counts[5] = {0, 0, 0, 0, 0};
    for (unsigned f : flags) {
        for (unsigned k = 0; k < 4; ++k) counts[k] += (f >> k) & 1u;
        counts[4] += f != 0;
    }
    const double scale = 1.0 / static_cast<double>(n);
    report.adequacy = counts[0] * scale;
    report.line_flow = counts[1] * scale;
    report.generation = counts[2] * scale;
    report.dr_limit = counts[3] * scale;
    report.any = counts[4] * scale;
    return report;
}

}  // namespace dcleo
