#pragma once

#include "dcleo/cleo.hpp"
#include "dcleo/config.hpp"
#include "dcleo/dispatch.hpp"
#include "dcleo/oracle.hpp"

#include <json.hpp>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dcleo {

/// 1: learned endogenous response with RES uncertainty; 2: deterministic,
/// identity response, no RES uncertainty; 3: RES uncertainty only.
enum class CaseId { endogenous = 1, deterministic = 2, exogenous = 3 };

CaseId parse_case_id(const std::string& name);  // "case1" | "case2" | "case3"
std::string to_string(CaseId id);

struct CaseResult {
    CaseId case_id = CaseId::deterministic;
    Decision decision;
    DispatchEvaluation evaluation;
    double objective = 0.0;
    double dr_commitment_total = 0.0;
    Vector dr_expected_response;  // response mean the case planned with
    std::vector<IterationRecord> history;
    Termination termination = Termination::direct;
    std::optional<LlrModel> model;
    ViolationReport violations;
    std::size_t oracle_calls = 0;
};

/// Runs one comparison case. Throws SolverError when the dispatch program
/// is infeasible.
CaseResult run_case(const PowerSystem& sys, const ConsumerModel& oracle_model, CaseId case_id,
                    const ExperimentConfig& config);

/// One OLS fit over every pair, no locality and no trust region.
LlrModel global_regression_baseline(std::span<const ResponsePair> data);

struct RegressionBaselineResult {
    Decision decision;
    double objective = 0.0;
    LlrModel model;
};

/// Samples `samples` commitments uniformly on [0, dr_max], queries the
/// oracle, fits the global model and solves the full dispatch program once.
RegressionBaselineResult run_regression_baseline(const PowerSystem& sys, const ConsumerModel& oracle_model,
                                                 std::size_t samples, const ExperimentConfig& config);

struct MethodStats {
    std::string method;
    std::vector<double> objectives;
    std::vector<double> dr_totals;
    double mean_objective = 0.0;
    double std_objective = 0.0;
    double mean_seconds = 0.0;
};

/// CLEO (case 1) against the global regression baseline over a list of seeds.
std::vector<MethodStats> compare_surrogates(const PowerSystem& sys, const ExperimentConfig& config,
                                            std::span<const std::uint64_t> seeds, std::size_t regression_samples);

/// summary.json body (schema 1).
nlohmann::json summary_json(const CaseResult& result, const PowerSystem& sys, const ExperimentConfig& config);

/// convergence.csv: header plus one row per history record.
std::string convergence_csv(std::span<const IterationRecord> history);

}  // namespace dcleo
