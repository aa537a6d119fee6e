// dispatch-cleo: run dispatch cases, parameter sweeps and surrogate comparisons.
//
// Exit codes: 0 ok, 1 bad input (flags, case file, config), 2 solver failure.

#include "dcleo/baseline.hpp"
#include "dcleo/config.hpp"
#include "dcleo/error.hpp"
#include "dcleo/netmodel.hpp"
#include "dcleo/sed_qp.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cctype>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace dcleo;

namespace {

struct RunArgs {
    std::string case_path;
    std::string scenario = "case1";
    std::uint64_t seed = 0;
    std::size_t samples = 1000;
    std::string out_dir = ".";
    std::string config_path;
    std::vector<std::string> sets;
    bool dump_qp = false;
};

void add_run_flags(CLI::App* cmd, RunArgs& a, bool need_out) {
    cmd->add_option("--case", a.case_path, "case file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--scenario", a.scenario, "case1 | case2 | case3")->check(CLI::IsMember({"case1", "case2", "case3"}));
    cmd->add_option("--seed", a.seed, "master seed");
    cmd->add_option("--samples", a.samples, "RES scenarios for cost evaluation and violation rates");
    auto* out = cmd->add_option("--out", a.out_dir, "output directory");
    if (need_out) out->required();
    cmd->add_option("--config", a.config_path, "JSON config file");
    cmd->add_option("--set", a.sets, "override a config key, key=value");
    cmd->add_flag("--dump-qp", a.dump_qp, "also write the assembled dispatch program");
}

ExperimentConfig build_config(const RunArgs& a) {
    ExperimentConfig cfg = a.config_path.empty() ? ExperimentConfig{} : ExperimentConfig::load(a.config_path);
    cfg.set("seed", a.seed);
    cfg.set("dispatch.samples", a.samples);
    for (const auto& s : a.sets) cfg.set_assignment(s);
    return cfg;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

/// The dispatch program a case ends on, assembled without the ball.
QpProblem final_program(const PowerSystem& sys, const CaseResult& r, const ExperimentConfig& cfg) {
    const DispatchSettings settings = cfg.dispatch();
    const bool variance = r.case_id != CaseId::deterministic;
    const SedContext ctx =
        SedContext::build(sys, covariance_of(cfg.uncertainty_model(sys)), settings.adequacy_margin, variance);
    const AffineResponse model = r.model ? r.model->affine() : AffineResponse::identity(sys.num_drps());
    return assemble_sed_qp(ctx, model, r.decision.p_rd);
}

CaseResult run_one(const PowerSystem& sys, const RunArgs& a, const ExperimentConfig& cfg, const fs::path& out_dir) {
    const auto t0 = std::chrono::steady_clock::now();
    const CaseResult r = run_case(sys, cfg.consumer_model(sys), parse_case_id(a.scenario), cfg);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    fs::create_directories(out_dir);
    write_file(out_dir / "summary.json", summary_json(r, sys, cfg).dump(2) + "\n");
    write_file(out_dir / "convergence.csv", convergence_csv(r.history));
    if (a.dump_qp) {
        std::ofstream qp(out_dir / "problem.qp");
        write_qp(qp, final_program(sys, r, cfg));
    }
    std::printf("%s %s: objective %.6f, DR %.6f pu, %zu iterations, %s, %.3f s\n", sys.name.c_str(),
                a.scenario.c_str(), r.objective, r.dr_commitment_total, r.history.size(),
                to_string(r.termination).c_str(), seconds);
    return r;
}

std::string sanitize(std::string s) {
    for (char& c : s) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '-' && c != '_') c = '_';
    }
    return s;
}

int guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const SolverError& e) {
        std::cerr << "solver failure [" << e.stage() << "]: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Economic dispatch with learned demand response"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "run one case and write summary.json and convergence.csv");
    add_run_flags(run, run_args, true);

    RunArgs sweep_args;
    std::string sweep_param;
    std::vector<std::string> sweep_values;
    auto* sweep = app.add_subcommand("sweep", "repeat a run over values of one config key");
    add_run_flags(sweep, sweep_args, true);
    sweep->add_option("--param", sweep_param, "dotted config key")->required();
    sweep->add_option("--values", sweep_values, "values (JSON or plain strings)")->required();

    std::string validate_path;
    auto* validate_cmd = app.add_subcommand("validate", "load and check a case file");
    validate_cmd->add_option("--case", validate_path, "case file")->required();

    RunArgs dump_args;
    std::string dump_out;
    auto* dump = app.add_subcommand("dump-qp", "print the dispatch program a case ends on");
    add_run_flags(dump, dump_args, false);
    dump->add_option("--file", dump_out, "write here instead of stdout");

    RunArgs cmp_args;
    int cmp_seeds = 20;
    std::size_t cmp_samples = 1000;
    auto* compare = app.add_subcommand("compare", "CLEO against a global linear regression over many seeds");
    add_run_flags(compare, cmp_args, false);
    compare->add_option("--seeds", cmp_seeds, "number of seeds, starting at --seed");
    compare->add_option("--regression-samples", cmp_samples, "oracle queries for the regression fit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (*run) {
        return guarded([&] {
            const PowerSystem sys = load_case(run_args.case_path);
            run_one(sys, run_args, build_config(run_args), run_args.out_dir);
            return 0;
        });
    }
    if (*sweep) {
        return guarded([&] {
            const PowerSystem sys = load_case(sweep_args.case_path);
            const fs::path root = sweep_args.out_dir;
            fs::create_directories(root);
            std::string csv = "value,objective,dr_commitment_total,iterations,termination\n";
            for (std::size_t i = 0; i < sweep_values.size(); ++i) {
                ExperimentConfig cfg = build_config(sweep_args);
                cfg.set_assignment(sweep_param + "=" + sweep_values[i]);
                char prefix[16];
                std::snprintf(prefix, sizeof prefix, "%03zu_", i);
                const CaseResult r = run_one(sys, sweep_args, cfg, root / (prefix + sanitize(sweep_values[i])));
                char row[256];
                std::snprintf(row, sizeof row, ",%.17g,%.17g,%zu,%s\n", r.objective, r.dr_commitment_total,
                              r.history.size(), to_string(r.termination).c_str());
                csv += "\"" + sweep_values[i] + "\"" + row;
            }
            write_file(root / "sweep.csv", csv);
            return 0;
        });
    }
    if (*validate_cmd) {
        return guarded([&] {
            const PowerSystem sys = load_case(validate_path);
            std::printf("%s: ok (%d buses, %d lines, %d generators, %d RES, %d DRPs, load %.4f pu)\n",
                        sys.name.c_str(), sys.num_buses(), sys.num_lines(), sys.num_generators(), sys.num_res(),
                        sys.num_drps(), sys.total_load());
            return 0;
        });
    }
    if (*dump) {
        return guarded([&] {
            const PowerSystem sys = load_case(dump_args.case_path);
            const ExperimentConfig cfg = build_config(dump_args);
            const CaseResult r = run_case(sys, cfg.consumer_model(sys), parse_case_id(dump_args.scenario), cfg);
            const QpProblem qp = final_program(sys, r, cfg);
            if (dump_out.empty()) {
                write_qp(std::cout, qp);
            } else {
                std::ofstream out(dump_out);
                write_qp(out, qp);
            }
            return 0;
        });
    }
    if (*compare) {
        return guarded([&] {
            const PowerSystem sys = load_case(cmp_args.case_path);
            const ExperimentConfig cfg = build_config(cmp_args);
            std::vector<std::uint64_t> seeds;
            for (int i = 0; i < cmp_seeds; ++i) seeds.push_back(cmp_args.seed + static_cast<std::uint64_t>(i));
            const auto stats = compare_surrogates(sys, cfg, seeds, cmp_samples);
            std::printf("%-18s %16s %16s %12s\n", "method", "mean objective", "std objective", "mean time s");
            for (const auto& m : stats) {
                std::printf("%-18s %16.6f %16.6f %12.4f\n", m.method.c_str(), m.mean_objective, m.std_objective,
                            m.mean_seconds);
            }
            return 0;
        });
    }
    return 1;
}
