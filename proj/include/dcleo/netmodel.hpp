#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace dcleo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct Bus {
    int id = 0;
    bool is_slack = false;
    std::string label;  // display name, e.g. the IEEE bus number
};

/// DC branch. Positive flow runs from_bus -> to_bus.
struct Line {
    int from_bus = 0;
    int to_bus = 0;
    double reactance = 0.0;   // pu
    double flow_limit = 0.0;  // pu, applied to |flow|
};

/// Quadratic-cost unit, cost = a p^2 + b p with p in pu.
struct Generator {
    int bus = 0;
    double a = 0.0;
    double b = 0.0;
    double p_min = 0.0;
    double p_max = 0.0;
};

/// Renewable unit whose forecast error lies in +-p_nominal * r_pct / 100.
struct ResUnit {
    int bus = 0;
    double p_nominal = 0.0;
    double r_pct = 0.0;

    double half_width() const { return p_nominal * r_pct / 100.0; }
};

/// Demand response provider on a linear aggregated demand curve.
struct Drp {
    int bus = 0;
    double p_base = 0.0;  // pu
    double pi_s = 0.0;    // incentive price to end-consumers, $/pu
    double pi_max = 0.0;  // demand-curve price intercept
    double pi_rr = 0.0;   // retail price
    double pi_dr = 0.0;   // day-ahead offer price
};

struct Load {
    int bus = 0;
    double p = 0.0;
};

/// Static grid description in per-unit on base_mva. Immutable once validated.
struct PowerSystem {
    std::string name;
    double base_mva = 100.0;
    std::vector<Bus> buses;
    std::vector<Line> lines;
    std::vector<Generator> generators;
    std::vector<ResUnit> res_units;
    std::vector<Drp> drps;
    std::vector<Load> loads;

    int num_buses() const { return static_cast<int>(buses.size()); }
    int num_lines() const { return static_cast<int>(lines.size()); }
    int num_generators() const { return static_cast<int>(generators.size()); }
    int num_res() const { return static_cast<int>(res_units.size()); }
    int num_drps() const { return static_cast<int>(drps.size()); }

    int slack_bus() const;
    double total_load() const;
    double total_res() const;
};

/// Reads a case file (JSON key-value tree, MW-denominated) and returns a
/// validated system in per-unit. Throws ParseError or ValidationError.
PowerSystem load_case(const std::filesystem::path& path);
PowerSystem parse_case(std::string_view text, std::string_view source = "<string>");

/// Marks the bus of the largest-capacity generator as slack when no bus is
/// marked. Leaves the system untouched if one already is.
void assign_default_slack(PowerSystem& sys);

/// Checks every invariant of the data model; throws ValidationError.
void validate(const PowerSystem& sys);

/// Row of each bus in the reduced (slack-free) injection vector, -1 for the slack.
std::vector<int> reduced_index(const PowerSystem& sys);

/// N_L x (N_B - 1) power transfer distribution factors. Columns follow
/// reduced_index(); the slack absorbs the balance.
Matrix compute_ptdf(const PowerSystem& sys);

/// Device-to-reduced-bus maps, each (N_B - 1) x devices.
struct IncidenceMaps {
    Matrix gen;
    Matrix drp;
    Matrix res;
    Matrix load;
};

IncidenceMaps incidence_maps(const PowerSystem& sys);

}  // namespace dcleo
