#include "dcleo/netmodel.hpp"

#include "dcleo/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <queue>
#include <sstream>

namespace dcleo {

using nlohmann::json;

int PowerSystem::slack_bus() const {
    for (const auto& bus : buses) {
        if (bus.is_slack) return bus.id;
    }
    return -1;
}

double PowerSystem::total_load() const {
    double total = 0.0;
    for (const auto& load : loads) total += load.p;
    return total;
}

double PowerSystem::total_res() const {
    double total = 0.0;
    for (const auto& res : res_units) total += res.p_nominal;
    return total;
}

namespace {

std::string location_of(std::string_view text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

class FieldReader {
public:
    FieldReader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) throw ParseError(path_ + ": expected an object");
    }

    double number(const char* key) const {
        const auto& v = at(key);
        if (!v.is_number()) throw ParseError(path_ + "." + key + ": expected a number");
        return v.get<double>();
    }

    double number_or(const char* key, double fallback) const {
        return node_.contains(key) ? number(key) : fallback;
    }

    int integer(const char* key) const {
        const auto& v = at(key);
        if (!v.is_number_integer()) throw ParseError(path_ + "." + key + ": expected an integer");
        return v.get<int>();
    }

    bool boolean_or(const char* key, bool fallback) const {
        if (!node_.contains(key)) return fallback;
        const auto& v = node_.at(key);
        if (!v.is_boolean()) throw ParseError(path_ + "." + key + ": expected true or false");
        return v.get<bool>();
    }

    std::string string_or(const char* key, std::string fallback) const {
        if (!node_.contains(key)) return fallback;
        const auto& v = node_.at(key);
        if (v.is_string()) return v.get<std::string>();
        if (v.is_number_integer()) return std::to_string(v.get<long long>());
        throw ParseError(path_ + "." + key + ": expected a string");
    }

private:
    const json& at(const char* key) const {
        if (!node_.contains(key)) throw ParseError(path_ + ": missing field '" + key + "'");
        return node_.at(key);
    }

    const json& node_;
    std::string path_;
};

template <typename Fn>
void for_each_entry(const json& root, const char* key, bool required, Fn&& fn) {
    if (!root.contains(key)) {
        if (required) throw ParseError(std::string("missing array '") + key + "'");
        return;
    }
    const auto& arr = root.at(key);
    if (!arr.is_array()) throw ParseError(std::string("'") + key + "' must be an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
        fn(FieldReader(arr[i], std::string(key) + "[" + std::to_string(i) + "]"));
    }
}

void require(bool ok, const std::string& message) {
    if (!ok) throw ValidationError(message);
}

bool valid_bus(const PowerSystem& sys, int bus) { return bus >= 0 && bus < sys.num_buses(); }

}  // namespace

PowerSystem parse_case(std::string_view text, std::string_view source) {
    json root;
    try {
        root = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ParseError(std::string(source) + ": malformed case file at " +
                         location_of(text, e.byte == 0 ? 0 : e.byte - 1));
    }
    if (!root.is_object()) throw ParseError(std::string(source) + ": top level must be an object");

    PowerSystem sys;
    try {
        FieldReader top(root, "case");
        sys.name = top.string_or("name", "");
        sys.base_mva = top.number_or("base_mva", 100.0);
        if (!(sys.base_mva > 0.0)) throw ValidationError("base_mva must be positive");
        const double base = sys.base_mva;

        for_each_entry(root, "buses", true, [&](const FieldReader& f) {
            Bus bus;
            bus.id = f.integer("id");
            bus.is_slack = f.boolean_or("is_slack", false);
            bus.label = f.string_or("label", std::to_string(bus.id));
            sys.buses.push_back(std::move(bus));
        });
        for_each_entry(root, "lines", true, [&](const FieldReader& f) {
            sys.lines.push_back({f.integer("from_bus"), f.integer("to_bus"), f.number("reactance"),
                                 f.number("flow_limit") / base});
        });
        for_each_entry(root, "generators", true, [&](const FieldReader& f) {
            // a in $/MW^2h and b in $/MWh become $/pu^2h and $/puh
            sys.generators.push_back({f.integer("bus"), f.number("a") * base * base, f.number("b") * base,
                                      f.number_or("p_min", 0.0) / base, f.number("p_max") / base});
        });
        for_each_entry(root, "res_units", false, [&](const FieldReader& f) {
            sys.res_units.push_back({f.integer("bus"), f.number("p_nominal") / base, f.number("r_pct")});
        });
        for_each_entry(root, "drps", false, [&](const FieldReader& f) {
            sys.drps.push_back({f.integer("bus"), f.number("p_base") / base, f.number_or("pi_s", 300.0) * base,
                                f.number("pi_max") * base, f.number("pi_rr") * base, f.number("pi_dr") * base});
        });
        for_each_entry(root, "loads", false, [&](const FieldReader& f) {
            sys.loads.push_back({f.integer("bus"), f.number("p") / base});
        });
    } catch (const ParseError& e) {
        throw ParseError(std::string(source) + ": " + e.what());
    }

    std::sort(sys.buses.begin(), sys.buses.end(), [](const Bus& x, const Bus& y) { return x.id < y.id; });
    assign_default_slack(sys);
    validate(sys);
    return sys;
}

PowerSystem load_case(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path.string() + ": cannot open case file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_case(buf.str(), path.string());
}

void assign_default_slack(PowerSystem& sys) {
    const bool marked = std::any_of(sys.buses.begin(), sys.buses.end(), [](const Bus& b) { return b.is_slack; });
    if (marked || sys.generators.empty()) return;
    const auto largest = std::max_element(sys.generators.begin(), sys.generators.end(),
                                          [](const Generator& x, const Generator& y) { return x.p_max < y.p_max; });
    for (auto& bus : sys.buses) {
        if (bus.id == largest->bus) bus.is_slack = true;
    }
}

void validate(const PowerSystem& sys) {
    require(sys.base_mva > 0.0, "base_mva must be positive");
    require(!sys.buses.empty(), "system has no buses");
    int slack_count = 0;
    for (int i = 0; i < sys.num_buses(); ++i) {
        require(sys.buses[i].id == i, "bus ids must be contiguous from 0 (missing or duplicated id " +
                                          std::to_string(i) + ")");
        if (sys.buses[i].is_slack) ++slack_count;
    }
    require(slack_count != 0, "no slack bus");
    require(slack_count == 1, "duplicated slack bus (" + std::to_string(slack_count) + " marked)");

    for (int l = 0; l < sys.num_lines(); ++l) {
        const auto& line = sys.lines[l];
        const std::string tag = "line " + std::to_string(l);
        require(valid_bus(sys, line.from_bus) && valid_bus(sys, line.to_bus), tag + ": dangling bus id");
        require(line.from_bus != line.to_bus, tag + ": from_bus equals to_bus");
        require(line.reactance > 0.0, tag + ": reactance must be positive");
        require(line.flow_limit > 0.0, tag + ": flow_limit must be positive");
    }
    for (int g = 0; g < sys.num_generators(); ++g) {
        const auto& gen = sys.generators[g];
        const std::string tag = "generator " + std::to_string(g);
        require(valid_bus(sys, gen.bus), tag + ": dangling bus id");
        require(gen.a > 0.0, tag + ": quadratic cost coefficient a must be positive");
        require(gen.p_min >= 0.0 && gen.p_min <= gen.p_max, tag + ": need 0 <= p_min <= p_max");
    }
    for (int r = 0; r < sys.num_res(); ++r) {
        const auto& res = sys.res_units[r];
        const std::string tag = "res unit " + std::to_string(r);
        require(valid_bus(sys, res.bus), tag + ": dangling bus id");
        require(res.p_nominal >= 0.0, tag + ": p_nominal must be nonnegative");
        require(res.r_pct >= 0.0 && res.r_pct <= 100.0, tag + ": r_pct must lie in [0, 100]");
    }
    for (int j = 0; j < sys.num_drps(); ++j) {
        const auto& drp = sys.drps[j];
        const std::string tag = "drp " + std::to_string(j);
        require(valid_bus(sys, drp.bus), tag + ": dangling bus id");
        require(drp.pi_rr > 0.0 && drp.pi_max > drp.pi_rr, tag + ": need pi_max > pi_rr > 0");
        require(drp.p_base >= 0.0 && drp.pi_s >= 0.0 && drp.pi_dr >= 0.0,
                tag + ": p_base, pi_s and pi_dr must be nonnegative");
    }
    for (std::size_t i = 0; i < sys.loads.size(); ++i) {
        const auto& load = sys.loads[i];
        const std::string tag = "load " + std::to_string(i);
        require(valid_bus(sys, load.bus), tag + ": dangling bus id");
        require(load.p >= 0.0, tag + ": demand must be nonnegative");
    }

    // connectivity
    std::vector<std::vector<int>> adj(sys.num_buses());
    for (const auto& line : sys.lines) {
        adj[line.from_bus].push_back(line.to_bus);
        adj[line.to_bus].push_back(line.from_bus);
    }
    std::vector<char> seen(sys.num_buses(), 0);
    std::queue<int> frontier;
    frontier.push(0);
    seen[0] = 1;
    int reached = 1;
    while (!frontier.empty()) {
        const int u = frontier.front();
        frontier.pop();
        for (int v : adj[u]) {
            if (!seen[v]) {
                seen[v] = 1;
                ++reached;
                frontier.push(v);
            }
        }
    }
    require(reached == sys.num_buses(), "network is not connected (" + std::to_string(reached) + " of " +
                                            std::to_string(sys.num_buses()) + " buses reachable from bus 0)");
}

std::vector<int> reduced_index(const PowerSystem& sys) {
    std::vector<int> index(sys.num_buses(), -1);
    int row = 0;
    for (const auto& bus : sys.buses) {
        if (!bus.is_slack) index[bus.id] = row++;
    }
    return index;
}

Matrix compute_ptdf(const PowerSystem& sys) {
    const auto index = reduced_index(sys);
    const int n = sys.num_buses() - 1;
    Matrix b_red = Matrix::Zero(n, n);
    Matrix b_branch = Matrix::Zero(sys.num_lines(), n);
    for (int l = 0; l < sys.num_lines(); ++l) {
        const auto& line = sys.lines[l];
        const double y = 1.0 / line.reactance;
        const int f = index[line.from_bus];
        const int t = index[line.to_bus];
        if (f >= 0) {
            b_red(f, f) += y;
            b_branch(l, f) = y;
        }
        if (t >= 0) {
            b_red(t, t) += y;
            b_branch(l, t) = -y;
        }
        if (f >= 0 && t >= 0) {
            b_red(f, t) -= y;
            b_red(t, f) -= y;
        }
    }
    if (n == 0) return Matrix::Zero(sys.num_lines(), 0);

    Eigen::LLT<Matrix> llt(b_red);
    if (llt.info() != Eigen::Success) {
        throw SolverError("ptdf", "reduced susceptance matrix is singular (disconnected network)");
    }
    // L = B_f * B_red^{-1}; B_red is symmetric so solve B_red * L^T = B_f^T
    return llt.solve(b_branch.transpose()).transpose();
}

IncidenceMaps incidence_maps(const PowerSystem& sys) {
    const auto index = reduced_index(sys);
    const int n = sys.num_buses() - 1;
    auto build = [&](const auto& devices) {
        Matrix m = Matrix::Zero(n, static_cast<Eigen::Index>(devices.size()));
        for (std::size_t k = 0; k < devices.size(); ++k) {
            const int row = index[devices[k].bus];
            if (row >= 0) m(row, static_cast<Eigen::Index>(k)) = 1.0;
        }
        return m;
    };
    return {build(sys.generators), build(sys.drps), build(sys.res_units), build(sys.loads)};
}

}  // namespace dcleo
