#include "radopf/errors.hpp"
#include "radopf/model.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <regex>
#include <sstream>

namespace radopf {

namespace {

using Table = std::vector<std::vector<double>>;

// Column layout of the standard MATPOWER case struct (zero-based).
namespace bus_col {
constexpr std::size_t id = 0, type = 1, pd = 2, qd = 3, gs = 4, bs = 5, vmax = 11, vmin = 12;
}
namespace gen_col {
constexpr std::size_t bus = 0, qmax = 3, qmin = 4, status = 7, pmax = 8, pmin = 9;
}
namespace branch_col {
constexpr std::size_t from = 0, to = 1, r = 2, x = 3, charging = 4, tap = 8, shift = 9,
                      status = 10, angmin = 11, angmax = 12;
}

constexpr double kDefaultAngleLimit = std::numbers::pi / 3.0;

std::string strip_comments(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool in_comment = false;
    for (char c : text) {
        if (c == '%') in_comment = true;
        if (c == '\n') in_comment = false;
        if (!in_comment) out.push_back(c);
    }
    return out;
}

std::optional<Table> read_table(const std::string& text, const std::string& name) {
    const std::regex start("mpc\\." + name + "\\s*=\\s*\\[");
    std::smatch m;
    if (!std::regex_search(text, m, start)) return std::nullopt;
    const auto begin = static_cast<std::size_t>(m.position(0) + m.length(0));
    const auto end = text.find(']', begin);
    if (end == std::string::npos) throw ParseError("mpc." + name, "unterminated table");

    Table rows;
    std::string body = text.substr(begin, end - begin);
    std::size_t row_no = 0;
    std::string row_text;
    // Rows end at ';' or newline.
    for (char& c : body) {
        if (c == ';') c = '\n';
    }
    std::istringstream lines(body);
    while (std::getline(lines, row_text)) {
        for (char& c : row_text) {
            if (c == ',' || c == '\t' || c == '\r') c = ' ';
        }
        std::istringstream tokens(row_text);
        std::vector<double> row;
        std::string tok;
        while (tokens >> tok) {
            try {
                std::size_t used = 0;
                double v = 0.0;
                if (tok == "Inf" || tok == "inf") {
                    v = kInf;
                } else if (tok == "-Inf" || tok == "-inf") {
                    v = -kInf;
                } else {
                    v = std::stod(tok, &used);
                    if (used != tok.size()) throw std::invalid_argument(tok);
                }
                row.push_back(v);
            } catch (const std::exception&) {
                throw ParseError("mpc." + name + " row " + std::to_string(row_no + 1),
                                 "unreadable entry '" + tok + "'");
            }
        }
        if (row.empty()) continue;
        rows.push_back(std::move(row));
        ++row_no;
    }
    return rows;
}

Table required_table(const std::string& text, const std::string& name, std::size_t min_cols) {
    auto table = read_table(text, name);
    if (!table) throw ParseError("mpc." + name, "table not found");
    for (std::size_t i = 0; i < table->size(); ++i) {
        if ((*table)[i].size() < min_cols) {
            throw ParseError("mpc." + name + " row " + std::to_string(i + 1),
                             "expected at least " + std::to_string(min_cols) + " columns");
        }
    }
    return *table;
}

double read_base_mva(const std::string& text) {
    const std::regex re("mpc\\.baseMVA\\s*=\\s*([-+0-9.eE]+)");
    std::smatch m;
    if (!std::regex_search(text, m, re)) return 100.0;
    return std::stod(m[1].str());
}

int as_id(double v, const std::string& where) {
    if (v != std::floor(v)) throw ParseError(where, "bus id must be an integer");
    return static_cast<int>(v);
}

}  // namespace

ImportResult import_matpower(std::string_view raw) {
    const std::string text = strip_comments(raw);
    const double base = read_base_mva(text);
    if (!(base > 0.0)) throw ParseError("mpc.baseMVA", "must be positive");

    const Table bus_table = required_table(text, "bus", 4);
    const Table gen_table = required_table(text, "gen", 10);
    const Table branch_table = required_table(text, "branch", 4);

    std::vector<std::string> warnings;

    struct GenLimits {
        double pmin = 0, pmax = 0, qmin = 0, qmax = 0;
        bool any = false;
    };
    std::map<int, GenLimits> gens;
    for (std::size_t i = 0; i < gen_table.size(); ++i) {
        const auto& row = gen_table[i];
        if (row[gen_col::status] <= 0.0) continue;
        auto& lim = gens[as_id(row[gen_col::bus], "mpc.gen row " + std::to_string(i + 1))];
        lim.pmin += row[gen_col::pmin];
        lim.pmax += row[gen_col::pmax];
        lim.qmin += row[gen_col::qmin];
        lim.qmax += row[gen_col::qmax];
        lim.any = true;
    }

    std::vector<BusRecord> buses;
    std::optional<int> slack;
    std::size_t voltage_bounded = 0;
    for (std::size_t i = 0; i < bus_table.size(); ++i) {
        const auto& row = bus_table[i];
        BusRecord rec;
        rec.id = as_id(row[bus_col::id], "mpc.bus row " + std::to_string(i + 1));
        const double pd = row[bus_col::pd] / base;
        const double qd = row[bus_col::qd] / base;
        if (const auto it = gens.find(rec.id); it != gens.end()) {
            rec.p_min = it->second.pmin / base - pd;
            rec.p_max = it->second.pmax / base - pd;
            rec.q_min = it->second.qmin / base - qd;
            rec.q_max = it->second.qmax / base - qd;
        } else {
            rec.p_min = rec.p_max = -pd;
            rec.q_min = rec.q_max = -qd;
        }
        if (row.size() > bus_col::bs && (row[bus_col::gs] != 0.0 || row[bus_col::bs] != 0.0)) {
            warnings.push_back("bus " + std::to_string(rec.id) + ": shunt ignored");
        }
        if (row.size() > bus_col::vmin) ++voltage_bounded;
        if (row[bus_col::type] == 3.0 && !slack) slack = rec.id;
        buses.push_back(rec);
    }
    if (voltage_bounded > 0) {
        warnings.push_back("voltage-magnitude bounds ignored on " + std::to_string(voltage_bounded) +
                           " buses (unit voltage magnitudes assumed)");
    }
    if (!slack) {
        if (buses.empty()) throw ParseError("mpc.bus", "no buses");
        slack = buses.front().id;
        warnings.push_back("no reference bus (type 3); using bus " + std::to_string(*slack));
    }

    std::vector<EdgeRecord> edges;
    for (std::size_t i = 0; i < branch_table.size(); ++i) {
        const auto& row = branch_table[i];
        const std::string where = "mpc.branch row " + std::to_string(i + 1);
        if (row.size() > branch_col::status && row[branch_col::status] <= 0.0) continue;

        EdgeRecord rec;
        rec.from = as_id(row[branch_col::from], where);
        rec.to = as_id(row[branch_col::to], where);
        const double r = row[branch_col::r];
        const double x = row[branch_col::x];
        const double z2 = r * r + x * x;
        if (!(z2 > 0.0)) throw ParseError(where, "zero series impedance");
        rec.g = r / z2;
        rec.b = x / z2;

        const std::string label = "branch " + std::to_string(i + 1) + " (" +
                                  std::to_string(rec.from) + "-" + std::to_string(rec.to) + ")";
        if (row.size() > branch_col::charging && row[branch_col::charging] != 0.0) {
            warnings.push_back(label + ": line charging ignored");
        }
        if (row.size() > branch_col::tap && row[branch_col::tap] != 0.0 &&
            row[branch_col::tap] != 1.0) {
            warnings.push_back(label + ": tap ignored");
        }
        if (row.size() > branch_col::shift && row[branch_col::shift] != 0.0) {
            warnings.push_back(label + ": phase shift ignored");
        }

        // MATPOWER treats 0/0 and +/-360 degree limits as "unconstrained".
        double angmin = row.size() > branch_col::angmin ? row[branch_col::angmin] : 0.0;
        double angmax = row.size() > branch_col::angmax ? row[branch_col::angmax] : 0.0;
        const bool unconstrained = (angmin == 0.0 && angmax == 0.0) ||
                                   (angmin <= -360.0 && angmax >= 360.0);
        if (unconstrained) {
            rec.theta_min = -kDefaultAngleLimit;
            rec.theta_max = kDefaultAngleLimit;
            warnings.push_back(label + ": no angle limit, using +/-60 degrees");
        } else {
            rec.theta_min = angmin * std::numbers::pi / 180.0;
            rec.theta_max = angmax * std::numbers::pi / 180.0;
        }
        edges.push_back(rec);
    }

    NetworkCase net(std::move(buses), std::move(edges), *slack);
    ValidationReport report = validate(net);
    report.warnings.insert(report.warnings.begin(), warnings.begin(), warnings.end());
    return {std::move(net), std::move(report)};
}

}  // namespace radopf
