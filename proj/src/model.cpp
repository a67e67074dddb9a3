#include "radopf/model.hpp"

#include "radopf/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <numbers>
#include <queue>
#include <set>
#include <sstream>

namespace radopf {

using nlohmann::json;

std::string_view to_string(InjectionKind kind) {
    return kind == InjectionKind::Active ? "p" : "q";
}

NetworkCase::NetworkCase(std::vector<BusRecord> buses, std::vector<EdgeRecord> edges, int slack_bus)
    : buses_(std::move(buses)), edges_(std::move(edges)), slack_bus_(slack_bus) {
    for (std::size_t i = 0; i < buses_.size(); ++i) {
        index_.emplace(buses_[i].id, i);  // first occurrence wins on duplicates
    }
    incidence_.resize(buses_.size());
    tails_.reserve(edges_.size());
    heads_.reserve(edges_.size());
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        const auto t = find_bus(edges_[e].from);
        const auto h = find_bus(edges_[e].to);
        tails_.push_back(t.value_or(npos));
        heads_.push_back(h.value_or(npos));
        if (t) incidence_[*t].push_back({e, 1.0});
        if (h && h != t) incidence_[*h].push_back({e, -1.0});
    }
}

std::optional<std::size_t> NetworkCase::find_bus(int id) const {
    const auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::size_t NetworkCase::bus_index(int id) const {
    const auto pos = find_bus(id);
    if (!pos) throw UnknownBus("unknown bus id " + std::to_string(id));
    return *pos;
}

double NetworkCase::lower_bound(std::size_t bus, InjectionKind kind) const {
    const auto& rec = buses_.at(bus);
    return kind == InjectionKind::Active ? rec.p_min : rec.q_min;
}

double NetworkCase::upper_bound(std::size_t bus, InjectionKind kind) const {
    const auto& rec = buses_.at(bus);
    return kind == InjectionKind::Active ? rec.p_max : rec.q_max;
}

bool NetworkCase::operator==(const NetworkCase& other) const {
    return slack_bus_ == other.slack_bus_ && buses_ == other.buses_ && edges_ == other.edges_;
}

bool ValidationReport::has_rule(std::string_view rule) const {
    for (const auto& v : violations) {
        if (v.rule == rule) return true;
    }
    return false;
}

void ValidationReport::add(std::string rule, std::string element, std::string message) {
    violations.push_back({std::move(rule), std::move(element), std::move(message)});
    ok = false;
}

namespace {

std::string bus_label(const BusRecord& b) { return "bus " + std::to_string(b.id); }
std::string edge_label(std::size_t e) { return "edge " + std::to_string(e); }

}  // namespace

ValidationReport validate(const NetworkCase& net) {
    ValidationReport report;
    constexpr double half_pi = std::numbers::pi / 2.0;

    std::set<int> seen;
    for (const auto& bus : net.buses()) {
        if (!seen.insert(bus.id).second) {
            report.add("duplicate bus id", bus_label(bus), "bus id appears more than once");
        }
        if (std::isnan(bus.p_min) || std::isnan(bus.p_max) || std::isnan(bus.q_min) ||
            std::isnan(bus.q_max) || !std::isfinite(bus.cost_coeff)) {
            report.add("non-finite value", bus_label(bus), "bounds must be numbers, cost finite");
            continue;
        }
        if (bus.p_min > bus.p_max) {
            report.add("p bounds inverted", bus_label(bus), "p_min exceeds p_max");
        }
        if (bus.q_min > bus.q_max) {
            report.add("q bounds inverted", bus_label(bus), "q_min exceeds q_max");
        }
        if (bus.cost_coeff < 0.0) {
            report.add("negative cost", bus_label(bus), "cost_coeff must be nonnegative");
        }
    }

    for (std::size_t e = 0; e < net.edge_count(); ++e) {
        const auto& edge = net.edges()[e];
        if (!std::isfinite(edge.g) || !std::isfinite(edge.b) || !std::isfinite(edge.theta_min) ||
            !std::isfinite(edge.theta_max)) {
            report.add("non-finite value", edge_label(e), "edge parameters must be finite");
            continue;
        }
        if (edge.from == edge.to) {
            report.add("self loop", edge_label(e), "from and to are the same bus");
        }
        if (net.tail(e) == NetworkCase::npos || net.head(e) == NetworkCase::npos) {
            report.add("unknown endpoint", edge_label(e), "edge references a bus that does not exist");
        }
        if (edge.g < 0.0) {
            report.add("negative conductance", edge_label(e), "g must be nonnegative");
        }
        if (edge.b < 0.0) {
            report.add("negative susceptance", edge_label(e),
                       "b must be nonnegative for q(z) to be convex");
        }
        if (!(edge.theta_min > -half_pi && edge.theta_max < half_pi)) {
            report.add("angle bound outside (-pi/2, pi/2)", edge_label(e),
                       "angle bounds must lie strictly inside (-pi/2, pi/2)");
        }
        if (edge.theta_min > edge.theta_max) {
            report.add("angle bounds inverted", edge_label(e), "theta_min exceeds theta_max");
        }
    }

    if (!net.find_bus(net.slack_bus())) {
        report.add("missing slack bus", "slack " + std::to_string(net.slack_bus()),
                   "slack bus id is not a bus");
    }

    const std::size_t n = net.bus_count();
    if (n == 0) {
        report.add("not a tree", "network", "network has no buses");
        return report;
    }
    if (net.edge_count() != n - 1) {
        std::ostringstream msg;
        msg << "expected " << n - 1 << " edges for " << n << " buses, found " << net.edge_count();
        report.add("not a tree", "network", msg.str());
        return report;
    }
    // |E| = |N| - 1, so connected <=> tree.
    std::vector<bool> reached(n, false);
    std::queue<std::size_t> frontier;
    frontier.push(0);
    reached[0] = true;
    std::size_t count = 1;
    while (!frontier.empty()) {
        const auto bus = frontier.front();
        frontier.pop();
        for (const auto& inc : net.incident(bus)) {
            const auto other = net.tail(inc.edge) == bus ? net.head(inc.edge) : net.tail(inc.edge);
            if (other == NetworkCase::npos || reached[other]) continue;
            reached[other] = true;
            ++count;
            frontier.push(other);
        }
    }
    if (count != n) {
        report.add("not a tree", "network", "graph is not connected");
    }
    return report;
}

ZBounds z_bounds(const NetworkCase& net) {
    ZBounds out{Vector(net.edge_count()), Vector(net.edge_count())};
    for (std::size_t e = 0; e < net.edge_count(); ++e) {
        out.lower[e] = std::sin(net.edges()[e].theta_min);
        out.upper[e] = std::sin(net.edges()[e].theta_max);
    }
    return out;
}

// ---------------------------------------------------------------------------
// JSON case format

namespace {

const json& require(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object()) throw ParseError(path, "expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(path + "." + key, "missing required field");
    return *it;
}

double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) throw ParseError(path, "expected a number");
    return v.get<double>();
}

int as_int(const json& v, const std::string& path) {
    if (!v.is_number_integer()) throw ParseError(path, "expected an integer");
    return v.get<int>();
}

double as_bound(const json& v, const std::string& path) {
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "+inf") return kInf;
        if (s == "-inf") return -kInf;
        throw ParseError(path, "expected a number, \"inf\" or \"-inf\"");
    }
    return as_number(v, path);
}

double optional_bound(const json& obj, const std::string& key, double fallback,
                      const std::string& path) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return fallback;
    return as_bound(*it, path + "." + key);
}

json bound_to_json(double v) {
    if (v == kInf) return "inf";
    if (v == -kInf) return "-inf";
    return v;
}

}  // namespace

NetworkCase parse_case(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("$", std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("$", "expected an object");

    const int slack = as_int(require(doc, "slack_bus", "$"), "$.slack_bus");
    const auto& jbuses = require(doc, "buses", "$");
    if (!jbuses.is_array()) throw ParseError("$.buses", "expected an array");
    const auto& jedges = require(doc, "edges", "$");
    if (!jedges.is_array()) throw ParseError("$.edges", "expected an array");

    std::vector<BusRecord> buses;
    buses.reserve(jbuses.size());
    for (std::size_t i = 0; i < jbuses.size(); ++i) {
        const std::string path = "$.buses[" + std::to_string(i) + "]";
        const auto& jb = jbuses[i];
        BusRecord rec;
        rec.id = as_int(require(jb, "id", path), path + ".id");
        rec.p_min = optional_bound(jb, "p_min", -kInf, path);
        rec.p_max = optional_bound(jb, "p_max", kInf, path);
        rec.q_min = optional_bound(jb, "q_min", -kInf, path);
        rec.q_max = optional_bound(jb, "q_max", kInf, path);
        if (const auto it = jb.find("cost_coeff"); it != jb.end() && !it->is_null()) {
            rec.cost_coeff = as_number(*it, path + ".cost_coeff");
        }
        buses.push_back(rec);
    }

    std::vector<EdgeRecord> edges;
    edges.reserve(jedges.size());
    for (std::size_t i = 0; i < jedges.size(); ++i) {
        const std::string path = "$.edges[" + std::to_string(i) + "]";
        const auto& je = jedges[i];
        EdgeRecord rec;
        rec.from = as_int(require(je, "from", path), path + ".from");
        rec.to = as_int(require(je, "to", path), path + ".to");
        rec.g = as_number(require(je, "g", path), path + ".g");
        rec.b = as_number(require(je, "b", path), path + ".b");
        rec.theta_min = as_number(require(je, "theta_min", path), path + ".theta_min");
        rec.theta_max = as_number(require(je, "theta_max", path), path + ".theta_max");
        edges.push_back(rec);
    }
    return NetworkCase(std::move(buses), std::move(edges), slack);
}

std::string serialize_case(const NetworkCase& net) {
    json doc;
    doc["slack_bus"] = net.slack_bus();
    json buses = json::array();
    for (const auto& b : net.buses()) {
        buses.push_back({{"id", b.id},
                         {"p_min", bound_to_json(b.p_min)},
                         {"p_max", bound_to_json(b.p_max)},
                         {"q_min", bound_to_json(b.q_min)},
                         {"q_max", bound_to_json(b.q_max)},
                         {"cost_coeff", b.cost_coeff}});
    }
    json edges = json::array();
    for (const auto& e : net.edges()) {
        edges.push_back({{"from", e.from},
                         {"to", e.to},
                         {"g", e.g},
                         {"b", e.b},
                         {"theta_min", e.theta_min},
                         {"theta_max", e.theta_max}});
    }
    doc["buses"] = std::move(buses);
    doc["edges"] = std::move(edges);
    return doc.dump(2);
}

}  // namespace radopf
