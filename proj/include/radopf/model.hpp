#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace radopf {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Per-bus injection limits (per-unit) and linear generation cost.
/// Infinite limits are stored as +/-infinity.
struct BusRecord {
    int id = 0;
    double p_min = -kInf;
    double p_max = kInf;
    double q_min = -kInf;
    double q_max = kInf;
    double cost_coeff = 0.0;

    bool operator==(const BusRecord&) const = default;
};

/// A line in canonical orientation from -> to. `g` and `b` are the
/// conductance and susceptance magnitudes, both nonnegative for inductive
/// lines. Angle bounds apply to theta_from - theta_to.
struct EdgeRecord {
    int from = 0;
    int to = 0;
    double g = 0.0;
    double b = 0.0;
    double theta_min = 0.0;
    double theta_max = 0.0;

    bool operator==(const EdgeRecord&) const = default;
};

enum class InjectionKind { Active, Reactive };

std::string_view to_string(InjectionKind kind);

/// Edge incident to a bus: sign is +1 when the bus is the edge's tail and
/// -1 when it is the head.
struct Incidence {
    std::size_t edge;
    double sign;
};

/// Immutable radial network. Bus positions and edge orientation follow the
/// construction order; every vector indexed "by bus" or "by edge" elsewhere
/// uses these positions.
class NetworkCase {
public:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    NetworkCase(std::vector<BusRecord> buses, std::vector<EdgeRecord> edges, int slack_bus);

    const std::vector<BusRecord>& buses() const noexcept { return buses_; }
    const std::vector<EdgeRecord>& edges() const noexcept { return edges_; }
    int slack_bus() const noexcept { return slack_bus_; }

    std::size_t bus_count() const noexcept { return buses_.size(); }
    std::size_t edge_count() const noexcept { return edges_.size(); }

    std::optional<std::size_t> find_bus(int id) const;
    /// Throws UnknownBus.
    std::size_t bus_index(int id) const;
    std::size_t slack_index() const { return bus_index(slack_bus_); }

    /// Bus positions of the edge endpoints; npos if the id is unknown.
    std::size_t tail(std::size_t edge) const { return tails_.at(edge); }
    std::size_t head(std::size_t edge) const { return heads_.at(edge); }

    std::span<const Incidence> incident(std::size_t bus) const { return incidence_.at(bus); }

    double lower_bound(std::size_t bus, InjectionKind kind) const;
    double upper_bound(std::size_t bus, InjectionKind kind) const;

    bool operator==(const NetworkCase& other) const;

private:
    std::vector<BusRecord> buses_;
    std::vector<EdgeRecord> edges_;
    int slack_bus_;
    std::unordered_map<int, std::size_t> index_;
    std::vector<std::size_t> tails_;
    std::vector<std::size_t> heads_;
    std::vector<std::vector<Incidence>> incidence_;
};

struct Violation {
    std::string rule;
    std::string element;
    std::string message;
};

struct ValidationReport {
    bool ok = true;
    std::vector<Violation> violations;
    std::vector<std::string> warnings;

    bool has_rule(std::string_view rule) const;
    void add(std::string rule, std::string element, std::string message);
};

/// Checks record invariants, the tree shape, and the slack bus. Never
/// throws; violations are returned as data.
ValidationReport validate(const NetworkCase& net);

/// Interval of z = sin(theta) per edge.
struct ZBounds {
    Vector lower;
    Vector upper;
};

ZBounds z_bounds(const NetworkCase& net);

/// Reads the case JSON document. Bounds may be the strings "inf" / "-inf";
/// omitted bounds default to infinite and omitted cost_coeff to 0.
/// Throws ParseError naming the JSON path of the offending value.
NetworkCase parse_case(std::string_view text);

/// Inverse of parse_case. Infinite bounds are written as "inf" / "-inf".
std::string serialize_case(const NetworkCase& net);

struct ImportResult {
    NetworkCase net;
    ValidationReport report;
};

/// Imports the bus / gen / branch tables of a MATPOWER case file. Fields the
/// unit-voltage radial model cannot represent are dropped with a warning.
/// Throws ParseError for unreadable tables.
ImportResult import_matpower(std::string_view text);

}  // namespace radopf
