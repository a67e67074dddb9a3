#include "radopf/serialize.hpp"

#include "radopf/errors.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <iomanip>
#include <sstream>

namespace radopf {

Json number_to_json(double v) {
    if (std::isnan(v)) return "nan";
    if (v == kInf) return "inf";
    if (v == -kInf) return "-inf";
    return v;
}

Json vector_to_json(const Vector& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number_to_json(v[i]));
    return out;
}

Json to_json(const OperatingPoint& point) {
    return {
        {"z", vector_to_json(point.z)},
        {"theta", vector_to_json(point.theta)},
        {"p", vector_to_json(point.p)},
        {"q", vector_to_json(point.q)},
    };
}

Json to_json(const MeasurementSet& ms) {
    Json out{{"p_hat", vector_to_json(ms.p_hat)}, {"q_hat", vector_to_json(ms.q_hat)}};
    if (ms.noise_sigma) out["noise_sigma"] = *ms.noise_sigma;
    if (ms.seed) out["seed"] = *ms.seed;
    return out;
}

Json to_json(const FeasibilityReport& report) {
    Json violations = Json::array();
    for (const auto& v : report.violations) {
        violations.push_back({{"id", v.id}, {"residual", number_to_json(v.residual)}});
    }
    return {
        {"feasible", report.feasible},
        {"max_violation", number_to_json(report.max_violation)},
        {"violations", violations},
    };
}

Json to_json(const ValidationReport& report) {
    Json violations = Json::array();
    for (const auto& v : report.violations) {
        violations.push_back({{"rule", v.rule}, {"element", v.element}, {"message", v.message}});
    }
    return {{"ok", report.ok}, {"violations", violations}, {"warnings", report.warnings}};
}

Json to_json(const SolverConfig& c) {
    return {
        {"barrier_initial_t", c.barrier_initial_t},
        {"barrier_growth", c.barrier_growth},
        {"duality_gap_tol", c.duality_gap_tol},
        {"newton_decrement_tol", c.newton_decrement_tol},
        {"max_newton_per_stage", c.max_newton_per_stage},
        {"armijo_c1", c.armijo_c1},
        {"backtrack_factor", c.backtrack_factor},
        {"min_step", c.min_step},
        {"fraction_to_boundary", c.fraction_to_boundary},
    };
}

Json to_json(const AlgorithmConfig& c) {
    return {{"eps", c.eps}, {"max_outer", c.max_outer}, {"solver", to_json(c.solver)}};
}

Json to_json(const RelaxationResult& r) {
    Json out{
        {"R", vector_to_json(r.R)},
        {"I", vector_to_json(r.I)},
        {"objective_value", number_to_json(r.objective_value)},
        {"exactness_gap", number_to_json(r.exactness_gap)},
        {"exact", r.recovered_z.has_value()},
        {"newton_iterations", r.newton_iterations},
    };
    out["recovered_z"] = r.recovered_z ? vector_to_json(*r.recovered_z) : Json(nullptr);
    return out;
}

Json to_json(const OracleResult& r) {
    Json out{
        {"best_objective", number_to_json(r.best_objective)},
        {"feasible_count", r.feasible_count},
        {"resolution", r.resolution},
    };
    out["argmin"] = r.argmin ? vector_to_json(*r.argmin) : Json(nullptr);
    return out;
}

Json to_json(const NetworkCase& net, const BasePoints& base) {
    Json points = Json::array();
    for (const auto& bp : base.points) {
        points.push_back({
            {"bus", net.buses()[bp.bus].id},
            {"kind", std::string(to_string(bp.kind))},
            {"point", vector_to_json(bp.point)},
            {"bound", number_to_json(bp.bound)},
            {"boundary_residual", number_to_json(bp.boundary_residual)},
        });
    }
    Json dropped = Json::array();
    for (const auto& d : base.dropped) {
        dropped.push_back({
            {"bus", net.buses()[d.bus].id},
            {"kind", std::string(to_string(d.kind))},
            {"reason", d.reason},
        });
    }
    return {{"base_points", points}, {"dropped", dropped}};
}

Json to_json(const NetworkCase& net, const std::vector<Hyperplane>& planes) {
    Json out = Json::array();
    for (const auto& h : planes) {
        out.push_back({
            {"bus", net.buses()[h.bus].id},
            {"kind", std::string(to_string(h.kind))},
            {"normal", vector_to_json(h.normal)},
            {"offset", number_to_json(h.offset)},
            {"bound", number_to_json(h.bound)},
            {"base_point", vector_to_json(h.base_point)},
        });
    }
    return out;
}

namespace {

Json parse_document(std::string_view text) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ParseError("$", std::string("malformed JSON: ") + e.what());
    }
}

double json_number(const Json& v, const std::string& path) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "+inf") return kInf;
        if (s == "-inf") return -kInf;
    }
    throw ParseError(path, "expected a number");
}

Vector json_vector(const Json& doc, const std::string& key, const std::string& path) {
    if (!doc.is_object() || !doc.contains(key)) throw ParseError(path, "missing field \"" + key + "\"");
    const auto& arr = doc[key];
    const std::string here = path + "." + key;
    if (!arr.is_array()) throw ParseError(here, "expected an array");
    Vector v(static_cast<Eigen::Index>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) {
        v[static_cast<Eigen::Index>(i)] = json_number(arr[i], here + "[" + std::to_string(i) + "]");
    }
    return v;
}

void expect_length(const Vector& v, std::size_t n, const std::string& what) {
    if (static_cast<std::size_t>(v.size()) != n) {
        throw DimensionMismatch(what + " has length " + std::to_string(v.size()) + ", expected " +
                                std::to_string(n));
    }
}

}  // namespace

ZVector parse_point(std::string_view text, std::size_t edge_count) {
    const auto doc = parse_document(text);
    const bool is_report = doc.is_object() && !doc.contains("z") && doc.contains("final_point");
    ZVector z = is_report ? json_vector(doc["final_point"], "z", "$.final_point") : json_vector(doc, "z", "$");
    expect_length(z, edge_count, "z");
    return z;
}

MeasurementSet parse_measurements(std::string_view text, std::size_t bus_count) {
    const auto doc = parse_document(text);
    MeasurementSet ms;
    ms.p_hat = json_vector(doc, "p_hat", "$");
    ms.q_hat = json_vector(doc, "q_hat", "$");
    expect_length(ms.p_hat, bus_count, "p_hat");
    expect_length(ms.q_hat, bus_count, "q_hat");
    if (doc.contains("noise_sigma")) ms.noise_sigma = json_number(doc["noise_sigma"], "$.noise_sigma");
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_unsigned()) throw ParseError("$.seed", "expected an unsigned integer");
        ms.seed = doc["seed"].get<std::uint64_t>();
    }
    return ms;
}

std::vector<Hyperplane> parse_hyperplanes(const NetworkCase& net, std::string_view text) {
    const auto doc = parse_document(text);
    if (!doc.is_object() || !doc.contains("base_points") || !doc["base_points"].is_array()) {
        throw ParseError("$.base_points", "expected an array");
    }
    std::vector<Hyperplane> out;
    const auto& arr = doc["base_points"];
    for (std::size_t k = 0; k < arr.size(); ++k) {
        const std::string path = "$.base_points[" + std::to_string(k) + "]";
        const auto& entry = arr[k];
        if (!entry.is_object() || !entry.contains("bus") || !entry["bus"].is_number_integer()) {
            throw ParseError(path + ".bus", "expected an integer bus id");
        }
        if (!entry.contains("kind") || !entry["kind"].is_string()) {
            throw ParseError(path + ".kind", "expected \"p\" or \"q\"");
        }
        const auto kind_name = entry["kind"].get<std::string>();
        if (kind_name != "p" && kind_name != "q") throw ParseError(path + ".kind", "expected \"p\" or \"q\"");
        const auto kind = kind_name == "p" ? InjectionKind::Active : InjectionKind::Reactive;
        const auto bus = net.bus_index(entry["bus"].get<int>());
        ZVector point = json_vector(entry, "point", path);
        expect_length(point, net.edge_count(), path + ".point");
        out.push_back(hyperplane_at(net, bus, kind, point, net.lower_bound(bus, kind)));
    }
    return out;
}

Json solve_report(const NetworkCase& net, const Objective& objective,
                  const AlgorithmConfig& config, const std::string& init_mode,
                  const ZVector& z_init, const OpfResult& result,
                  const SolveTiming& timing) {
    Json obj{{"kind", std::string(to_string(objective.kind()))},
             {"convexity", std::string(to_string(classify_objective(objective)))}};
    if (objective.kind() == ObjectiveKind::LinearCost) obj["coefficients"] = vector_to_json(objective.coefficients());
    if (objective.kind() == ObjectiveKind::StateEstimation) obj["measurements"] = to_json(objective.measurements());

    Json trace = Json::array();
    Json iteration_ms = Json::array();
    for (const auto& it : result.trace.iterations) {
        Json residuals = Json::array();
        for (double r : it.projection_residuals) residuals.push_back(number_to_json(r));
        trace.push_back({
            {"k", it.k},
            {"objective", number_to_json(it.objective)},
            {"max_violation", number_to_json(it.max_violation)},
            {"newton_iterations", it.newton_iterations},
            {"projection_residuals", residuals},
            {"z", vector_to_json(it.z)},
        });
        iteration_ms.push_back(it.wall_ms);
    }

    Json report;
    report["status"] = "ok";
    report["config"] = to_json(config);
    report["init"] = {{"mode", init_mode}, {"z", vector_to_json(z_init)}};
    report["objective"] = obj;
    report["converged"] = result.trace.converged;
    report["iterations"] = result.trace.iterations.size();
    report["final_objective"] = number_to_json(result.objective);
    report["final_point"] = to_json(result.point);
    report["certificate"] = to_json(check_original_feasibility(net, result.point.z, kIterateFeasibilityTol));
    report["trace"] = trace;
    const auto base = to_json(net, result.base);
    report["base_points"] = base["base_points"];
    report["dropped"] = base["dropped"];
    report["timing"] = {
        {"started_at", timing.started_at},
        {"initial_point_ms", timing.initial_point_ms},
        {"total_ms", timing.total_ms},
        {"iteration_ms", iteration_ms},
    };
    return report;
}

std::string trace_csv(const IterationTrace& trace) {
    std::ostringstream out;
    out.precision(17);
    out << "k,objective,max_violation,newton_iters,wall_ms\n";
    for (const auto& it : trace.iterations) {
        out << it.k << ',' << it.objective << ',' << it.max_violation << ',' << it.newton_iterations
            << ',' << it.wall_ms << '\n';
    }
    return out.str();
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

}  // namespace radopf
