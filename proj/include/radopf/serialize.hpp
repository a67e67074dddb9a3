#pragma once

#include "radopf/algorithm.hpp"
#include "radopf/baseline.hpp"
#include "radopf/model.hpp"
#include "radopf/restriction.hpp"
#include "radopf/transform.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace radopf {

using Json = nlohmann::ordered_json;

// Non-finite doubles are written as the strings "inf", "-inf" and "nan".
Json number_to_json(double v);
Json vector_to_json(const Vector& v);

Json to_json(const OperatingPoint& point);
Json to_json(const MeasurementSet& ms);
Json to_json(const FeasibilityReport& report);
Json to_json(const ValidationReport& report);
Json to_json(const SolverConfig& config);
Json to_json(const AlgorithmConfig& config);
Json to_json(const RelaxationResult& result);
Json to_json(const OracleResult& result);
Json to_json(const NetworkCase& net, const BasePoints& base);
Json to_json(const NetworkCase& net, const std::vector<Hyperplane>& planes);

/// Reads the "z" array of a point document (an OperatingPoint or any object
/// with a "z" key, or a solve report via its final point). Throws ParseError on a malformed document and
/// DimensionMismatch when the length differs from the edge count.
ZVector parse_point(std::string_view text, std::size_t edge_count);

/// Reads {"p_hat": [...], "q_hat": [...]} with lengths equal to bus_count.
MeasurementSet parse_measurements(std::string_view text, std::size_t bus_count);

/// Reads the "base_points" array of a base-point document or a solve report
/// and rebuilds the hyperplanes at those points.
std::vector<Hyperplane> parse_hyperplanes(const NetworkCase& net, std::string_view text);

struct SolveTiming {
    std::string started_at;
    double initial_point_ms = 0.0;
    double total_ms = 0.0;
};

/// Full solve report: effective configuration, objective, trace (without
/// wall times), final point, feasibility certificate, final base points and
/// a separate "timing" block holding everything clock-dependent.
Json solve_report(const NetworkCase& net, const Objective& objective,
                  const AlgorithmConfig& config, const std::string& init_mode,
                  const ZVector& z_init, const OpfResult& result,
                  const SolveTiming& timing);

/// CSV columns k,objective,max_violation,newton_iters,wall_ms.
std::string trace_csv(const IterationTrace& trace);

/// ISO-8601 UTC timestamp of the current time.
std::string utc_timestamp();

}  // namespace radopf
