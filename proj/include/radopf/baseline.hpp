#pragma once

#include "radopf/algorithm.hpp"
#include "radopf/convexsolver.hpp"
#include "radopf/model.hpp"
#include "radopf/restriction.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace radopf {

/// Second-order cone relaxation: (R_e, I_e) stand in for (cos, sin) of the
/// edge angle and the circle R^2 + I^2 = 1 is relaxed to the disk.
struct RelaxationResult {
    Vector R;
    Vector I;
    double objective_value = 0.0;
    /// max_e (1 - R_e^2 - I_e^2); zero when the relaxation is exact.
    double exactness_gap = 0.0;
    /// I, present when exactness_gap <= kExactnessTolerance.
    std::optional<ZVector> recovered_z;
    int newton_iterations = 0;
};

inline constexpr double kExactnessTolerance = 1e-6;

/// Solves the relaxation for a Loss or LinearCost objective with the internal
/// barrier solver. Throws Infeasible when the relaxation has no strictly
/// feasible point, NumericalFailure when the solve stalls.
RelaxationResult socp_relaxation(const NetworkCase& net, const Objective& objective,
                                 const SolverConfig& config = {});

struct OracleResult {
    double best_objective = kInf;
    std::optional<ZVector> argmin;
    std::size_t feasible_count = 0;
    int resolution = 0;
};

inline constexpr std::size_t kOracleMaxEdges = 3;
inline constexpr int kOracleMaxResolution = 2001;

/// Exhaustive scan of the z box on a uniform grid (resolution points per
/// axis, endpoints included). Throws TooLarge for more than three edges.
OracleResult grid_oracle(const NetworkCase& net, const Objective& objective, int resolution);

/// Worst objective change over one grid step: sum_e L_e h_e with L_e the
/// largest |d objective / d z_e| on the box. Loss and LinearCost only.
double grid_tolerance(const NetworkCase& net, const Objective& objective, int resolution);

/// Feasibility flags on a resolution x resolution grid over the box of two
/// edges; the other edges are pinned to `fixed`. Cells are row-major with
/// the first edge varying slowest.
struct RasterGrid {
    std::size_t edge_a = 0;
    std::size_t edge_b = 0;
    int resolution = 0;
    Vector axis_a;
    Vector axis_b;
    ZVector fixed;
    std::vector<std::uint8_t> original;
    std::vector<std::uint8_t> restricted;
    bool has_restricted = false;

    std::size_t index(int i, int j) const { return static_cast<std::size_t>(i * resolution + j); }
    std::size_t cell_count() const { return original.size(); }
    std::size_t count_original() const;
    std::size_t count_restricted() const;

    /// A cell whose 8-neighborhood contains a different original flag.
    bool near_boundary(int i, int j) const;

    /// Cells flagged restricted-feasible but original-infeasible, skipping
    /// boundary-adjacent cells when `interior_only`.
    std::size_t subset_violations(bool interior_only) const;

    /// Angle-space coordinates of the axes (theta = asin z).
    Vector theta_a() const;
    Vector theta_b() const;
};

/// Rasterizes the original feasible set and, when `planes` is given, the
/// restriction built from those hyperplanes.
RasterGrid raster_region(const NetworkCase& net, std::size_t edge_a, std::size_t edge_b,
                         int resolution, const ZVector& fixed,
                         const std::vector<Hyperplane>* planes = nullptr);

/// CSV with header "z_a,z_b,original,restricted", one line per cell.
std::string raster_csv(const RasterGrid& grid);

}  // namespace radopf
