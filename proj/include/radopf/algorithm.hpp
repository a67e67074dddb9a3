#pragma once

#include "radopf/convexsolver.hpp"
#include "radopf/model.hpp"
#include "radopf/restriction.hpp"
#include "radopf/transform.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace radopf {

struct MeasurementSet {
    Vector p_hat;
    Vector q_hat;
    std::optional<double> noise_sigma;
    std::optional<std::uint64_t> seed;
};

enum class ObjectiveKind { Loss, LinearCost, StateEstimation };

std::string_view to_string(ObjectiveKind kind);

/// Objective catalog over the injections p(z), q(z).
///   Loss:             sum_i p_i
///   LinearCost:       sum_i c_i p_i, c_i >= 0
///   StateEstimation:  sum_i (p_hat_i - p_i)^2 + (q_hat_i - q_i)^2
class Objective {
public:
    static Objective loss();
    /// Throws std::invalid_argument on a negative coefficient.
    static Objective linear_cost(Vector coefficients);
    /// Uses the per-bus cost_coeff of the case.
    static Objective linear_cost(const NetworkCase& net);
    static Objective state_estimation(MeasurementSet measurements);

    ObjectiveKind kind() const noexcept { return kind_; }
    const Vector& coefficients() const noexcept { return coefficients_; }
    const MeasurementSet& measurements() const noexcept { return measurements_; }

    double value(const NetworkCase& net, const ZVector& z) const;

    /// Solver callbacks. State estimation supplies the Gauss-Newton
    /// surrogate 2 J^T J as its Hessian.
    ObjectiveFunction callbacks(const NetworkCase& net) const;

private:
    ObjectiveKind kind_ = ObjectiveKind::Loss;
    Vector coefficients_;  // empty means all ones (loss)
    MeasurementSet measurements_;
};

enum class Convexity { Convex, NonconvexSmooth };

std::string_view to_string(Convexity c);

/// Nonnegative combinations of injections are convex in z; least-squares
/// matching is not monotone in the injections and is classified nonconvex.
Convexity classify_objective(const Objective& objective);

struct AlgorithmConfig {
    /// Stop when (c_k - c_{k-1})^2 <= eps.
    double eps = 1e-8;
    int max_outer = 50;
    SolverConfig solver;

    void check() const;
};

struct IterationRecord {
    int k = 0;
    double objective = 0.0;
    ZVector z;
    double max_violation = 0.0;
    std::vector<double> projection_residuals;
    int newton_iterations = 0;
    double wall_ms = 0.0;
};

struct IterationTrace {
    std::vector<IterationRecord> iterations;
    bool converged = false;
};

struct OpfResult {
    IterationTrace trace;
    OperatingPoint point;
    double objective = 0.0;
    /// Base points behind the final restricted solve.
    BasePoints base;
};

/// Margin required on every constraint for a point to count as strictly
/// feasible when searching for a start.
inline constexpr double kStrictMargin = 1e-9;

/// Tolerance every accepted iterate must meet in the original problem.
inline constexpr double kIterateFeasibilityTol = 1e-8;

/// Strictly feasible start: z = 0 when it qualifies, otherwise up to five
/// rounds of restricted phase-1. Throws Infeasible carrying the best
/// achieved max violation.
ZVector initial_point(const NetworkCase& net, const AlgorithmConfig& config = {});

/// Iterates project -> linearize -> solve from a strictly feasible start.
/// Every iterate is verified against the original constraints.
OpfResult solve_opf(const NetworkCase& net, const Objective& objective, const ZVector& z_init,
                    const AlgorithmConfig& config = {});

/// Injections at z_true plus independent N(0, sigma^2) noise, seeded.
MeasurementSet simulate_measurements(const NetworkCase& net, const ZVector& z_true,
                                     double noise_sigma, std::uint64_t seed);

}  // namespace radopf
