#pragma once

#include "radopf/convexsolver.hpp"
#include "radopf/model.hpp"
#include "radopf/transform.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace radopf {

/// Tangent point for one lower bound: the Euclidean projection of a strictly
/// feasible point onto {z : f(z) <= bound}, where f is p_i or q_i.
struct BasePoint {
    std::size_t bus = 0;
    InjectionKind kind = InjectionKind::Active;
    ZVector point;
    double bound = 0.0;
    /// |f(point) - bound|.
    double boundary_residual = 0.0;
};

struct DroppedConstraint {
    std::size_t bus = 0;
    InjectionKind kind = InjectionKind::Active;
    std::string reason;
};

struct BasePoints {
    std::vector<BasePoint> points;
    std::vector<DroppedConstraint> dropped;

    const BasePoint* find(std::size_t bus, InjectionKind kind) const;
};

/// Affine underestimator h(z) = normal . z + offset of a convex injection,
/// tangent at `base_point`. The restriction enforces h(z) >= bound.
struct Hyperplane {
    Vector normal;
    double offset = 0.0;
    double bound = 0.0;
    std::size_t bus = 0;
    InjectionKind kind = InjectionKind::Active;
    ZVector base_point;

    double operator()(const ZVector& z) const { return normal.dot(z) + offset; }
};

/// Euclidean projections are solved on the incident coordinates inside this
/// domain box (|z_e| <= 1 - margin).
inline constexpr double kProjectionDomainMargin = 1e-7;

/// Tolerance on |f(base point) - bound|.
inline constexpr double kBoundaryTolerance = 1e-6;

/// The injection as solver callbacks over the full z vector.
SmoothFunction injection_function(const NetworkCase& net, std::size_t bus, InjectionKind kind);

/// True when the lower bound can never be violated: the bound is -inf or
/// lies below the closed-form minimum of the injection.
bool lower_bound_set_empty(const NetworkCase& net, std::size_t bus, InjectionKind kind);

/// Projection of z0 onto the lower-bound set {f <= bound} of one
/// injection. The set must have an interior (bound above the closed-form
/// minimum). Returns z0 unchanged when it already lies in the set.
BasePoint project_lower_bound(const NetworkCase& net, std::size_t bus, InjectionKind kind,
                              const ZVector& z0, const SolverConfig& config = {});

/// Projects z0 onto every nonempty finite lower-bound set. z0 must be
/// strictly feasible for the original problem (NotStrictlyFeasible).
BasePoints base_points(const NetworkCase& net, const ZVector& z0,
                       const SolverConfig& config = {});

/// Supporting hyperplane of the injection at `point`. Throws
/// DegenerateGradient when the gradient vanishes there.
Hyperplane hyperplane_at(const NetworkCase& net, std::size_t bus, InjectionKind kind,
                         const ZVector& point, double bound);

std::vector<Hyperplane> hyperplanes(const NetworkCase& net, const BasePoints& base);

/// The convex restricted program: angle box, smooth convex upper bounds on
/// every finite p_max / q_max, and one halfspace per hyperplane.
struct RestrictedProblem {
    SmoothConvexProgram program;
    std::vector<Hyperplane> hyperplanes;
    /// (bus, kind) of each smooth constraint, in program order.
    std::vector<std::pair<std::size_t, InjectionKind>> upper_owners;
};

RestrictedProblem build_restricted(const NetworkCase& net, std::vector<Hyperplane> planes,
                                   std::optional<ObjectiveFunction> objective);

RestrictedProblem build_restricted(const NetworkCase& net, const BasePoints& base,
                                   std::optional<ObjectiveFunction> objective);

/// True when z satisfies the restricted constraints (box, smooth upper
/// bounds, halfspaces) with tolerance `tol`.
bool satisfies_restriction(const NetworkCase& net, const std::vector<Hyperplane>& planes,
                           const ZVector& z, double tol = 0.0);

struct TangencyEntry {
    std::size_t bus = 0;
    InjectionKind kind = InjectionKind::Active;
    /// max over samples of h(z) - f(z); <= 0 for a valid underestimator.
    double max_overestimate = -kInf;
    /// |h(base) - f(base)|.
    double tangency_gap = 0.0;
    /// |f(base) - bound|.
    double boundary_residual = 0.0;
};

struct TangencyCertificate {
    bool passed = true;
    std::vector<TangencyEntry> entries;
    std::size_t samples = 0;
    /// Samples inside the restriction, and how many of them violated the
    /// original constraints (must be zero).
    std::size_t restricted_samples = 0;
    std::size_t restricted_violations = 0;
    /// Samples violating a dropped lower bound (must be zero).
    std::size_t dropped_violations = 0;

    double worst_overestimate() const;
};

inline constexpr double kUnderestimateTolerance = 1e-9;
inline constexpr double kTangencyTolerance = 1e-8;

/// Sampling certificate for a hyperplane set: underestimation over the z box,
/// tangency at the base point, boundary landing, and the restriction-implies-
/// original spot check. Seeded and deterministic.
TangencyCertificate certify(const NetworkCase& net, const BasePoints& base,
                            const std::vector<Hyperplane>& planes, std::size_t sample_count,
                            std::uint64_t seed);

}  // namespace radopf
