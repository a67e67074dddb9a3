#pragma once

#include "radopf/model.hpp"

#include <string>
#include <vector>

namespace radopf {

/// Per-edge z_e = sin(theta_tail - theta_head), canonical orientation.
using ZVector = Vector;

/// Derivatives are rejected for |z_e| >= 1 - kDomainMargin.
inline constexpr double kDomainMargin = 1e-9;

struct Injections {
    Vector p;
    Vector q;
};

/// Nodal injections with unit voltage magnitudes:
///   p_i = sum_e g_e (1 - c_e) + s_ie b_e z_e
///   q_i = sum_e b_e (1 - c_e) - s_ie g_e z_e
/// where c_e = sqrt(1 - z_e^2) and s_ie = +1 at the tail, -1 at the head.
Injections injections(const NetworkCase& net, const ZVector& z);

/// Single injection p_i or q_i (bus given by position).
double injection(const NetworkCase& net, std::size_t bus, InjectionKind kind, const ZVector& z);

/// Dense gradient of one injection; nonzero only on edges incident to `bus`.
Vector injection_gradient(const NetworkCase& net, std::size_t bus, InjectionKind kind,
                          const ZVector& z);

/// Active flow tail -> head on one edge.
double branch_flow(const NetworkCase& net, const ZVector& z, std::size_t edge);

/// (2 * buses) x edges, rows [p_0 .. p_{n-1}, q_0 .. q_{n-1}].
Matrix injection_jacobian(const NetworkCase& net, const ZVector& z);

/// Diagonal of the Hessian of p_i or q_i. Injections are separable across
/// edges, so the off-diagonal part is zero.
Vector injection_hessian_diag(const NetworkCase& net, std::size_t bus, InjectionKind kind,
                              const ZVector& z);

/// Bus angles by breadth-first traversal from the slack bus (angle 0).
Vector recover_angles(const NetworkCase& net, const ZVector& z);

struct OperatingPoint {
    ZVector z;
    Vector theta;
    Vector p;
    Vector q;
};

OperatingPoint make_operating_point(const NetworkCase& net, const ZVector& z);

struct ConstraintResidual {
    std::string id;
    double residual;
};

struct FeasibilityReport {
    bool feasible = true;
    /// Worst signed residual; <= 0 means every constraint is satisfied.
    double max_violation = -kInf;
    /// Constraints whose residual exceeds the tolerance.
    std::vector<ConstraintResidual> violations;
};

/// Checks the angle box and all finite injection bounds of the original
/// problem at z. Residuals are raw (lhs - bound), unscaled.
FeasibilityReport check_original_feasibility(const NetworkCase& net, const ZVector& z,
                                             double tol);

/// Infimum of p_i (or q_i) over |z_e| <= 1. Each incident edge term is
/// minimized independently.
double min_injection(const NetworkCase& net, std::size_t bus, InjectionKind kind);

/// Minimizer achieving min_injection on the incident edges; other entries
/// are copied from `base`.
ZVector injection_minimizer(const NetworkCase& net, std::size_t bus, InjectionKind kind,
                            const ZVector& base);

}  // namespace radopf
