#pragma once

#include "radopf/model.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace radopf {

/// Smooth convex function with a diagonal (separable) Hessian.
struct SmoothFunction {
    std::function<double(const Vector&)> value;
    std::function<Vector(const Vector&)> gradient;
    std::function<Vector(const Vector&)> hessian_diag;
};

/// Objective callbacks. `hessian` may be a positive semidefinite surrogate
/// (Gauss-Newton) when the objective itself is not convex.
struct ObjectiveFunction {
    std::function<double(const Vector&)> value;
    std::function<Vector(const Vector&)> gradient;
    std::function<Matrix(const Vector&)> hessian;
};

/// f(x) <= upper.
struct SmoothConstraint {
    SmoothFunction f;
    double upper = 0.0;
    std::string label;
};

/// normal . x <= offset.
struct LinearConstraint {
    Vector normal;
    double offset = 0.0;
    std::string label;
};

struct SmoothConvexProgram {
    std::size_t dimension = 0;
    std::optional<ObjectiveFunction> objective;
    std::vector<SmoothConstraint> smooth;
    std::vector<LinearConstraint> linear;
    /// Box; entries may be infinite.
    Vector lower;
    Vector upper;

    /// Number of inequalities seen by the barrier (finite box sides included).
    std::size_t inequality_count() const;

    /// Smallest slack over all inequalities (+inf when there are none).
    /// Returns -inf if a smooth constraint cannot be evaluated at x.
    double min_slack(const Vector& x) const;
};

/// Unbounded box of the given dimension.
SmoothConvexProgram make_program(std::size_t dimension);

struct SolverConfig {
    double barrier_initial_t = 1.0;
    double barrier_growth = 10.0;
    double duality_gap_tol = 1e-8;
    double newton_decrement_tol = 1e-10;
    int max_newton_per_stage = 50;
    double armijo_c1 = 1e-4;
    double backtrack_factor = 0.5;
    double min_step = 1e-14;
    double fraction_to_boundary = 0.99;

    /// Throws std::invalid_argument if a field is out of range.
    void check() const;
};

enum class SolverStatus { Optimal, Infeasible, NumericalFailure };

std::string_view to_string(SolverStatus status);

struct SolverResult {
    SolverStatus status = SolverStatus::NumericalFailure;
    Vector x;
    double objective_value = 0.0;
    int newton_iterations = 0;
    double certified_gap = kInf;
    /// Barrier merit value after every accepted Newton step, per stage.
    std::vector<std::vector<double>> merit_history;
};

/// Log-barrier path following with damped Newton steps. `start` must satisfy
/// every inequality strictly; throws NotStrictlyFeasible otherwise.
SolverResult solve(const SmoothConvexProgram& program, const Vector& start,
                   const SolverConfig& config = {});

/// Euclidean projection of z0 onto {f <= u} intersected with the domain box.
/// `interior_hint` must satisfy f < u strictly. The barrier solution is
/// polished onto the boundary f = u by Newton's method on the KKT system.
/// Returns z0 itself when f(z0) <= u.
Vector project_euclidean(const SmoothFunction& f, double u, const Vector& z0,
                         const Vector& interior_hint, const SolverConfig& config = {},
                         const Vector* domain_lower = nullptr,
                         const Vector* domain_upper = nullptr);

struct Phase1Result {
    bool feasible = false;
    /// Strictly feasible point when `feasible`, otherwise the minimizer of the
    /// common slack.
    Vector x;
    /// Smallest common constraint relaxation found.
    double slack = kInf;
    /// Certified lower bound on the smallest achievable relaxation.
    double slack_lower_bound = -kInf;
    int newton_iterations = 0;
};

/// Margin every slack must exceed for a phase-1 point to count as strictly
/// feasible.
inline constexpr double kPhase1Margin = 1e-9;

/// Minimizes s subject to f_i(x) <= u_i + s and a.x <= r + s with the box
/// kept hard (and s >= -1). The program's objective is ignored.
Phase1Result phase1(const SmoothConvexProgram& program, const Vector& guess,
                    const SolverConfig& config = {});

}  // namespace radopf
