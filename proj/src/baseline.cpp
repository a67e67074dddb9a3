#include "radopf/baseline.hpp"

#include "radopf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace radopf {

namespace {

Vector objective_weights(const NetworkCase& net, const Objective& objective) {
    switch (objective.kind()) {
        case ObjectiveKind::Loss: return Vector::Ones(static_cast<Eigen::Index>(net.bus_count()));
        case ObjectiveKind::LinearCost: return objective.coefficients();
        case ObjectiveKind::StateEstimation: break;
    }
    throw std::invalid_argument("relaxation and oracle tolerance need a loss or linear cost");
}

// p_i (or q_i) as constant + a . [R; I].
struct AffineInjection {
    double constant = 0.0;
    Vector a;
};

AffineInjection relaxed_injection(const NetworkCase& net, std::size_t bus, InjectionKind kind) {
    const auto E = static_cast<Eigen::Index>(net.edge_count());
    AffineInjection out{0.0, Vector::Zero(2 * E)};
    for (const auto& inc : net.incident(bus)) {
        const auto& e = net.edges()[inc.edge];
        const auto k = static_cast<Eigen::Index>(inc.edge);
        const double curv = kind == InjectionKind::Active ? e.g : e.b;
        const double lin = kind == InjectionKind::Active ? inc.sign * e.b : -inc.sign * e.g;
        out.constant += curv;
        out.a[k] -= curv;
        out.a[E + k] += lin;
    }
    return out;
}

}  // namespace

RelaxationResult socp_relaxation(const NetworkCase& net, const Objective& objective,
                                 const SolverConfig& config) {
    const Vector w = objective_weights(net, objective);
    const auto E = static_cast<Eigen::Index>(net.edge_count());
    const auto box = z_bounds(net);

    SmoothConvexProgram prog = make_program(static_cast<std::size_t>(2 * E));
    prog.lower.head(E).setZero();
    prog.upper.head(E).setOnes();
    prog.lower.tail(E) = box.lower;
    prog.upper.tail(E) = box.upper;

    // Objective sum_i w_i p_i is affine in [R; I].
    double constant = 0.0;
    Vector c = Vector::Zero(2 * E);
    std::vector<AffineInjection> p_affine;
    for (std::size_t i = 0; i < net.bus_count(); ++i) {
        auto aff = relaxed_injection(net, i, InjectionKind::Active);
        constant += w[static_cast<Eigen::Index>(i)] * aff.constant;
        c += w[static_cast<Eigen::Index>(i)] * aff.a;
        p_affine.push_back(std::move(aff));
    }
    prog.objective = ObjectiveFunction{
        [constant, c](const Vector& x) { return constant + c.dot(x); },
        [c](const Vector&) { return c; },
        [E](const Vector&) { return Matrix(Matrix::Zero(2 * E, 2 * E)); },
    };

    for (Eigen::Index e = 0; e < E; ++e) {
        SmoothFunction disk{
            [e, E](const Vector& x) { return x[e] * x[e] + x[E + e] * x[E + e]; },
            [e, E](const Vector& x) {
                Vector g = Vector::Zero(x.size());
                g[e] = 2.0 * x[e];
                g[E + e] = 2.0 * x[E + e];
                return g;
            },
            [e, E](const Vector& x) {
                Vector h = Vector::Zero(x.size());
                h[e] = 2.0;
                h[E + e] = 2.0;
                return h;
            },
        };
        prog.smooth.push_back({std::move(disk), 1.0, "disk edge " + std::to_string(e)});
    }

    for (std::size_t i = 0; i < net.bus_count(); ++i) {
        const auto& bus = net.buses()[i];
        for (const auto kind : {InjectionKind::Active, InjectionKind::Reactive}) {
            const auto aff = kind == InjectionKind::Active ? p_affine[i] : relaxed_injection(net, i, kind);
            const std::string name = std::string(to_string(kind)) + " bus " + std::to_string(bus.id);
            const double lo = net.lower_bound(i, kind);
            const double hi = net.upper_bound(i, kind);
            if (std::isfinite(hi)) prog.linear.push_back({aff.a, hi - aff.constant, name + " max"});
            if (std::isfinite(lo)) prog.linear.push_back({-aff.a, aff.constant - lo, name + " min"});
        }
    }

    Vector guess(2 * E);
    guess.head(E).setConstant(0.99);
    guess.tail(E).setZero();
    const auto p1 = phase1(prog, guess, config);
    if (!p1.feasible) {
        throw Infeasible("relaxation has no strictly feasible point", p1.slack_lower_bound);
    }
    const auto res = solve(prog, p1.x, config);
    if (res.status != SolverStatus::Optimal) throw NumericalFailure("relaxation solve stalled");

    RelaxationResult out;
    out.R = res.x.head(E);
    out.I = res.x.tail(E);
    out.objective_value = res.objective_value;
    out.newton_iterations = res.newton_iterations + p1.newton_iterations;
    out.exactness_gap = E > 0 ? (1.0 - out.R.array().square() - out.I.array().square()).maxCoeff() : 0.0;
    if (out.exactness_gap <= kExactnessTolerance) out.recovered_z = out.I;
    return out;
}

// ---------------------------------------------------------------------------

namespace {

Vector axis(double lo, double hi, int resolution) {
    Vector a(resolution);
    for (int k = 0; k < resolution; ++k) {
        a[k] = resolution == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / (resolution - 1);
    }
    return a;
}

}  // namespace

OracleResult grid_oracle(const NetworkCase& net, const Objective& objective, int resolution) {
    if (net.edge_count() > kOracleMaxEdges) {
        throw TooLarge("grid oracle handles at most 3 edges, case has " +
                       std::to_string(net.edge_count()));
    }
    if (resolution < 2 || resolution > kOracleMaxResolution) {
        throw std::invalid_argument("grid resolution must be in [2, 2001]");
    }
    const auto box = z_bounds(net);
    const auto E = static_cast<Eigen::Index>(net.edge_count());
    std::vector<Vector> axes;
    for (Eigen::Index e = 0; e < E; ++e) axes.push_back(axis(box.lower[e], box.upper[e], resolution));

    OracleResult out;
    out.resolution = resolution;
    std::vector<int> idx(static_cast<std::size_t>(E), 0);
    ZVector z(E);
    while (true) {
        for (Eigen::Index e = 0; e < E; ++e) z[e] = axes[static_cast<std::size_t>(e)][idx[static_cast<std::size_t>(e)]];
        if (check_original_feasibility(net, z, 0.0).feasible) {
            ++out.feasible_count;
            const double v = objective.value(net, z);
            if (v < out.best_objective) {
                out.best_objective = v;
                out.argmin = z;
            }
        }
        // Odometer increment, last edge fastest.
        Eigen::Index e = E - 1;
        while (e >= 0) {
            auto& k = idx[static_cast<std::size_t>(e)];
            if (++k < resolution) break;
            k = 0;
            --e;
        }
        if (e < 0) break;
    }
    return out;
}

double grid_tolerance(const NetworkCase& net, const Objective& objective, int resolution) {
    const Vector w = objective_weights(net, objective);
    const auto box = z_bounds(net);
    double tol = 0.0;
    for (std::size_t e = 0; e < net.edge_count(); ++e) {
        const auto& edge = net.edges()[e];
        const double wt = w[static_cast<Eigen::Index>(net.tail(e))];
        const double wh = w[static_cast<Eigen::Index>(net.head(e))];
        const double zmax = std::max(std::abs(box.lower[e]), std::abs(box.upper[e]));
        const double lipschitz =
            (wt + wh) * edge.g * zmax / std::sqrt(1.0 - zmax * zmax) + std::abs(wt - wh) * edge.b;
        tol += lipschitz * (box.upper[e] - box.lower[e]) / std::max(1, resolution - 1);
    }
    return tol;
}

// ---------------------------------------------------------------------------

std::size_t RasterGrid::count_original() const {
    return static_cast<std::size_t>(std::count(original.begin(), original.end(), 1));
}

std::size_t RasterGrid::count_restricted() const {
    return static_cast<std::size_t>(std::count(restricted.begin(), restricted.end(), 1));
}

bool RasterGrid::near_boundary(int i, int j) const {
    const auto flag = original[index(i, j)];
    for (int di = -1; di <= 1; ++di) {
        for (int dj = -1; dj <= 1; ++dj) {
            const int a = i + di;
            const int b = j + dj;
            if (a < 0 || b < 0 || a >= resolution || b >= resolution) continue;
            if (original[index(a, b)] != flag) return true;
        }
    }
    return false;
}

std::size_t RasterGrid::subset_violations(bool interior_only) const {
    if (!has_restricted) return 0;
    std::size_t count = 0;
    for (int i = 0; i < resolution; ++i) {
        for (int j = 0; j < resolution; ++j) {
            const auto k = index(i, j);
            if (!restricted[k] || original[k]) continue;
            if (interior_only && near_boundary(i, j)) continue;
            ++count;
        }
    }
    return count;
}

Vector RasterGrid::theta_a() const { return axis_a.array().asin(); }
Vector RasterGrid::theta_b() const { return axis_b.array().asin(); }

RasterGrid raster_region(const NetworkCase& net, std::size_t edge_a, std::size_t edge_b,
                         int resolution, const ZVector& fixed, const std::vector<Hyperplane>* planes) {
    if (edge_a >= net.edge_count() || edge_b >= net.edge_count()) {
        throw UnknownEdge("raster edge out of range");
    }
    if (edge_a == edge_b) throw std::invalid_argument("raster edges must be distinct");
    if (resolution < 2) throw std::invalid_argument("raster resolution must be at least 2");
    if (static_cast<std::size_t>(fixed.size()) != net.edge_count()) {
        throw DimensionMismatch("fixed values must cover every edge");
    }

    const auto box = z_bounds(net);
    RasterGrid grid;
    grid.edge_a = edge_a;
    grid.edge_b = edge_b;
    grid.resolution = resolution;
    grid.axis_a = axis(box.lower[edge_a], box.upper[edge_a], resolution);
    grid.axis_b = axis(box.lower[edge_b], box.upper[edge_b], resolution);
    grid.fixed = fixed;
    const auto cells = static_cast<std::size_t>(resolution) * static_cast<std::size_t>(resolution);
    grid.original.assign(cells, 0);
    grid.restricted.assign(cells, 0);
    grid.has_restricted = planes != nullptr;

    ZVector z = fixed;
    for (int i = 0; i < resolution; ++i) {
        for (int j = 0; j < resolution; ++j) {
            z[edge_a] = grid.axis_a[i];
            z[edge_b] = grid.axis_b[j];
            const auto k = grid.index(i, j);
            const bool in_domain = (z.array().abs() <= 1.0).all();
            grid.original[k] = in_domain && check_original_feasibility(net, z, 0.0).feasible;
            if (planes) grid.restricted[k] = in_domain && satisfies_restriction(net, *planes, z);
        }
    }
    return grid;
}

std::string raster_csv(const RasterGrid& grid) {
    std::ostringstream out;
    out.precision(17);
    out << "z_a,z_b,original,restricted\n";
    for (int i = 0; i < grid.resolution; ++i) {
        for (int j = 0; j < grid.resolution; ++j) {
            const auto k = grid.index(i, j);
            out << grid.axis_a[i] << ',' << grid.axis_b[j] << ',' << int(grid.original[k]) << ','
                << int(grid.restricted[k]) << '\n';
        }
    }
    return out.str();
}

}  // namespace radopf
