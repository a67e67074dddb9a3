#include "radopf/algorithm.hpp"

#include "radopf/errors.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace radopf {

std::string_view to_string(ObjectiveKind kind) {
    switch (kind) {
        case ObjectiveKind::Loss: return "loss";
        case ObjectiveKind::LinearCost: return "cost";
        case ObjectiveKind::StateEstimation: return "estimate";
    }
    return "unknown";
}

std::string_view to_string(Convexity c) {
    return c == Convexity::Convex ? "convex" : "nonconvex_smooth";
}

Objective Objective::loss() { return Objective{}; }

Objective Objective::linear_cost(Vector coefficients) {
    if ((coefficients.array() < 0.0).any() || !coefficients.allFinite()) {
        throw std::invalid_argument("linear cost coefficients must be finite and nonnegative");
    }
    Objective obj;
    obj.kind_ = ObjectiveKind::LinearCost;
    obj.coefficients_ = std::move(coefficients);
    return obj;
}

Objective Objective::linear_cost(const NetworkCase& net) {
    Vector c(static_cast<Eigen::Index>(net.bus_count()));
    for (std::size_t i = 0; i < net.bus_count(); ++i) c[i] = net.buses()[i].cost_coeff;
    return linear_cost(std::move(c));
}

Objective Objective::state_estimation(MeasurementSet measurements) {
    if (measurements.p_hat.size() != measurements.q_hat.size()) {
        throw DimensionMismatch("p_hat and q_hat differ in length");
    }
    Objective obj;
    obj.kind_ = ObjectiveKind::StateEstimation;
    obj.measurements_ = std::move(measurements);
    return obj;
}

namespace {

Vector weights(const Objective& obj, const NetworkCase& net) {
    if (obj.coefficients().size() == 0) return Vector::Ones(static_cast<Eigen::Index>(net.bus_count()));
    if (static_cast<std::size_t>(obj.coefficients().size()) != net.bus_count()) {
        throw DimensionMismatch("cost coefficients do not match the bus count");
    }
    return obj.coefficients();
}

Vector measurement_residual(const MeasurementSet& m, const NetworkCase& net, const ZVector& z) {
    const auto n = static_cast<Eigen::Index>(net.bus_count());
    if (m.p_hat.size() != n) throw DimensionMismatch("measurements do not match the bus count");
    const auto inj = injections(net, z);
    Vector r(2 * n);
    r.head(n) = m.p_hat - inj.p;
    r.tail(n) = m.q_hat - inj.q;
    return r;
}

}  // namespace

double Objective::value(const NetworkCase& net, const ZVector& z) const {
    if (kind_ == ObjectiveKind::StateEstimation) {
        return measurement_residual(measurements_, net, z).squaredNorm();
    }
    return weights(*this, net).dot(injections(net, z).p);
}

ObjectiveFunction Objective::callbacks(const NetworkCase& net) const {
    const NetworkCase* n = &net;
    if (kind_ == ObjectiveKind::StateEstimation) {
        const MeasurementSet m = measurements_;
        return {
            [n, m](const Vector& z) { return measurement_residual(m, *n, z).squaredNorm(); },
            [n, m](const Vector& z) {
                const Matrix jac = injection_jacobian(*n, z);
                return Vector(-2.0 * jac.transpose() * measurement_residual(m, *n, z));
            },
            [n](const Vector& z) {
                const Matrix jac = injection_jacobian(*n, z);
                return Matrix(2.0 * jac.transpose() * jac);
            },
        };
    }

    // sum_i w_i p_i is separable per edge: (w_t + w_h) g (1 - c) + (w_t - w_h) b z.
    const Vector w = weights(*this, net);
    const auto e_count = static_cast<Eigen::Index>(net.edge_count());
    Vector curv(e_count);
    Vector lin(e_count);
    for (Eigen::Index e = 0; e < e_count; ++e) {
        const auto& edge = net.edges()[static_cast<std::size_t>(e)];
        const double wt = w[static_cast<Eigen::Index>(net.tail(static_cast<std::size_t>(e)))];
        const double wh = w[static_cast<Eigen::Index>(net.head(static_cast<std::size_t>(e)))];
        curv[e] = (wt + wh) * edge.g;
        lin[e] = (wt - wh) * edge.b;
    }
    return {
        [n, w](const Vector& z) { return w.dot(injections(*n, z).p); },
        [curv, lin](const Vector& z) {
            Vector g(z.size());
            for (Eigen::Index e = 0; e < z.size(); ++e) {
                const double c = std::sqrt(1.0 - z[e] * z[e]);
                g[e] = curv[e] * z[e] / c + lin[e];
            }
            return g;
        },
        [curv](const Vector& z) {
            Vector d(z.size());
            for (Eigen::Index e = 0; e < z.size(); ++e) {
                const double c = std::sqrt(1.0 - z[e] * z[e]);
                d[e] = curv[e] / (c * c * c);
            }
            return Matrix(d.asDiagonal());
        },
    };
}

Convexity classify_objective(const Objective& objective) {
    return objective.kind() == ObjectiveKind::StateEstimation ? Convexity::NonconvexSmooth
                                                              : Convexity::Convex;
}

void AlgorithmConfig::check() const {
    if (!(eps > 0.0) || max_outer < 1) throw std::invalid_argument("invalid algorithm configuration");
    solver.check();
}

// ---------------------------------------------------------------------------

namespace {

bool strictly_feasible(const NetworkCase& net, const ZVector& z, double margin) {
    return check_original_feasibility(net, z, 0.0).max_violation < -margin;
}

// Maximizer of the (convex, separable) injection over the angle box on the
// incident coordinates; every edge term peaks at an interval endpoint.
ZVector injection_maximizer_in_box(const NetworkCase& net, std::size_t bus, InjectionKind kind,
                                   const ZVector& base, const ZBounds& box) {
    ZVector z = base;
    for (const auto& inc : net.incident(bus)) {
        ZVector lo = z;
        ZVector hi = z;
        lo[inc.edge] = box.lower[inc.edge];
        hi[inc.edge] = box.upper[inc.edge];
        z[inc.edge] = injection(net, bus, kind, lo) >= injection(net, bus, kind, hi)
                          ? box.lower[inc.edge]
                          : box.upper[inc.edge];
    }
    return z;
}

// Point on the segment from `inside` (f <= u) to `outside` (f > u) where f = u.
ZVector boundary_on_segment(const NetworkCase& net, std::size_t bus, InjectionKind kind,
                            double u, const ZVector& inside, const ZVector& outside) {
    double lo = 0.0;
    double hi = 1.0;
    for (int it = 0; it < 200 && hi - lo > 1e-17; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (injection(net, bus, kind, inside + mid * (outside - inside)) <= u) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return inside + hi * (outside - inside);
}

// Hyperplanes for a phase-1 round anchored at an arbitrary guess.
std::vector<Hyperplane> anchor_hyperplanes(const NetworkCase& net, const ZVector& guess,
                                           const SolverConfig& solver) {
    const auto box = z_bounds(net);
    std::vector<Hyperplane> planes;
    for (std::size_t bus = 0; bus < net.bus_count(); ++bus) {
        for (const auto kind : {InjectionKind::Active, InjectionKind::Reactive}) {
            const double bound = net.lower_bound(bus, kind);
            if (bound == -kInf || min_injection(net, bus, kind) >= bound) continue;

            if (injection(net, bus, kind, guess) > bound) {
                const auto bp = project_lower_bound(net, bus, kind, guess, solver);
                planes.push_back(hyperplane_at(net, bus, kind, bp.point, bound));
                continue;
            }

            const ZVector peak = injection_maximizer_in_box(net, bus, kind, guess, box);
            if (!(injection(net, bus, kind, peak) > bound)) {
                std::ostringstream msg;
                msg << to_string(kind) << "_min of bus " << net.buses()[bus].id
                    << " cannot be met inside the angle box";
                throw Infeasible(msg.str(), bound - injection(net, bus, kind, peak));
            }
            const ZVector zb = boundary_on_segment(net, bus, kind, bound, guess, peak);
            planes.push_back(hyperplane_at(net, bus, kind, zb, bound));
        }
    }
    return planes;
}

}  // namespace

ZVector initial_point(const NetworkCase& net, const AlgorithmConfig& config) {
    config.check();
    const auto e_count = static_cast<Eigen::Index>(net.edge_count());
    ZVector guess = ZVector::Zero(e_count);
    if (strictly_feasible(net, guess, kStrictMargin)) return guess;

    const auto box = z_bounds(net);
    for (Eigen::Index e = 0; e < e_count; ++e) {
        if (!(box.lower[e] < 0.0 && 0.0 < box.upper[e])) guess[e] = 0.5 * (box.lower[e] + box.upper[e]);
    }

    double best = check_original_feasibility(net, guess, 0.0).max_violation;
    for (int round = 0; round < 5; ++round) {
        auto planes = anchor_hyperplanes(net, guess, config.solver);
        auto restricted = build_restricted(net, std::move(planes), std::nullopt);
        Phase1Result p1;
        try {
            p1 = phase1(restricted.program, guess, config.solver);
        } catch (const Infeasible&) {
            break;  // degenerate angle box
        }
        const double violation = check_original_feasibility(net, p1.x, 0.0).max_violation;
        if (p1.feasible && violation < -kStrictMargin) return p1.x;
        best = std::min(best, violation);
        guess = p1.x;
    }
    std::ostringstream msg;
    msg << "no strictly feasible point found (best max violation " << best << ")";
    throw Infeasible(msg.str(), best);
}

OpfResult solve_opf(const NetworkCase& net, const Objective& objective, const ZVector& z_init,
                    const AlgorithmConfig& config) {
    config.check();
    if (static_cast<std::size_t>(z_init.size()) != net.edge_count()) {
        throw DimensionMismatch("initial point has the wrong length");
    }
    if (!strictly_feasible(net, z_init, 0.0)) {
        throw NotStrictlyFeasible("initial point is not strictly feasible");
    }

    using clock = std::chrono::steady_clock;
    OpfResult out;
    ZVector anchor = z_init;
    std::optional<double> previous;
    const auto callbacks = objective.callbacks(net);

    for (int k = 0; k < config.max_outer; ++k) {
        const auto started = clock::now();
        auto fail = [k](const std::string& what) {
            return "outer iteration " + std::to_string(k) + ": " + what;
        };

        BasePoints base;
        try {
            base = base_points(net, anchor, config.solver);
        } catch (const NotStrictlyFeasible& e) {
            throw NotStrictlyFeasible(fail(e.what()));
        } catch (const NumericalFailure& e) {
            throw NumericalFailure(fail(e.what()));
        }
        const auto restricted = build_restricted(net, base, callbacks);

        Vector start = anchor;
        if (!(restricted.program.min_slack(start) > 0.0)) {
            // Rounding can put the anchor on a fresh halfspace; recenter.
            const auto p1 = phase1(restricted.program, start, config.solver);
            if (!p1.feasible) throw NumericalFailure(fail("restriction lost its anchor point"));
            start = p1.x;
        }
        const auto res = solve(restricted.program, start, config.solver);
        if (res.status != SolverStatus::Optimal) {
            throw NumericalFailure(fail("restricted solve stalled"));
        }

        IterationRecord rec;
        rec.k = k;
        rec.z = res.x;
        rec.objective = objective.value(net, res.x);
        const auto feas = check_original_feasibility(net, res.x, kIterateFeasibilityTol);
        rec.max_violation = feas.max_violation;
        if (!feas.feasible) {
            throw FeasibilityRegression(fail("iterate violates " + feas.violations.front().id));
        }
        for (const auto& bp : base.points) rec.projection_residuals.push_back(bp.boundary_residual);
        rec.newton_iterations = res.newton_iterations;
        rec.wall_ms = std::chrono::duration<double, std::milli>(clock::now() - started).count();
        out.trace.iterations.push_back(rec);
        out.base = std::move(base);

        const double current = rec.objective;
        anchor = res.x;
        if (previous) {
            const double change = current - *previous;
            if (change * change <= config.eps) {
                out.trace.converged = true;
                break;
            }
        }
        previous = current;
    }

    out.objective = out.trace.iterations.back().objective;
    out.point = make_operating_point(net, out.trace.iterations.back().z);
    return out;
}

MeasurementSet simulate_measurements(const NetworkCase& net, const ZVector& z_true,
                                     double noise_sigma, std::uint64_t seed) {
    if (!(noise_sigma >= 0.0)) throw std::invalid_argument("noise sigma must be nonnegative");
    const auto inj = injections(net, z_true);
    MeasurementSet m{inj.p, inj.q, noise_sigma, seed};
    if (noise_sigma > 0.0) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> noise(0.0, noise_sigma);
        for (Eigen::Index i = 0; i < m.p_hat.size(); ++i) m.p_hat[i] += noise(rng);
        for (Eigen::Index i = 0; i < m.q_hat.size(); ++i) m.q_hat[i] += noise(rng);
    }
    return m;
}

}  // namespace radopf
