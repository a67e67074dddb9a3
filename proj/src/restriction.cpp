#include "radopf/restriction.hpp"

#include "radopf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace radopf {

const BasePoint* BasePoints::find(std::size_t bus, InjectionKind kind) const {
    for (const auto& p : points) {
        if (p.bus == bus && p.kind == kind) return &p;
    }
    return nullptr;
}

double TangencyCertificate::worst_overestimate() const {
    double worst = -kInf;
    for (const auto& e : entries) worst = std::max(worst, e.max_overestimate);
    return worst;
}

SmoothFunction injection_function(const NetworkCase& net, std::size_t bus, InjectionKind kind) {
    const NetworkCase* n = &net;
    return {
        [n, bus, kind](const Vector& z) { return injection(*n, bus, kind, z); },
        [n, bus, kind](const Vector& z) { return injection_gradient(*n, bus, kind, z); },
        [n, bus, kind](const Vector& z) { return injection_hessian_diag(*n, bus, kind, z); },
    };
}

bool lower_bound_set_empty(const NetworkCase& net, std::size_t bus, InjectionKind kind) {
    const double bound = net.lower_bound(bus, kind);
    if (bound == -kInf) return true;
    return min_injection(net, bus, kind) > bound;
}

namespace {

std::string owner_label(const NetworkCase& net, std::size_t bus, InjectionKind kind) {
    return std::string(to_string(kind)) + "_min bus " + std::to_string(net.buses()[bus].id);
}

// The injection restricted to its incident coordinates: sum_k curv_k (1 - c_k) + lin_k y_k,
// with the incidence sign folded into lin_k.
struct ReducedInjection {
    std::vector<std::size_t> edges;
    Vector curv;
    Vector lin;

    ReducedInjection(const NetworkCase& net, std::size_t bus, InjectionKind kind) {
        const auto inc = net.incident(bus);
        curv.resize(static_cast<Eigen::Index>(inc.size()));
        lin.resize(static_cast<Eigen::Index>(inc.size()));
        for (std::size_t k = 0; k < inc.size(); ++k) {
            const auto& e = net.edges()[inc[k].edge];
            edges.push_back(inc[k].edge);
            const auto i = static_cast<Eigen::Index>(k);
            if (kind == InjectionKind::Active) {
                curv[i] = e.g;
                lin[i] = inc[k].sign * e.b;
            } else {
                curv[i] = e.b;
                lin[i] = -inc[k].sign * e.g;
            }
        }
    }

    SmoothFunction function() const {
        const Vector a = curv;
        const Vector s = lin;
        auto cosines = [](const Vector& y, double margin) {
            Vector c(y.size());
            for (Eigen::Index k = 0; k < y.size(); ++k) {
                if (!(std::abs(y[k]) < 1.0 - margin)) throw DomainError("|z| too close to 1");
                c[k] = std::sqrt(1.0 - y[k] * y[k]);
            }
            return c;
        };
        return {
            [a, s, cosines](const Vector& y) {
                const Vector c = cosines(y, 0.0);
                return a.dot(Vector::Ones(y.size()) - c) + s.dot(y);
            },
            [a, s, cosines](const Vector& y) {
                const Vector c = cosines(y, kDomainMargin);
                return Vector(a.cwiseProduct(y).cwiseQuotient(c) + s);
            },
            [a, cosines](const Vector& y) {
                const Vector c = cosines(y, kDomainMargin);
                return Vector(a.array() / c.array().cube());
            },
        };
    }

    Vector gather(const ZVector& z) const {
        Vector y(static_cast<Eigen::Index>(edges.size()));
        for (std::size_t k = 0; k < edges.size(); ++k) y[static_cast<Eigen::Index>(k)] = z[edges[k]];
        return y;
    }

    ZVector scatter(const ZVector& base, const Vector& y) const {
        ZVector z = base;
        for (std::size_t k = 0; k < edges.size(); ++k) z[edges[k]] = y[static_cast<Eigen::Index>(k)];
        return z;
    }
};

}  // namespace

BasePoint project_lower_bound(const NetworkCase& net, std::size_t bus, InjectionKind kind,
                              const ZVector& z0, const SolverConfig& config) {
    const double bound = net.lower_bound(bus, kind);
    const ReducedInjection reduced(net, bus, kind);
    const auto f = reduced.function();
    const auto d = static_cast<Eigen::Index>(reduced.edges.size());
    const Vector lo = Vector::Constant(d, -1.0 + kProjectionDomainMargin);
    const Vector hi = Vector::Constant(d, 1.0 - kProjectionDomainMargin);

    const Vector y0 = reduced.gather(z0);
    Vector hint = reduced.gather(injection_minimizer(net, bus, kind, z0));
    const double pad = 10.0 * kProjectionDomainMargin;
    hint = hint.cwiseMax(-1.0 + pad).cwiseMin(1.0 - pad);
    if (!(f.value(hint) < bound)) {
        throw NumericalFailure("lower-bound set of " + owner_label(net, bus, kind) +
                               " has no interior away from |z| = 1");
    }

    Vector y;
    try {
        y = project_euclidean(f, bound, y0, hint, config, &lo, &hi);
    } catch (const Error& e) {
        throw NumericalFailure("projection for " + owner_label(net, bus, kind) +
                               " failed: " + e.what());
    }
    BasePoint bp;
    bp.bus = bus;
    bp.kind = kind;
    bp.point = reduced.scatter(z0, y);
    bp.bound = bound;
    bp.boundary_residual = std::abs(injection(net, bus, kind, bp.point) - bound);
    return bp;
}

BasePoints base_points(const NetworkCase& net, const ZVector& z0, const SolverConfig& config) {
    const auto feas = check_original_feasibility(net, z0, 0.0);
    if (!(feas.max_violation < 0.0)) {
        std::ostringstream msg;
        msg << "base point anchor is not strictly feasible (max residual " << feas.max_violation
            << ")";
        throw NotStrictlyFeasible(msg.str());
    }

    BasePoints out;
    for (std::size_t bus = 0; bus < net.bus_count(); ++bus) {
        for (const auto kind : {InjectionKind::Active, InjectionKind::Reactive}) {
            const double bound = net.lower_bound(bus, kind);
            if (bound == -kInf) {
                out.dropped.push_back({bus, kind, "no lower bound"});
                continue;
            }
            const double min_value = min_injection(net, bus, kind);
            if (min_value >= bound) {
                out.dropped.push_back({bus, kind, min_value > bound ? "empty" : "vacuous"});
                continue;
            }
            auto bp = project_lower_bound(net, bus, kind, z0, config);
            if (!(bp.boundary_residual <= kBoundaryTolerance)) {
                std::ostringstream msg;
                msg << "projection for " << owner_label(net, bus, kind)
                    << " missed the boundary by " << bp.boundary_residual;
                throw NumericalFailure(msg.str());
            }
            out.points.push_back(std::move(bp));
        }
    }
    return out;
}

Hyperplane hyperplane_at(const NetworkCase& net, std::size_t bus, InjectionKind kind,
                         const ZVector& point, double bound) {
    Hyperplane h;
    h.normal = injection_gradient(net, bus, kind, point);
    if (!(h.normal.norm() > 1e-12)) {
        throw DegenerateGradient("gradient of " + owner_label(net, bus, kind) +
                                 " vanishes at the base point");
    }
    h.offset = injection(net, bus, kind, point) - h.normal.dot(point);
    h.bound = bound;
    h.bus = bus;
    h.kind = kind;
    h.base_point = point;
    return h;
}

std::vector<Hyperplane> hyperplanes(const NetworkCase& net, const BasePoints& base) {
    std::vector<Hyperplane> out;
    out.reserve(base.points.size());
    for (const auto& bp : base.points) {
        out.push_back(hyperplane_at(net, bp.bus, bp.kind, bp.point, bp.bound));
    }
    return out;
}

RestrictedProblem build_restricted(const NetworkCase& net, std::vector<Hyperplane> planes,
                                   std::optional<ObjectiveFunction> objective) {
    RestrictedProblem out;
    out.program = make_program(net.edge_count());
    const auto box = z_bounds(net);
    out.program.lower = box.lower;
    out.program.upper = box.upper;
    out.program.objective = std::move(objective);

    for (std::size_t bus = 0; bus < net.bus_count(); ++bus) {
        for (const auto kind : {InjectionKind::Active, InjectionKind::Reactive}) {
            const double upper = net.upper_bound(bus, kind);
            if (!std::isfinite(upper)) continue;
            out.program.smooth.push_back(
                {injection_function(net, bus, kind), upper,
                 std::string(to_string(kind)) + "_max bus " + std::to_string(net.buses()[bus].id)});
            out.upper_owners.emplace_back(bus, kind);
        }
    }
    // h(z) >= bound  <=>  -normal . z <= offset - bound
    for (const auto& h : planes) {
        out.program.linear.push_back({-h.normal, h.offset - h.bound, owner_label(net, h.bus, h.kind)});
    }
    out.hyperplanes = std::move(planes);
    return out;
}

RestrictedProblem build_restricted(const NetworkCase& net, const BasePoints& base,
                                   std::optional<ObjectiveFunction> objective) {
    return build_restricted(net, hyperplanes(net, base), std::move(objective));
}

bool satisfies_restriction(const NetworkCase& net, const std::vector<Hyperplane>& planes,
                           const ZVector& z, double tol) {
    const auto box = z_bounds(net);
    for (std::size_t e = 0; e < net.edge_count(); ++e) {
        if (z[e] < box.lower[e] - tol || z[e] > box.upper[e] + tol) return false;
    }
    const auto inj = injections(net, z);
    for (std::size_t i = 0; i < net.bus_count(); ++i) {
        const auto& b = net.buses()[i];
        if (inj.p[i] > b.p_max + tol || inj.q[i] > b.q_max + tol) return false;
    }
    for (const auto& h : planes) {
        if (h(z) < h.bound - tol) return false;
    }
    return true;
}

TangencyCertificate certify(const NetworkCase& net, const BasePoints& base,
                            const std::vector<Hyperplane>& planes, std::size_t sample_count,
                            std::uint64_t seed) {
    TangencyCertificate cert;
    cert.samples = sample_count;
    for (const auto& h : planes) {
        TangencyEntry entry;
        entry.bus = h.bus;
        entry.kind = h.kind;
        const double f_base = injection(net, h.bus, h.kind, h.base_point);
        entry.tangency_gap = std::abs(h(h.base_point) - f_base);
        entry.boundary_residual = std::abs(f_base - h.bound);
        cert.entries.push_back(entry);
    }

    const auto box = z_bounds(net);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    ZVector z(static_cast<Eigen::Index>(net.edge_count()));
    for (std::size_t s = 0; s < sample_count; ++s) {
        for (Eigen::Index e = 0; e < z.size(); ++e) {
            z[e] = box.lower[e] + unit(rng) * (box.upper[e] - box.lower[e]);
        }
        const auto inj = injections(net, z);
        for (std::size_t k = 0; k < planes.size(); ++k) {
            const auto& h = planes[k];
            const double f = h.kind == InjectionKind::Active ? inj.p[h.bus] : inj.q[h.bus];
            cert.entries[k].max_overestimate = std::max(cert.entries[k].max_overestimate, h(z) - f);
        }
        for (const auto& d : base.dropped) {
            const double f = d.kind == InjectionKind::Active ? inj.p[d.bus] : inj.q[d.bus];
            if (f < net.lower_bound(d.bus, d.kind)) ++cert.dropped_violations;
        }
        if (satisfies_restriction(net, planes, z)) {
            ++cert.restricted_samples;
            if (!check_original_feasibility(net, z, 0.0).feasible) ++cert.restricted_violations;
        }
    }

    for (const auto& e : cert.entries) {
        if (!(e.max_overestimate <= kUnderestimateTolerance && e.tangency_gap <= kTangencyTolerance &&
              e.boundary_residual <= kBoundaryTolerance)) {
            cert.passed = false;
        }
    }
    if (cert.restricted_violations > 0 || cert.dropped_violations > 0) cert.passed = false;
    return cert;
}

}  // namespace radopf
