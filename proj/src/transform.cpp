#include "radopf/transform.hpp"

#include "radopf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <sstream>

namespace radopf {

namespace {

// Edge term seen from one endpoint: curv * (1 - c) + sign * lin * z.
struct EdgeTerm {
    double curv;
    double lin;
};

EdgeTerm edge_term(const EdgeRecord& e, InjectionKind kind) {
    return kind == InjectionKind::Active ? EdgeTerm{e.g, e.b} : EdgeTerm{e.b, -e.g};
}

void check_size(const NetworkCase& net, const ZVector& z) {
    if (static_cast<std::size_t>(z.size()) != net.edge_count()) {
        std::ostringstream msg;
        msg << "z has length " << z.size() << ", network has " << net.edge_count() << " edges";
        throw DimensionMismatch(msg.str());
    }
}

double cosine(double z) {
    if (!(std::abs(z) <= 1.0)) throw DomainError("|z| > 1");
    return std::sqrt(std::max(0.0, 1.0 - z * z));
}

// Cosine for derivative evaluation; rejects points too close to |z| = 1.
double interior_cosine(double z) {
    if (!(std::abs(z) < 1.0 - kDomainMargin)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "z = " << z << " is within " << kDomainMargin << " of the domain boundary";
        throw DomainError(msg.str());
    }
    return std::sqrt(1.0 - z * z);
}

void check_bus(const NetworkCase& net, std::size_t bus) {
    if (bus >= net.bus_count()) throw UnknownBus("bus position " + std::to_string(bus));
}

}  // namespace

Injections injections(const NetworkCase& net, const ZVector& z) {
    check_size(net, z);
    Injections out{Vector::Zero(net.bus_count()), Vector::Zero(net.bus_count())};
    for (std::size_t e = 0; e < net.edge_count(); ++e) {
        const auto& edge = net.edges()[e];
        const double ze = z[e];
        const double loss = 1.0 - cosine(ze);
        const auto t = net.tail(e);
        const auto h = net.head(e);
        out.p[t] += edge.g * loss + edge.b * ze;
        out.p[h] += edge.g * loss - edge.b * ze;
        out.q[t] += edge.b * loss - edge.g * ze;
        out.q[h] += edge.b * loss + edge.g * ze;
    }
    return out;
}

double injection(const NetworkCase& net, std::size_t bus, InjectionKind kind, const ZVector& z) {
    check_size(net, z);
    check_bus(net, bus);
    double value = 0.0;
    for (const auto& inc : net.incident(bus)) {
        const auto term = edge_term(net.edges()[inc.edge], kind);
        const double ze = z[inc.edge];
        value += term.curv * (1.0 - cosine(ze)) + inc.sign * term.lin * ze;
    }
    return value;
}

Vector injection_gradient(const NetworkCase& net, std::size_t bus, InjectionKind kind,
                          const ZVector& z) {
    check_size(net, z);
    check_bus(net, bus);
    Vector grad = Vector::Zero(net.edge_count());
    for (const auto& inc : net.incident(bus)) {
        const auto term = edge_term(net.edges()[inc.edge], kind);
        const double ze = z[inc.edge];
        grad[inc.edge] = term.curv * ze / interior_cosine(ze) + inc.sign * term.lin;
    }
    return grad;
}

double branch_flow(const NetworkCase& net, const ZVector& z, std::size_t edge) {
    if (edge >= net.edge_count()) throw UnknownEdge("edge " + std::to_string(edge));
    check_size(net, z);
    const auto& e = net.edges()[edge];
    return e.g * (1.0 - cosine(z[edge])) + e.b * z[edge];
}

Matrix injection_jacobian(const NetworkCase& net, const ZVector& z) {
    check_size(net, z);
    const auto n = static_cast<Eigen::Index>(net.bus_count());
    Matrix jac = Matrix::Zero(2 * n, static_cast<Eigen::Index>(net.edge_count()));
    for (std::size_t e = 0; e < net.edge_count(); ++e) {
        const auto& edge = net.edges()[e];
        const auto col = static_cast<Eigen::Index>(e);
        const double ratio = z[e] / interior_cosine(z[e]);
        const auto t = static_cast<Eigen::Index>(net.tail(e));
        const auto h = static_cast<Eigen::Index>(net.head(e));
        jac(t, col) += edge.g * ratio + edge.b;
        jac(h, col) += edge.g * ratio - edge.b;
        jac(n + t, col) += edge.b * ratio - edge.g;
        jac(n + h, col) += edge.b * ratio + edge.g;
    }
    return jac;
}

Vector injection_hessian_diag(const NetworkCase& net, std::size_t bus, InjectionKind kind,
                              const ZVector& z) {
    check_size(net, z);
    check_bus(net, bus);
    Vector diag = Vector::Zero(net.edge_count());
    for (const auto& inc : net.incident(bus)) {
        const auto term = edge_term(net.edges()[inc.edge], kind);
        const double c = interior_cosine(z[inc.edge]);
        diag[inc.edge] = term.curv / (c * c * c);
    }
    return diag;
}

Vector recover_angles(const NetworkCase& net, const ZVector& z) {
    check_size(net, z);
    const std::size_t n = net.bus_count();
    Vector theta = Vector::Zero(n);
    std::vector<bool> done(n, false);
    std::queue<std::size_t> frontier;
    const auto slack = net.slack_index();
    done[slack] = true;
    frontier.push(slack);
    while (!frontier.empty()) {
        const auto bus = frontier.front();
        frontier.pop();
        for (const auto& inc : net.incident(bus)) {
            const double diff = std::asin(std::clamp(z[inc.edge], -1.0, 1.0));
            // diff = theta_tail - theta_head
            const auto other = inc.sign > 0 ? net.head(inc.edge) : net.tail(inc.edge);
            if (done[other]) continue;
            theta[other] = inc.sign > 0 ? theta[bus] - diff : theta[bus] + diff;
            done[other] = true;
            frontier.push(other);
        }
    }
    return theta;
}

OperatingPoint make_operating_point(const NetworkCase& net, const ZVector& z) {
    auto inj = injections(net, z);
    return {z, recover_angles(net, z), std::move(inj.p), std::move(inj.q)};
}

FeasibilityReport check_original_feasibility(const NetworkCase& net, const ZVector& z,
                                             double tol) {
    check_size(net, z);
    FeasibilityReport report;
    auto record = [&](std::string id, double residual) {
        report.max_violation = std::max(report.max_violation, residual);
        if (!(residual <= tol)) report.violations.push_back({std::move(id), residual});
    };

    const auto box = z_bounds(net);
    for (std::size_t e = 0; e < net.edge_count(); ++e) {
        record("z lower bound edge " + std::to_string(e), box.lower[e] - z[e]);
        record("z upper bound edge " + std::to_string(e), z[e] - box.upper[e]);
    }

    // Outside the box injections may be undefined (|z| > 1); report the box only.
    if ((z.array().abs() > 1.0).any()) {
        report.feasible = false;
        return report;
    }

    const auto inj = injections(net, z);
    for (std::size_t i = 0; i < net.bus_count(); ++i) {
        const auto& bus = net.buses()[i];
        const std::string suffix = " bus " + std::to_string(bus.id);
        if (std::isfinite(bus.p_min)) record("p_min" + suffix, bus.p_min - inj.p[i]);
        if (std::isfinite(bus.p_max)) record("p_max" + suffix, inj.p[i] - bus.p_max);
        if (std::isfinite(bus.q_min)) record("q_min" + suffix, bus.q_min - inj.q[i]);
        if (std::isfinite(bus.q_max)) record("q_max" + suffix, inj.q[i] - bus.q_max);
    }
    report.feasible = report.max_violation <= tol;
    return report;
}

double min_injection(const NetworkCase& net, std::size_t bus, InjectionKind kind) {
    check_bus(net, bus);
    double value = 0.0;
    for (const auto& inc : net.incident(bus)) {
        const auto term = edge_term(net.edges()[inc.edge], kind);
        value += term.curv - std::hypot(term.curv, term.lin);
    }
    return value;
}

ZVector injection_minimizer(const NetworkCase& net, std::size_t bus, InjectionKind kind,
                            const ZVector& base) {
    check_size(net, base);
    check_bus(net, bus);
    ZVector z = base;
    for (const auto& inc : net.incident(bus)) {
        const auto term = edge_term(net.edges()[inc.edge], kind);
        const double r = std::hypot(term.curv, term.lin);
        z[inc.edge] = r > 0.0 ? -inc.sign * term.lin / r : 0.0;
    }
    return z;
}

}  // namespace radopf
