#include "support.hpp"

#include "radopf/errors.hpp"
#include "radopf/transform.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace radopf;
using doctest::Approx;

TEST_CASE("injections on the 2-bus fixture") {
    const auto net = support::two_bus();
    ZVector z(1);

    z << 0.0;
    auto inj = injections(net, z);
    CHECK(inj.p.cwiseAbs().maxCoeff() == 0.0);
    CHECK(inj.q.cwiseAbs().maxCoeff() == 0.0);

    z << 0.6;
    inj = injections(net, z);
    CHECK(inj.p[0] == Approx(1.4).epsilon(1e-14));
    CHECK(inj.p[1] == Approx(-1.0).epsilon(1e-14));
    CHECK(inj.q[0] == Approx(-0.2).epsilon(1e-14));
    CHECK(inj.q[1] == Approx(1.0).epsilon(1e-14));
    CHECK(branch_flow(net, z, 0) == Approx(1.4));
    CHECK_THROWS_AS(branch_flow(net, z, 3), UnknownEdge);
}

TEST_CASE("injections agree with the phasor oracle on random trees") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const auto c = support::random_bounded_case(rng, 2 + trial % 12, 0.1, 0.5, 0.0);
        ZVector z(static_cast<Eigen::Index>(c.net.edge_count()));
        for (auto& v : z) v = support::uniform(rng, -0.9, 0.9);
        const auto inj = injections(c.net, z);
        const auto ref = support::phasor_at_z(c.net, z);
        CHECK((inj.p - ref.p).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((inj.q - ref.q).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("jacobian examples") {
    const auto net = support::two_bus();
    ZVector z(1);
    z << 0.0;
    auto J = injection_jacobian(net, z);
    REQUIRE(J.rows() == 4);
    REQUIRE(J.cols() == 1);
    CHECK(J(0, 0) == Approx(2.0));
    CHECK(J(1, 0) == Approx(-2.0));
    CHECK(J(2, 0) == Approx(-1.0));
    CHECK(J(3, 0) == Approx(1.0));
    z << 0.6;
    J = injection_jacobian(net, z);
    CHECK(J(0, 0) == Approx(2.75).epsilon(1e-14));
}

TEST_CASE("derivatives match central differences") {
    std::mt19937_64 rng(5);
    const double h = 1e-6;
    for (int trial = 0; trial < 20; ++trial) {
        const auto c = support::random_bounded_case(rng, 3 + trial % 8, 0.1, 0.5, 0.0);
        const auto& net = c.net;
        const auto E = static_cast<Eigen::Index>(net.edge_count());
        ZVector z(E);
        for (auto& v : z) v = support::uniform(rng, -0.85, 0.85);
        const auto J = injection_jacobian(net, z);
        for (Eigen::Index e = 0; e < E; ++e) {
            ZVector zp = z, zm = z;
            zp[e] += h;
            zm[e] -= h;
            const auto ip = injections(net, zp);
            const auto im = injections(net, zm);
            for (std::size_t i = 0; i < net.bus_count(); ++i) {
                const auto k = static_cast<Eigen::Index>(i);
                const double fd_p = (ip.p[k] - im.p[k]) / (2 * h);
                const double fd_q = (ip.q[k] - im.q[k]) / (2 * h);
                CHECK(std::abs(J(k, e) - fd_p) <= 1e-6 * std::max(1.0, std::abs(fd_p)));
                CHECK(std::abs(J(E > 0 ? static_cast<Eigen::Index>(net.bus_count()) + k : k, e) - fd_q) <=
                      1e-6 * std::max(1.0, std::abs(fd_q)));
                for (const auto kind : {InjectionKind::Active, InjectionKind::Reactive}) {
                    const auto gp = injection_gradient(net, i, kind, zp);
                    const auto gm = injection_gradient(net, i, kind, zm);
                    const double fd = (gp[e] - gm[e]) / (2 * h);
                    const double hd = injection_hessian_diag(net, i, kind, z)[e];
                    CHECK(std::abs(hd - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
                }
            }
        }
    }
}

TEST_CASE("injections are convex on the box") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 200; ++trial) {
        const auto c = support::random_bounded_case(rng, 2 + trial % 6, 0.1, 0.5, 0.0);
        const auto E = static_cast<Eigen::Index>(c.net.edge_count());
        ZVector a(E), b(E);
        for (auto& v : a) v = support::uniform(rng, -0.99, 0.99);
        for (auto& v : b) v = support::uniform(rng, -0.99, 0.99);
        const double lambda = support::uniform(rng, 0.0, 1.0);
        const auto mid = injections(c.net, lambda * a + (1 - lambda) * b);
        const auto ia = injections(c.net, a);
        const auto ib = injections(c.net, b);
        CHECK(((mid.p - lambda * ia.p - (1 - lambda) * ib.p).array() <= 1e-12).all());
        CHECK(((mid.q - lambda * ia.q - (1 - lambda) * ib.q).array() <= 1e-12).all());
    }
}

TEST_CASE("domain and dimension errors") {
    const auto net = support::two_bus();
    CHECK_THROWS_AS(injections(net, ZVector::Zero(2)), DimensionMismatch);
    ZVector z(1);
    z << 1.5;
    CHECK_THROWS_AS(injections(net, z), DomainError);
    z << 1.0;
    CHECK_THROWS_AS(injection_jacobian(net, z), DomainError);
}

TEST_CASE("angle recovery") {
    ZVector z(1);
    z << 0.6;
    auto theta = recover_angles(support::two_bus(), z);
    CHECK(theta[0] == 0.0);
    CHECK(theta[1] == Approx(-0.643501).epsilon(1e-6));

    const auto line = support::three_bus_line();
    ZVector z3(2);
    z3 << 0.5, -0.5;
    theta = recover_angles(line, z3);
    CHECK(theta[0] == 0.0);
    CHECK(theta[1] == Approx(-0.523599).epsilon(1e-6));
    CHECK(std::abs(theta[2]) < 1e-15);

    const auto op = make_operating_point(line, z3);
    for (std::size_t e = 0; e < line.edge_count(); ++e) {
        const double d = op.theta[static_cast<Eigen::Index>(line.tail(e))] -
                         op.theta[static_cast<Eigen::Index>(line.head(e))];
        CHECK(std::sin(d) == Approx(z3[static_cast<Eigen::Index>(e)]).epsilon(1e-14));
    }
}

TEST_CASE("feasibility report") {
    const auto net = support::two_bus(-0.5);
    ZVector z(1);
    z << 0.0;
    const auto r = check_original_feasibility(net, z, 1e-8);
    CHECK_FALSE(r.feasible);
    REQUIRE(r.violations.size() == 1);
    CHECK(r.violations[0].id == "p_max bus 2");
    CHECK(r.violations[0].residual == Approx(0.5));
    CHECK(r.max_violation == Approx(0.5));

    z << 0.9;  // outside the box sin(pi/3)
    const auto box = check_original_feasibility(net, z, 1e-8);
    CHECK_FALSE(box.feasible);
    CHECK(box.violations[0].id == "z upper bound edge 0");

    z << 0.5;
    CHECK(check_original_feasibility(net, z, 0.0).feasible);
}

TEST_CASE("closed-form minimum matches a dense scan") {
    const auto net = support::two_bus();
    CHECK(min_injection(net, 0, InjectionKind::Active) == Approx(1 - std::sqrt(5.0)).epsilon(1e-12));
    CHECK(min_injection(net, 0, InjectionKind::Reactive) == Approx(2 - std::sqrt(5.0)).epsilon(1e-12));

    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 30; ++trial) {
        const double g = support::uniform(rng, 0.1, 20.0);
        const double b = support::uniform(rng, 0.0, 20.0);
        const NetworkCase one({support::free_bus(1), support::free_bus(2)},
                              {{1, 2, g, b, -1.5, 1.5}}, 1);
        for (std::size_t bus = 0; bus < 2; ++bus) {
            for (const auto kind : {InjectionKind::Active, InjectionKind::Reactive}) {
                auto f = [&](double x) {
                    ZVector z(1);
                    z << x;
                    const auto s = support::phasor_at_z(one, z);
                    return kind == InjectionKind::Active ? s.p[static_cast<Eigen::Index>(bus)]
                                                         : s.q[static_cast<Eigen::Index>(bus)];
                };
                const double scan = support::scan_minimum(f, -1.0, 1.0);
                CHECK(min_injection(one, bus, kind) == Approx(scan).epsilon(1e-9));
                const auto zmin = injection_minimizer(one, bus, kind, ZVector::Zero(1));
                CHECK(injection(one, bus, kind, zmin) == Approx(min_injection(one, bus, kind)).epsilon(1e-12));
            }
        }
    }
}
