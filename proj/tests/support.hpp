#pragma once

// Fixtures and independent oracles shared by the unit tests and the
// acceptance runner. Nothing here calls into the transform module; the
// oracles work from complex phasors or plain scans.

#include "radopf/model.hpp"

#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace support {

using radopf::BusRecord;
using radopf::EdgeRecord;
using radopf::kInf;
using radopf::NetworkCase;
using radopf::Vector;

inline constexpr double kPiOver3 = std::numbers::pi / 3.0;

inline std::string fixture_path(const std::string& name) {
    return std::string(RADOPF_FIXTURE_DIR) + "/" + name;
}

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline BusRecord free_bus(int id) { return BusRecord{id, -kInf, kInf, -kInf, kInf, 0.0}; }

/// Buses 1 -- 2, g = 1, b = 2, angle bounds +/- pi/3, all limits infinite.
inline NetworkCase two_bus(double p_max_2 = kInf) {
    auto b2 = free_bus(2);
    b2.p_max = p_max_2;
    return NetworkCase({free_bus(1), b2}, {EdgeRecord{1, 2, 1.0, 2.0, -kPiOver3, kPiOver3}}, 1);
}

/// 2-bus case whose cost pushes p_1 onto a finite lower bound. The cone
/// relaxation leaves a whole face of optimal (R, I) off the circle.
inline NetworkCase inexact_two_bus() {
    auto b1 = free_bus(1);
    b1.p_min = -0.5;
    b1.cost_coeff = 1.0;
    return NetworkCase({b1, free_bus(2)}, {EdgeRecord{1, 2, 1.0, 2.0, -kPiOver3, kPiOver3}}, 1);
}

/// Line 1 -- 2 -- 3. Every limit is finite and every lower limit sits
/// above the closed-form minimum, so each one gets a hyperplane.
inline NetworkCase three_bus_line() {
    return NetworkCase(
        {BusRecord{1, -0.8, 0.8, -0.15, 0.8, 1.0}, BusRecord{2, -1.0, 1.0, -0.2, 1.0, 0.0},
         BusRecord{3, -0.8, -0.3, -0.1, 0.8, 2.0}},
        {EdgeRecord{1, 2, 1.0, 2.0, -kPiOver3, kPiOver3}, EdgeRecord{2, 3, 1.0, 3.0, -kPiOver3, kPiOver3}},
        1);
}

/// Star 1 -- {2, 3, 4}: three edges, the largest size the grid oracle takes.
inline NetworkCase four_bus_star() {
    return NetworkCase(
        {BusRecord{1, -2.0, 2.0, -2.0, 2.0, 1.0}, BusRecord{2, -0.6, -0.2, -0.3, 0.5, 0.0},
         BusRecord{3, -kInf, -0.1, -kInf, kInf, 0.5}, BusRecord{4, -0.4, 0.4, -0.12, 0.4, 0.2}},
        {EdgeRecord{1, 2, 1.5, 2.5, -kPiOver3, kPiOver3}, EdgeRecord{1, 3, 0.8, 1.6, -kPiOver3, kPiOver3},
         EdgeRecord{1, 4, 1.0, 3.0, -0.9, 0.9}},
        1);
}

// ---------------------------------------------------------------------------
// Phasor oracle: unit-magnitude voltages, line admittance y = g - j b, and
// S_i = V_i conj(I_i) summed over incident lines.

struct PhasorInjections {
    Vector p;
    Vector q;
};

inline PhasorInjections phasor_injections(const NetworkCase& net, const Vector& theta) {
    const auto n = static_cast<Eigen::Index>(net.bus_count());
    PhasorInjections out{Vector::Zero(n), Vector::Zero(n)};
    for (const auto& e : net.edges()) {
        const auto i = static_cast<Eigen::Index>(net.bus_index(e.from));
        const auto k = static_cast<Eigen::Index>(net.bus_index(e.to));
        const std::complex<double> y(e.g, -e.b);
        const auto vi = std::polar(1.0, theta[i]);
        const auto vk = std::polar(1.0, theta[k]);
        const auto si = vi * std::conj(y * (vi - vk));
        const auto sk = vk * std::conj(y * (vk - vi));
        out.p[i] += si.real();
        out.q[i] += si.imag();
        out.p[k] += sk.real();
        out.q[k] += sk.imag();
    }
    return out;
}

/// Bus angles from z by walking the tree with an explicit stack.
inline Vector angles_from_z(const NetworkCase& net, const Vector& z) {
    const auto n = net.bus_count();
    Vector theta = Vector::Zero(static_cast<Eigen::Index>(n));
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack{net.bus_index(net.slack_bus())};
    seen[stack.back()] = true;
    while (!stack.empty()) {
        const auto u = stack.back();
        stack.pop_back();
        for (std::size_t e = 0; e < net.edge_count(); ++e) {
            const auto a = net.bus_index(net.edges()[e].from);
            const auto b = net.bus_index(net.edges()[e].to);
            const double d = std::asin(z[static_cast<Eigen::Index>(e)]);
            if (a == u && !seen[b]) {
                theta[static_cast<Eigen::Index>(b)] = theta[static_cast<Eigen::Index>(a)] - d;
                seen[b] = true;
                stack.push_back(b);
            } else if (b == u && !seen[a]) {
                theta[static_cast<Eigen::Index>(a)] = theta[static_cast<Eigen::Index>(b)] + d;
                seen[a] = true;
                stack.push_back(a);
            }
        }
    }
    return theta;
}

inline PhasorInjections phasor_at_z(const NetworkCase& net, const Vector& z) {
    return phasor_injections(net, angles_from_z(net, z));
}

/// Original feasibility from the phasor oracle, with tolerance.
inline bool phasor_feasible(const NetworkCase& net, const Vector& z, double tol) {
    for (std::size_t e = 0; e < net.edge_count(); ++e) {
        const auto& edge = net.edges()[e];
        const double th = std::asin(z[static_cast<Eigen::Index>(e)]);
        if (th < edge.theta_min - tol || th > edge.theta_max + tol) return false;
    }
    const auto s = phasor_at_z(net, z);
    for (std::size_t i = 0; i < net.bus_count(); ++i) {
        const auto& b = net.buses()[i];
        const auto k = static_cast<Eigen::Index>(i);
        if (s.p[k] < b.p_min - tol || s.p[k] > b.p_max + tol) return false;
        if (s.q[k] < b.q_min - tol || s.q[k] > b.q_max + tol) return false;
    }
    return true;
}

/// Loss from the phasor oracle: total active injection.
inline double phasor_loss(const NetworkCase& net, const Vector& z) { return phasor_at_z(net, z).p.sum(); }

// ---------------------------------------------------------------------------
// Scalar helpers.

/// Minimum of a continuous function on [lo, hi] by dense scan followed by
/// golden-section refinement around the best sample.
template <class F>
double scan_minimum(F f, double lo, double hi, int samples = 20001) {
    double best_x = lo, best = f(lo);
    for (int k = 1; k < samples; ++k) {
        const double x = lo + (hi - lo) * k / (samples - 1);
        const double v = f(x);
        if (v < best) {
            best = v;
            best_x = x;
        }
    }
    const double h = (hi - lo) / (samples - 1);
    double a = std::max(lo, best_x - h), b = std::min(hi, best_x + h);
    const double r = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 200; ++it) {
        const double c = b - r * (b - a);
        const double d = a + r * (b - a);
        if (f(c) < f(d)) b = d; else a = c;
    }
    return std::min(best, f(0.5 * (a + b)));
}

/// Root of f on [lo, hi] by bisection; f(lo) and f(hi) must differ in sign.
template <class F>
double bisect(F f, double lo, double hi) {
    double flo = f(lo);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Random radial cases.

struct TreeShape {
    std::vector<std::pair<int, int>> edges;  // (parent id, child id), ids 1..n
};

inline TreeShape random_tree(std::mt19937_64& rng, int n) {
    TreeShape t;
    for (int child = 2; child <= n; ++child) {
        std::uniform_int_distribution<int> parent(1, child - 1);
        t.edges.emplace_back(parent(rng), child);
    }
    return t;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Random tree whose injection limits straddle the phasor injections at a
/// random reference point z_ref (|z| <= 0.3) by margins in [lo, hi]. Each
/// limit is dropped to infinity with probability `drop`.
struct RandomCase {
    NetworkCase net;
    Vector z_ref;
};

inline RandomCase random_bounded_case(std::mt19937_64& rng, int n, double margin_lo, double margin_hi,
                                      double drop) {
    const auto shape = random_tree(rng, n);
    std::vector<EdgeRecord> edges;
    for (const auto& [a, b] : shape.edges) {
        const double lim = uniform(rng, 0.6, 1.2);
        edges.push_back(EdgeRecord{a, b, uniform(rng, 0.5, 4.0), uniform(rng, 0.5, 6.0), -lim, lim});
    }
    std::vector<BusRecord> buses;
    for (int id = 1; id <= n; ++id) buses.push_back(free_bus(id));
    NetworkCase skeleton(buses, edges, 1);

    Vector z_ref(static_cast<Eigen::Index>(edges.size()));
    for (Eigen::Index e = 0; e < z_ref.size(); ++e) z_ref[e] = uniform(rng, -0.3, 0.3);
    const auto s = phasor_at_z(skeleton, z_ref);
    auto pick = [&](double center, double sign) {
        if (uniform(rng, 0.0, 1.0) < drop) return sign * kInf;
        return center + sign * uniform(rng, margin_lo, margin_hi);
    };
    for (int i = 0; i < n; ++i) {
        auto& b = buses[static_cast<std::size_t>(i)];
        b.p_min = pick(s.p[i], -1.0);
        b.p_max = pick(s.p[i], +1.0);
        b.q_min = pick(s.q[i], -1.0);
        b.q_max = pick(s.q[i], +1.0);
        b.cost_coeff = uniform(rng, 0.0, 2.0);
    }
    return {NetworkCase(buses, edges, 1), z_ref};
}

/// Over-satisfied-load tree: no lower limits anywhere, loads at every
/// non-slack bus as finite upper limits on p, free slack bus. One g/b ratio
/// per tree; with unit voltage magnitudes a bus drawing p pushes out about
/// (g/b)|p| of q, so the q ceilings leave room for that.
inline NetworkCase random_load_tree(std::mt19937_64& rng, int n) {
    const auto shape = random_tree(rng, n);
    const double ratio = uniform(rng, 0.3, 0.8);
    std::vector<EdgeRecord> edges;
    for (const auto& [a, b] : shape.edges) {
        const double susceptance = uniform(rng, 4.0, 16.0);
        edges.push_back(EdgeRecord{a, b, ratio * susceptance, susceptance, -kPiOver3, kPiOver3});
    }
    std::vector<BusRecord> buses{free_bus(1)};
    for (int id = 2; id <= n; ++id) {
        auto b = free_bus(id);
        b.p_max = -uniform(rng, 0.02, 0.12);
        b.q_max = uniform(rng, 0.3, 0.6);
        buses.push_back(b);
    }
    return NetworkCase(buses, edges, 1);
}

/// MATPOWER text for a radial feeder of n buses: bus 1 is the substation,
/// every other bus carries a load and a small flexible generator. Lines
/// share one r/x ratio, and the generators' reactive ceilings cover what
/// the loads push out under unit voltage magnitudes.
inline std::string synthetic_feeder_matpower(std::mt19937_64& rng, int n) {
    const auto shape = random_tree(rng, n);
    const double r_over_x = uniform(rng, 0.5, 0.9);
    std::ostringstream m;
    m.precision(10);
    m << "function mpc = feeder\n%% synthetic radial feeder\nmpc.version = '2';\nmpc.baseMVA = 100;\n";
    m << "mpc.bus = [\n";
    std::vector<double> qd(static_cast<std::size_t>(n + 1), 0.0);
    for (int id = 1; id <= n; ++id) {
        const double pd = id == 1 ? 0.0 : uniform(rng, 0.5, 3.0);
        qd[static_cast<std::size_t>(id)] = id == 1 ? 0.0 : uniform(rng, 0.2, 1.5);
        m << "\t" << id << "\t" << (id == 1 ? 3 : 1) << "\t" << pd << "\t" << qd[static_cast<std::size_t>(id)]
          << "\t0\t0\t1\t1\t0\t12.47\t1\t1.05\t0.95;\n";
    }
    m << "];\nmpc.gen = [\n";
    m << "\t1\t0\t0\t300\t-300\t1\t100\t1\t500\t-500;\n";
    for (int id = 2; id <= n; ++id) {
        const double pmax = uniform(rng, 0.5, 1.5);
        const double qmax = qd[static_cast<std::size_t>(id)] + uniform(rng, 6.0, 10.0);
        const double qmin = -uniform(rng, 0.5, 1.0);
        m << "\t" << id << "\t0\t0\t" << qmax << "\t" << qmin << "\t1\t100\t1\t" << pmax << "\t0;\n";
    }
    m << "];\nmpc.branch = [\n";
    for (const auto& [a, b] : shape.edges) {
        const double x = uniform(rng, 0.003, 0.01);
        m << "\t" << a << "\t" << b << "\t" << r_over_x * x << "\t" << x << "\t0\t0\t0\t0\t0\t0\t1\t-60\t60;\n";
    }
    m << "];\n";
    return m.str();
}

}  // namespace support
