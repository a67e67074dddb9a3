#include "radopf/convexsolver.hpp"

#include "radopf/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace radopf {

std::string_view to_string(SolverStatus status) {
    switch (status) {
        case SolverStatus::Optimal: return "optimal";
        case SolverStatus::Infeasible: return "infeasible";
        case SolverStatus::NumericalFailure: return "numerical_failure";
    }
    return "unknown";
}

SmoothConvexProgram make_program(std::size_t dimension) {
    SmoothConvexProgram p;
    p.dimension = dimension;
    p.lower = Vector::Constant(static_cast<Eigen::Index>(dimension), -kInf);
    p.upper = Vector::Constant(static_cast<Eigen::Index>(dimension), kInf);
    return p;
}

std::size_t SmoothConvexProgram::inequality_count() const {
    std::size_t m = smooth.size() + linear.size();
    for (Eigen::Index i = 0; i < lower.size(); ++i) {
        if (std::isfinite(lower[i])) ++m;
        if (std::isfinite(upper[i])) ++m;
    }
    return m;
}

double SmoothConvexProgram::min_slack(const Vector& x) const {
    double worst = kInf;
    for (const auto& c : smooth) {
        double v = 0.0;
        try {
            v = c.f.value(x);
        } catch (const DomainError&) {
            return -kInf;
        }
        worst = std::min(worst, c.upper - v);
    }
    for (const auto& c : linear) worst = std::min(worst, c.offset - c.normal.dot(x));
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (std::isfinite(lower[i])) worst = std::min(worst, x[i] - lower[i]);
        if (std::isfinite(upper[i])) worst = std::min(worst, upper[i] - x[i]);
    }
    return std::isnan(worst) ? -kInf : worst;
}

void SolverConfig::check() const {
    if (!(barrier_initial_t > 0 && barrier_growth > 1 && duality_gap_tol > 0 &&
          newton_decrement_tol > 0 && max_newton_per_stage > 0 && armijo_c1 > 0 &&
          armijo_c1 < 0.5 && backtrack_factor > 0 && backtrack_factor < 1 && min_step > 0 &&
          fraction_to_boundary > 0 && fraction_to_boundary < 1)) {
        throw std::invalid_argument("invalid solver configuration");
    }
}

namespace {

constexpr double kStallDecrement = 1e-6;

// Adds scale * v v^T to H touching only the nonzero entries of v.
void sparse_rank_one(Matrix& H, const Vector& v, double scale, std::vector<Eigen::Index>& nz) {
    nz.clear();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (v[i] != 0.0) nz.push_back(i);
    }
    for (auto i : nz) {
        const double vi = scale * v[i];
        for (auto j : nz) H(i, j) += vi * v[j];
    }
}

class Barrier {
public:
    Barrier(const SmoothConvexProgram& program) : prog_(program) {}

    // t * f0 - sum log(slack); nullopt outside the strict interior.
    std::optional<double> merit(const Vector& x, double t, double* magnitude = nullptr) const {
        double f0 = 0.0;
        if (t != 0.0 && prog_.objective) f0 = prog_.objective->value(x);
        double logs = 0.0;
        double scale = 0.0;
        auto add = [&](double s) {
            if (!(s > 0.0)) return false;
            const double l = std::log(s);
            logs += l;
            scale += std::abs(l);
            return true;
        };
        for (const auto& c : prog_.smooth) {
            double v = 0.0;
            try {
                v = c.f.value(x);
            } catch (const DomainError&) {
                return std::nullopt;
            }
            if (!add(c.upper - v)) return std::nullopt;
        }
        for (const auto& c : prog_.linear) {
            if (!add(c.offset - c.normal.dot(x))) return std::nullopt;
        }
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            if (std::isfinite(prog_.lower[i]) && !add(x[i] - prog_.lower[i])) return std::nullopt;
            if (std::isfinite(prog_.upper[i]) && !add(prog_.upper[i] - x[i])) return std::nullopt;
        }
        const double value = t * f0 - logs;
        if (!std::isfinite(value)) return std::nullopt;
        if (magnitude) *magnitude = std::abs(t * f0) + scale;
        return value;
    }

    void derivatives(const Vector& x, double t, Vector& g, Matrix& H) const {
        const auto n = static_cast<Eigen::Index>(prog_.dimension);
        g.setZero(n);
        H.setZero(n, n);
        if (t != 0.0 && prog_.objective) {
            g += t * prog_.objective->gradient(x);
            H += t * prog_.objective->hessian(x);
        }
        std::vector<Eigen::Index> nz;
        for (const auto& c : prog_.smooth) {
            const double s = c.upper - c.f.value(x);
            const Vector grad = c.f.gradient(x);
            g += grad / s;
            sparse_rank_one(H, grad, 1.0 / (s * s), nz);
            H.diagonal() += c.f.hessian_diag(x) / s;
        }
        for (const auto& c : prog_.linear) {
            const double s = c.offset - c.normal.dot(x);
            g += c.normal / s;
            sparse_rank_one(H, c.normal, 1.0 / (s * s), nz);
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            if (std::isfinite(prog_.lower[i])) {
                const double s = x[i] - prog_.lower[i];
                g[i] -= 1.0 / s;
                H(i, i) += 1.0 / (s * s);
            }
            if (std::isfinite(prog_.upper[i])) {
                const double s = prog_.upper[i] - x[i];
                g[i] += 1.0 / s;
                H(i, i) += 1.0 / (s * s);
            }
        }
    }

    // Largest step along dx keeping linear and box slacks positive.
    double max_linear_step(const Vector& x, const Vector& dx) const {
        double alpha = kInf;
        for (const auto& c : prog_.linear) {
            const double rate = c.normal.dot(dx);
            if (rate > 0.0) alpha = std::min(alpha, (c.offset - c.normal.dot(x)) / rate);
        }
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            if (dx[i] < 0.0 && std::isfinite(prog_.lower[i])) {
                alpha = std::min(alpha, (x[i] - prog_.lower[i]) / -dx[i]);
            }
            if (dx[i] > 0.0 && std::isfinite(prog_.upper[i])) {
                alpha = std::min(alpha, (prog_.upper[i] - x[i]) / dx[i]);
            }
        }
        return alpha;
    }

private:
    const SmoothConvexProgram& prog_;
};

// Solves H dx = -g, regularizing if H is numerically singular.
std::optional<Vector> newton_direction(const Matrix& H, const Vector& g) {
    Eigen::LLT<Matrix> llt(H);
    if (llt.info() == Eigen::Success) {
        Vector dx = llt.solve(-g);
        if (dx.allFinite()) return dx;
    }
    const double base = std::max(1.0, H.diagonal().cwiseAbs().maxCoeff());
    for (double reg = 1e-12 * base; reg < 1e-2 * base; reg *= 100.0) {
        Matrix R = H;
        R.diagonal().array() += reg;
        Eigen::LLT<Matrix> reg_llt(R);
        if (reg_llt.info() != Eigen::Success) continue;
        Vector dx = reg_llt.solve(-g);
        if (dx.allFinite()) return dx;
    }
    return std::nullopt;
}

enum class StageOutcome { Converged, IterationLimit, Stalled };

StageOutcome center(const Barrier& barrier, Vector& x, double t, const SolverConfig& cfg,
                    int max_iterations, int& iterations, std::vector<double>* history) {
    Vector g;
    Matrix H;
    for (int it = 0; it < max_iterations; ++it) {
        barrier.derivatives(x, t, g, H);
        const auto dx = newton_direction(H, g);
        if (!dx) return StageOutcome::Stalled;
        const double slope = g.dot(*dx);
        const double decrement2 = -slope;
        if (decrement2 / 2.0 <= cfg.newton_decrement_tol) return StageOutcome::Converged;

        double magnitude = 0.0;
        const double current = *barrier.merit(x, t, &magnitude);
        const double roundoff = 16.0 * std::numeric_limits<double>::epsilon() * magnitude;

        double alpha = std::min(1.0, cfg.fraction_to_boundary * barrier.max_linear_step(x, *dx));
        bool accepted = false;
        while (alpha >= cfg.min_step) {
            const Vector trial = x + alpha * *dx;
            const auto value = barrier.merit(trial, t);
            if (value && *value <= current + cfg.armijo_c1 * alpha * slope + roundoff) {
                x = trial;
                if (history) history->push_back(*value);
                accepted = true;
                break;
            }
            alpha *= cfg.backtrack_factor;
        }
        ++iterations;
        if (!accepted) {
            return decrement2 <= kStallDecrement ? StageOutcome::Converged : StageOutcome::Stalled;
        }
    }
    return StageOutcome::IterationLimit;
}

}  // namespace

SolverResult solve(const SmoothConvexProgram& program, const Vector& start,
                   const SolverConfig& config) {
    config.check();
    if (static_cast<std::size_t>(start.size()) != program.dimension ||
        static_cast<std::size_t>(program.lower.size()) != program.dimension ||
        static_cast<std::size_t>(program.upper.size()) != program.dimension) {
        throw DimensionMismatch("program dimension does not match start or box");
    }
    const double start_slack = program.min_slack(start);
    if (!(start_slack > 0.0)) {
        throw NotStrictlyFeasible("solver start is not strictly feasible (min slack " +
                                  std::to_string(start_slack) + ")");
    }

    const Barrier barrier(program);
    SolverResult result;
    result.x = start;
    const auto m = static_cast<double>(program.inequality_count());

    // Pull a start hugging a boundary toward the analytic center.
    if (start_slack < 1e-9 && m > 0) {
        int ignored = 0;
        center(barrier, result.x, 0.0, config, 1, ignored, nullptr);
    }

    double t = config.barrier_initial_t;
    bool failed = false;
    while (true) {
        result.merit_history.emplace_back();
        const auto outcome = center(barrier, result.x, t, config, config.max_newton_per_stage,
                                    result.newton_iterations, &result.merit_history.back());
        if (outcome == StageOutcome::Stalled) {
            failed = true;
            break;
        }
        if (m == 0.0) {
            result.certified_gap = 0.0;
            break;
        }
        result.certified_gap = m / t;
        if (result.certified_gap <= config.duality_gap_tol) break;
        t *= config.barrier_growth;
    }

    result.objective_value = program.objective ? program.objective->value(result.x) : 0.0;
    result.status = failed ? SolverStatus::NumericalFailure : SolverStatus::Optimal;
    return result;
}

// ---------------------------------------------------------------------------

namespace {

bool inside_box(const Vector& x, const Vector* lo, const Vector* hi) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (lo && !(x[i] > (*lo)[i])) return false;
        if (hi && !(x[i] < (*hi)[i])) return false;
    }
    return true;
}

double safe_value(const SmoothFunction& f, const Vector& x) {
    try {
        return f.value(x);
    } catch (const DomainError&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

// Newton on  2(z - z0) + mu grad f(z) = 0,  f(z) = u.
std::optional<Vector> polish_projection(const SmoothFunction& f, double u, const Vector& z0,
                                        Vector z, const Vector* lo, const Vector* hi) {
    Vector grad = f.gradient(z);
    const double gg = grad.squaredNorm();
    if (!(gg > 0.0)) return std::nullopt;
    double mu = std::max(0.0, -2.0 * (z - z0).dot(grad) / gg);
    const double tol = 1e-14 * (1.0 + std::abs(u));

    for (int it = 0; it < 50; ++it) {
        const double r2 = f.value(z) - u;
        grad = f.gradient(z);
        const Vector r1 = 2.0 * (z - z0) + mu * grad;
        if (std::abs(r2) <= tol && r1.lpNorm<Eigen::Infinity>() <= 1e-12) break;

        const Vector d = (2.0 + mu * f.hessian_diag(z).array()).matrix();
        const Vector dinv_grad = grad.cwiseQuotient(d);
        const double denom = grad.dot(dinv_grad);
        if (!(denom > 0.0)) return std::nullopt;
        const double dmu = (r2 - r1.cwiseQuotient(d).dot(grad)) / denom;
        const Vector dz = -(r1 + dmu * grad).cwiseQuotient(d);

        double step = 1.0;
        Vector trial = z + dz;
        while (!(inside_box(trial, lo, hi) && std::isfinite(safe_value(f, trial)))) {
            step *= 0.5;
            if (step < 1e-8) return std::nullopt;
            trial = z + step * dz;
        }
        z = trial;
        mu += step * dmu;
    }
    if (!(std::abs(f.value(z) - u) <= 1e-10 * (1.0 + std::abs(u))) || mu < 0.0) return std::nullopt;
    return z;
}

// Boundary point on the segment inside -> outside.
Vector bisect_boundary(const SmoothFunction& f, double u, const Vector& inside,
                       const Vector& outside) {
    double lo = 0.0;
    double hi = 1.0;
    for (int it = 0; it < 200 && hi - lo > 1e-17; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double v = safe_value(f, inside + mid * (outside - inside));
        if (v <= u) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return inside + lo * (outside - inside);
}

}  // namespace

Vector project_euclidean(const SmoothFunction& f, double u, const Vector& z0,
                         const Vector& interior_hint, const SolverConfig& config,
                         const Vector* domain_lower, const Vector* domain_upper) {
    if (f.value(z0) <= u) return z0;

    const auto n = static_cast<std::size_t>(z0.size());
    SmoothConvexProgram prog = make_program(n);
    if (domain_lower) prog.lower = *domain_lower;
    if (domain_upper) prog.upper = *domain_upper;
    prog.objective = ObjectiveFunction{
        [z0](const Vector& z) { return (z - z0).squaredNorm(); },
        [z0](const Vector& z) { return Vector(2.0 * (z - z0)); },
        [n](const Vector&) {
            return Matrix(2.0 * Matrix::Identity(static_cast<Eigen::Index>(n),
                                                 static_cast<Eigen::Index>(n)));
        },
    };
    prog.smooth.push_back({f, u, "projection"});

    if (!(prog.min_slack(interior_hint) > 0.0)) {
        throw NotStrictlyFeasible("projection hint is not strictly inside the target set");
    }
    const auto res = solve(prog, interior_hint, config);
    if (res.status == SolverStatus::NumericalFailure && !(prog.min_slack(res.x) > 0.0)) {
        throw NumericalFailure("projection solve failed");
    }

    if (auto polished = polish_projection(f, u, z0, res.x, domain_lower, domain_upper)) {
        // Polished point must not be farther than the barrier point.
        if ((*polished - z0).norm() <= (res.x - z0).norm() + 1e-9) return *polished;
    }
    return bisect_boundary(f, u, res.x, z0);
}

// ---------------------------------------------------------------------------

Phase1Result phase1(const SmoothConvexProgram& program, const Vector& guess,
                    const SolverConfig& config) {
    const auto n = static_cast<Eigen::Index>(program.dimension);
    if (guess.size() != n) throw DimensionMismatch("phase-1 guess has wrong length");

    // Pull the guess strictly inside the (hard) box.
    Vector x = guess;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double lo = program.lower[i];
        const double hi = program.upper[i];
        if (!(lo < hi)) {
            throw Infeasible("box has an empty interior on coordinate " + std::to_string(i));
        }
        const double pad = (std::isfinite(lo) && std::isfinite(hi)) ? 1e-3 * (hi - lo) : 1e-3;
        if (std::isfinite(lo)) x[i] = std::max(x[i], lo + pad);
        if (std::isfinite(hi)) x[i] = std::min(x[i], hi - pad);
    }

    Phase1Result out;
    if (program.smooth.empty() && program.linear.empty()) {
        out.feasible = true;
        out.x = x;
        out.slack = -kInf;
        return out;
    }

    double violation = -kInf;
    for (const auto& c : program.smooth) violation = std::max(violation, c.f.value(x) - c.upper);
    for (const auto& c : program.linear) {
        violation = std::max(violation, c.normal.dot(x) - c.offset);
    }
    constexpr double kSlackFloor = -1.0;

    SmoothConvexProgram ext = make_program(program.dimension + 1);
    ext.lower.head(n) = program.lower;
    ext.upper.head(n) = program.upper;
    ext.lower[n] = kSlackFloor;
    ext.objective = ObjectiveFunction{
        [n](const Vector& y) { return y[n]; },
        [n](const Vector& y) {
            Vector g = Vector::Zero(y.size());
            g[n] = 1.0;
            return g;
        },
        [](const Vector& y) { return Matrix(Matrix::Zero(y.size(), y.size())); },
    };
    for (const auto& c : program.smooth) {
        const auto& f = c.f;
        SmoothFunction lifted{
            [f, n](const Vector& y) { return f.value(y.head(n)) - y[n]; },
            [f, n](const Vector& y) {
                Vector g(y.size());
                g.head(n) = f.gradient(y.head(n));
                g[n] = -1.0;
                return g;
            },
            [f, n](const Vector& y) {
                Vector h = Vector::Zero(y.size());
                h.head(n) = f.hessian_diag(y.head(n));
                return h;
            },
        };
        ext.smooth.push_back({std::move(lifted), c.upper, c.label});
    }
    for (const auto& c : program.linear) {
        Vector a(n + 1);
        a.head(n) = c.normal;
        a[n] = -1.0;
        ext.linear.push_back({std::move(a), c.offset, c.label});
    }

    Vector y(n + 1);
    y.head(n) = x;
    y[n] = std::max(violation + 1.0, kSlackFloor + 0.5);

    const auto res = solve(ext, y, config);
    out.newton_iterations = res.newton_iterations;
    out.x = res.x.head(n);
    out.slack = res.x[n];
    out.slack_lower_bound = out.slack - res.certified_gap;
    out.feasible = out.slack < -kPhase1Margin && program.min_slack(out.x) > kPhase1Margin;
    if (!out.feasible && res.status == SolverStatus::NumericalFailure) {
        throw NumericalFailure("phase-1 solve failed");
    }
    return out;
}

}  // namespace radopf
