#include "radopf/cli.hpp"

#include "radopf/algorithm.hpp"
#include "radopf/baseline.hpp"
#include "radopf/errors.hpp"
#include "radopf/model.hpp"
#include "radopf/serialize.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

namespace radopf::cli {

namespace {

// Input problems the user can fix: bad files, bad flags, invalid cases.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path);
    out << content;
    if (!out) throw InputError("cannot write " + path);
}

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(8);
    out << v;
    return out.str();
}

std::string first_violation(const ValidationReport& report) {
    const auto& v = report.violations.front();
    return v.rule + " (" + v.element + ")";
}

NetworkCase load_case(const std::string& path) {
    auto net = parse_case(read_file(path));
    const auto report = validate(net);
    if (!report.ok) {
        throw InputError("invalid case: " + std::to_string(report.violations.size()) +
                         " violation(s), first: " + first_violation(report));
    }
    return net;
}

Objective make_objective(const NetworkCase& net, const std::string& name,
                         const std::string& measurements) {
    if (name == "loss") return Objective::loss();
    if (name == "cost") return Objective::linear_cost(net);
    if (measurements.empty()) throw InputError("--objective estimate needs --measurements");
    return Objective::state_estimation(parse_measurements(read_file(measurements), net.bus_count()));
}

CommandOutcome ok(std::string summary, std::optional<std::string> path = std::nullopt) {
    return {kExitOk, std::move(path), std::move(summary)};
}

// ---------------------------------------------------------------------------

CommandOutcome cmd_validate(const std::string& case_path) {
    const auto net = parse_case(read_file(case_path));
    const auto report = validate(net);
    if (!report.ok) {
        return {kExitInput, std::nullopt,
                "invalid: " + std::to_string(report.violations.size()) +
                    " violation(s), first: " + first_violation(report)};
    }
    return ok("valid: " + std::to_string(net.bus_count()) + " buses, " +
              std::to_string(net.edge_count()) + " edges, " +
              std::to_string(report.warnings.size()) + " warning(s)");
}

CommandOutcome cmd_import(const std::string& in, const std::string& out) {
    const auto imported = import_matpower(read_file(in));
    if (!imported.report.ok) {
        return {kExitInput, std::nullopt,
                "invalid import: " + std::to_string(imported.report.violations.size()) +
                    " violation(s), first: " + first_violation(imported.report)};
    }
    write_file(out, serialize_case(imported.net));
    return ok("imported " + std::to_string(imported.net.bus_count()) + " buses, " +
                  std::to_string(imported.net.edge_count()) + " edges, " +
                  std::to_string(imported.report.warnings.size()) + " warning(s)",
              out);
}

struct SolveArgs {
    std::string case_path;
    std::string objective = "loss";
    std::string measurements;
    double eps = AlgorithmConfig{}.eps;
    int max_iter = AlgorithmConfig{}.max_outer;
    std::string init = "auto";
    std::string out;
    std::string trace;
};

CommandOutcome cmd_solve(const SolveArgs& a) {
    using clock = std::chrono::steady_clock;
    const auto started = clock::now();
    SolveTiming timing;
    timing.started_at = utc_timestamp();

    const auto net = load_case(a.case_path);
    const auto objective = make_objective(net, a.objective, a.measurements);
    AlgorithmConfig config;
    config.eps = a.eps;
    config.max_outer = a.max_iter;
    config.check();

    ZVector z_init;
    if (a.init == "auto") {
        try {
            z_init = initial_point(net, config);
        } catch (const Infeasible& e) {
            if (!a.out.empty()) {
                Json report{{"status", "infeasible"},
                            {"config", to_json(config)},
                            {"best_violation", number_to_json(e.bound())},
                            {"message", e.what()}};
                write_file(a.out, report.dump(2) + "\n");
            }
            return {kExitInfeasible, a.out.empty() ? std::nullopt : std::optional(a.out),
                    "infeasible: no strictly feasible start (best max violation " + fmt(e.bound()) + ")"};
        }
    } else {
        z_init = parse_point(read_file(a.init), net.edge_count());
        const auto feas = check_original_feasibility(net, z_init, 0.0);
        if (!(feas.max_violation < 0.0)) {
            throw InputError("initial point is not strictly feasible (max residual " +
                             fmt(feas.max_violation) + ")");
        }
    }
    timing.initial_point_ms = std::chrono::duration<double, std::milli>(clock::now() - started).count();

    const auto result = solve_opf(net, objective, z_init, config);
    timing.total_ms = std::chrono::duration<double, std::milli>(clock::now() - started).count();

    if (!a.out.empty()) {
        const auto report = solve_report(net, objective, config, a.init == "auto" ? "auto" : "file",
                                         z_init, result, timing);
        write_file(a.out, report.dump(2) + "\n");
    }
    if (!a.trace.empty()) write_file(a.trace, trace_csv(result.trace));

    return {kExitOk, a.out.empty() ? std::nullopt : std::optional(a.out),
            std::string(result.trace.converged ? "converged" : "stopped at iteration limit") +
                ": objective " + fmt(result.objective) + " after " +
                std::to_string(result.trace.iterations.size()) + " iteration(s)"};
}

CommandOutcome cmd_relax(const std::string& case_path, const std::string& objective_name,
                         const std::string& out) {
    const auto net = load_case(case_path);
    const auto objective = make_objective(net, objective_name, {});
    RelaxationResult res;
    try {
        res = socp_relaxation(net, objective);
    } catch (const Infeasible& e) {
        return {kExitInfeasible, std::nullopt, std::string("infeasible: ") + e.what()};
    }
    write_file(out, to_json(res).dump(2) + "\n");
    return ok(std::string(res.recovered_z ? "exact" : "inexact") + " relaxation: objective " +
                  fmt(res.objective_value) + ", gap " + fmt(res.exactness_gap),
              out);
}

struct RasterArgs {
    std::string case_path;
    std::string edges;
    int resolution = 200;
    std::string set = "both";
    std::string base_from;
    std::vector<std::string> fix;
    std::string out;
};

std::pair<std::size_t, std::size_t> parse_edge_pair(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos) throw InputError("--edges expects i,j");
    try {
        std::size_t used_a = 0, used_b = 0;
        const auto sa = text.substr(0, comma);
        const auto sb = text.substr(comma + 1);
        const long a = std::stol(sa, &used_a);
        const long b = std::stol(sb, &used_b);
        if (used_a != sa.size() || used_b != sb.size() || a < 0 || b < 0) throw std::invalid_argument("");
        return {static_cast<std::size_t>(a), static_cast<std::size_t>(b)};
    } catch (const std::logic_error&) {
        throw InputError("--edges expects two nonnegative integers i,j");
    }
}

CommandOutcome cmd_raster(const RasterArgs& a) {
    const auto net = load_case(a.case_path);
    const auto [ea, eb] = parse_edge_pair(a.edges);
    if (ea >= net.edge_count() || eb >= net.edge_count() || ea == eb) {
        throw InputError("--edges must name two distinct edges below " + std::to_string(net.edge_count()));
    }
    if (a.resolution < 2) throw InputError("--resolution must be at least 2");

    ZVector fixed = ZVector::Zero(static_cast<Eigen::Index>(net.edge_count()));
    for (const auto& item : a.fix) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw InputError("--fix expects k=v");
        try {
            const auto k = std::stoul(item.substr(0, eq));
            const double v = std::stod(item.substr(eq + 1));
            if (k >= net.edge_count()) throw InputError("--fix edge " + std::to_string(k) + " out of range");
            fixed[static_cast<Eigen::Index>(k)] = v;
        } catch (const std::logic_error&) {
            throw InputError("--fix expects k=v with an edge index and a number");
        }
    }

    std::optional<std::vector<Hyperplane>> planes;
    if (a.set != "original") {
        if (!a.base_from.empty()) {
            planes = parse_hyperplanes(net, read_file(a.base_from));
        } else {
            try {
                planes = hyperplanes(net, base_points(net, initial_point(net)));
            } catch (const Infeasible& e) {
                return {kExitInfeasible, std::nullopt,
                        std::string("infeasible: no anchor for the restriction: ") + e.what()};
            }
        }
    }

    const auto grid = raster_region(net, ea, eb, a.resolution, fixed, planes ? &*planes : nullptr);
    write_file(a.out, raster_csv(grid));
    std::string summary = "raster " + std::to_string(a.resolution) + "x" + std::to_string(a.resolution) +
                          ": original " + std::to_string(grid.count_original()) + " cells";
    if (grid.has_restricted) {
        summary += ", restricted " + std::to_string(grid.count_restricted()) +
                   " cells, interior subset violations " + std::to_string(grid.subset_violations(true));
    }
    return ok(summary, a.out);
}

CommandOutcome cmd_check(const std::string& case_path, const std::string& point_path, double tol) {
    const auto net = load_case(case_path);
    const auto z = parse_point(read_file(point_path), net.edge_count());
    const auto report = check_original_feasibility(net, z, tol);
    if (report.feasible) return ok("feasible: max violation " + fmt(report.max_violation));
    return {kExitInfeasible, std::nullopt,
            "infeasible: " + std::to_string(report.violations.size()) + " violation(s), worst " +
                report.violations.front().id + " by " + fmt(report.max_violation)};
}

CommandOutcome cmd_simulate(const std::string& case_path, const std::string& point_path,
                            double noise, std::uint64_t seed, const std::string& out) {
    const auto net = load_case(case_path);
    const auto z = parse_point(read_file(point_path), net.edge_count());
    const auto box = z_bounds(net);
    if ((z.array() < box.lower.array()).any() || (z.array() > box.upper.array()).any()) {
        throw InputError("point lies outside the angle box");
    }
    if (!(noise >= 0.0)) throw InputError("--noise must be nonnegative");
    const auto ms = simulate_measurements(net, z, noise, seed);
    write_file(out, to_json(ms).dump(2) + "\n");
    return ok("simulated " + std::to_string(net.bus_count()) + " bus measurements", out);
}

}  // namespace

CommandOutcome run(const std::vector<std::string>& args) {
    CLI::App app{"Convex-restriction AC OPF for radial networks", "radopf"};
    app.require_subcommand(1);

    std::string case_path;
    auto* validate_cmd = app.add_subcommand("validate", "Check a case file");
    validate_cmd->add_option("--case", case_path, "Case JSON")->required();

    std::string matpower_path, import_out;
    auto* import_cmd = app.add_subcommand("import", "Convert a MATPOWER case to case JSON");
    import_cmd->add_option("--matpower", matpower_path, "MATPOWER .m file")->required();
    import_cmd->add_option("--out", import_out, "Output case JSON")->required();

    SolveArgs solve_args;
    auto* solve_cmd = app.add_subcommand("solve", "Run the restriction algorithm");
    solve_cmd->add_option("--case", solve_args.case_path)->required();
    solve_cmd->add_option("--objective", solve_args.objective)
        ->check(CLI::IsMember({"loss", "cost", "estimate"}))
        ->required();
    solve_cmd->add_option("--measurements", solve_args.measurements);
    solve_cmd->add_option("--eps", solve_args.eps);
    solve_cmd->add_option("--max-iter", solve_args.max_iter);
    solve_cmd->add_option("--init", solve_args.init, "auto or a point JSON");
    solve_cmd->add_option("--out", solve_args.out, "Report JSON");
    solve_cmd->add_option("--trace", solve_args.trace, "Trace CSV");

    std::string relax_case, relax_objective, relax_out;
    auto* relax_cmd = app.add_subcommand("relax", "Solve the second-order cone relaxation");
    relax_cmd->add_option("--case", relax_case)->required();
    relax_cmd->add_option("--objective", relax_objective)->check(CLI::IsMember({"loss", "cost"}))->required();
    relax_cmd->add_option("--out", relax_out)->required();

    RasterArgs raster_args;
    auto* raster_cmd = app.add_subcommand("raster", "Rasterize feasible regions over two edges");
    raster_cmd->add_option("--case", raster_args.case_path)->required();
    raster_cmd->add_option("--edges", raster_args.edges, "i,j")->required();
    raster_cmd->add_option("--resolution", raster_args.resolution)->required();
    raster_cmd->add_option("--set", raster_args.set)
        ->check(CLI::IsMember({"original", "restricted", "both"}))
        ->required();
    raster_cmd->add_option("--base-from", raster_args.base_from, "Base-point JSON or solve report");
    raster_cmd->add_option("--fix", raster_args.fix, "k=v, pins edge k");
    raster_cmd->add_option("--out", raster_args.out)->required();

    std::string check_case, check_point;
    double check_tol = kIterateFeasibilityTol;
    auto* check_cmd = app.add_subcommand("check", "Check a point against the original constraints");
    check_cmd->add_option("--case", check_case)->required();
    check_cmd->add_option("--point", check_point)->required();
    check_cmd->add_option("--tol", check_tol);

    std::string sim_case, sim_point, sim_out;
    double sim_noise = 0.0;
    std::uint64_t sim_seed = 0;
    auto* sim_cmd = app.add_subcommand("simulate", "Simulate bus measurements at a point");
    sim_cmd->add_option("--case", sim_case)->required();
    sim_cmd->add_option("--point", sim_point)->required();
    sim_cmd->add_option("--noise", sim_noise)->required();
    sim_cmd->add_option("--seed", sim_seed)->required();
    sim_cmd->add_option("--out", sim_out)->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        return ok(app.help());
    } catch (const CLI::CallForAllHelp&) {
        return ok(app.help("", CLI::AppFormatMode::All));
    } catch (const CLI::ParseError& e) {
        return {kExitInput, std::nullopt, std::string("usage error: ") + e.what()};
    }

    try {
        if (*validate_cmd) return cmd_validate(case_path);
        if (*import_cmd) return cmd_import(matpower_path, import_out);
        if (*solve_cmd) return cmd_solve(solve_args);
        if (*relax_cmd) return cmd_relax(relax_case, relax_objective, relax_out);
        if (*raster_cmd) return cmd_raster(raster_args);
        if (*check_cmd) return cmd_check(check_case, check_point, check_tol);
        if (*sim_cmd) return cmd_simulate(sim_case, sim_point, sim_noise, sim_seed, sim_out);
    } catch (const InputError& e) {
        return {kExitInput, std::nullopt, e.what()};
    } catch (const ParseError& e) {
        return {kExitInput, std::nullopt, std::string("parse error: ") + e.what()};
    } catch (const DimensionMismatch& e) {
        return {kExitInput, std::nullopt, std::string("input error: ") + e.what()};
    } catch (const UnknownBus& e) {
        return {kExitInput, std::nullopt, std::string("input error: ") + e.what()};
    } catch (const std::invalid_argument& e) {
        return {kExitInput, std::nullopt, std::string("input error: ") + e.what()};
    } catch (const Infeasible& e) {
        return {kExitInfeasible, std::nullopt, std::string("infeasible: ") + e.what()};
    } catch (const Error& e) {
        return {kExitSolver, std::nullopt, std::string("solver failure: ") + e.what()};
    } catch (const std::exception& e) {
        return {kExitSolver, std::nullopt, std::string("internal error: ") + e.what()};
    }
    return {kExitInput, std::nullopt, "usage error: no subcommand"};
}

}  // namespace radopf::cli
