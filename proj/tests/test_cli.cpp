#include "support.hpp"

#include "radopf/cli.hpp"
#include "radopf/model.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <random>

using namespace radopf;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        std::random_device rd;
        path = fs::temp_directory_path() / ("radopf-cli-" + std::to_string(rd()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

void write(const std::string& path, const std::string& text) {
    std::ofstream(path) << text;
}

nlohmann::json load(const std::string& path) { return nlohmann::json::parse(support::slurp(path)); }

std::string fixture(const std::string& name) { return support::fixture_path(name); }

}  // namespace

TEST_CASE("solve on the 2-bus fixture writes a report") {
    TempDir tmp;
    const auto out = cli::run({"solve", "--case", fixture("fix2.json"), "--objective", "loss", "--out",
                               tmp / "report.json", "--trace", tmp / "trace.csv"});
    REQUIRE(out.exit_code == 0);
    CHECK(out.report_path == tmp / "report.json");
    const auto report = load(tmp / "report.json");
    CHECK(report["final_objective"].get<double>() == Approx(0.073353).epsilon(1e-4));
    CHECK(report["certificate"]["feasible"].get<bool>());
    CHECK(report["config"]["eps"].get<double>() == 1e-8);
    CHECK(report["config"]["solver"]["barrier_growth"].get<double>() == 10.0);
    CHECK(report.contains("timing"));
    const auto trace = support::slurp(tmp / "trace.csv");
    CHECK(trace.starts_with("k,objective,max_violation,newton_iters,wall_ms\n"));
}

TEST_CASE("unreachable bound exits with 2") {
    const auto out = cli::run({"solve", "--case", fixture("infeasible.json"), "--objective", "loss"});
    CHECK(out.exit_code == 2);
    CHECK(out.summary.starts_with("infeasible"));
}

TEST_CASE("raster writes one line per cell") {
    TempDir tmp;
    const auto out = cli::run({"raster", "--case", fixture("fix3.json"), "--edges", "0,1", "--resolution",
                               "200", "--set", "both", "--out", tmp / "grid.csv"});
    REQUIRE(out.exit_code == 0);
    const auto csv = support::slurp(tmp / "grid.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 40001);
}

TEST_CASE("raster can reuse the base points of a solve report") {
    TempDir tmp;
    REQUIRE(cli::run({"solve", "--case", fixture("fix3.json"), "--objective", "cost", "--out",
                      tmp / "r.json"})
                .exit_code == 0);
    const auto out = cli::run({"raster", "--case", fixture("fix3.json"), "--edges", "1,0", "--resolution",
                               "20", "--set", "restricted", "--base-from", tmp / "r.json", "--out",
                               tmp / "g.csv"});
    CHECK(out.exit_code == 0);
}

TEST_CASE("usage and input errors exit with 3") {
    TempDir tmp;
    CHECK(cli::run({"solve", "--case", fixture("fix2.json"), "--objective", "loss", "--bogus"}).exit_code == 3);
    CHECK(cli::run({"solve", "--case", tmp / "missing.json", "--objective", "loss"}).exit_code == 3);
    CHECK(cli::run({"solve", "--case", fixture("fix2.json"), "--objective", "nope"}).exit_code == 3);
    CHECK(cli::run({"solve", "--case", fixture("fix2.json"), "--objective", "estimate"}).exit_code == 3);
    CHECK(cli::run({"solve", "--case", fixture("fix2.json"), "--objective", "loss", "--eps", "-1"}).exit_code == 3);
    CHECK(cli::run({"frobnicate"}).exit_code == 3);
    CHECK(cli::run({}).exit_code == 3);
    write(tmp / "bad.json", "{\"slack_bus\": 1}");
    CHECK(cli::run({"validate", "--case", tmp / "bad.json"}).exit_code == 3);
    write(tmp / "cycle.json", R"({"slack_bus": 1,
      "buses": [{"id": 1}, {"id": 2}],
      "edges": [{"from": 1, "to": 2, "g": 1, "b": 1, "theta_min": -1, "theta_max": 1},
                {"from": 2, "to": 1, "g": 1, "b": 1, "theta_min": -1, "theta_max": 1}]})");
    const auto v = cli::run({"validate", "--case", tmp / "cycle.json"});
    CHECK(v.exit_code == 3);
    CHECK(v.summary.find("not a tree") != std::string::npos);
    CHECK(cli::run({"raster", "--case", fixture("fix3.json"), "--edges", "0,7", "--resolution", "10",
                    "--set", "both", "--out", tmp / "g.csv"})
              .exit_code == 3);
}

TEST_CASE("validate, check and relax") {
    TempDir tmp;
    CHECK(cli::run({"validate", "--case", fixture("fix3.json")}).exit_code == 0);

    write(tmp / "p.json", R"({"z": [0.0]})");
    const auto bad = cli::run({"check", "--case", fixture("fix2.json"), "--point", tmp / "p.json"});
    CHECK(bad.exit_code == 2);
    CHECK(bad.summary.find("p_max bus 2") != std::string::npos);
    write(tmp / "q.json", R"({"z": [0.5]})");
    CHECK(cli::run({"check", "--case", fixture("fix2.json"), "--point", tmp / "q.json"}).exit_code == 0);
    write(tmp / "r.json", R"({"z": [0.5, 0.1]})");
    CHECK(cli::run({"check", "--case", fixture("fix2.json"), "--point", tmp / "r.json"}).exit_code == 3);

    const auto relax = cli::run({"relax", "--case", fixture("fix2.json"), "--objective", "loss", "--out",
                                 tmp / "relax.json"});
    REQUIRE(relax.exit_code == 0);
    const auto doc = load(tmp / "relax.json");
    CHECK(doc["objective_value"].get<double>() == Approx(0.073353).epsilon(1e-4));
    CHECK(doc["exact"].get<bool>());
    CHECK(cli::run({"relax", "--case", fixture("infeasible.json"), "--objective", "loss", "--out",
                    tmp / "x.json"})
              .exit_code == 2);
}

TEST_CASE("simulate is deterministic under a seed and feeds estimation") {
    TempDir tmp;
    write(tmp / "p.json", R"({"z": [0.1, 0.2]})");
    for (const char* name : {"a.json", "b.json"}) {
        REQUIRE(cli::run({"simulate", "--case", fixture("fix3.json"), "--point", tmp / "p.json", "--noise",
                          "0.01", "--seed", "42", "--out", tmp / name})
                    .exit_code == 0);
    }
    CHECK(support::slurp(tmp / "a.json") == support::slurp(tmp / "b.json"));

    REQUIRE(cli::run({"simulate", "--case", fixture("fix3.json"), "--point", tmp / "p.json", "--noise", "0",
                      "--seed", "1", "--out", tmp / "m.json"})
                .exit_code == 0);
    const auto est = cli::run({"solve", "--case", fixture("fix3.json"), "--objective", "estimate",
                               "--measurements", tmp / "m.json", "--out", tmp / "e.json"});
    REQUIRE(est.exit_code == 0);
    const auto z = load(tmp / "e.json")["final_point"]["z"];
    CHECK(z[0].get<double>() == Approx(0.1).epsilon(1e-4));
    CHECK(z[1].get<double>() == Approx(0.2).epsilon(1e-4));
}

TEST_CASE("import then solve matches solving the converted case") {
    TempDir tmp;
    std::mt19937_64 rng(8);
    write(tmp / "feeder.m", support::synthetic_feeder_matpower(rng, 12));
    REQUIRE(cli::run({"import", "--matpower", tmp / "feeder.m", "--out", tmp / "feeder.json"}).exit_code == 0);

    // Same case, rewritten through the library serializer.
    const auto net = parse_case(support::slurp(tmp / "feeder.json"));
    write(tmp / "copy.json", serialize_case(net));

    for (const auto& [c, r] : {std::pair{"feeder.json", "a.json"}, std::pair{"copy.json", "b.json"}}) {
        REQUIRE(cli::run({"solve", "--case", tmp / c, "--objective", "loss", "--out", tmp / r}).exit_code == 0);
    }
    auto a = load(tmp / "a.json");
    auto b = load(tmp / "b.json");
    a.erase("timing");
    b.erase("timing");
    CHECK(a == b);
}

TEST_CASE("solve accepts an explicit initial point") {
    TempDir tmp;
    write(tmp / "init.json", R"({"z": [0.5]})");
    const auto ok = cli::run({"solve", "--case", fixture("fix2.json"), "--objective", "loss", "--init",
                              tmp / "init.json", "--out", tmp / "r.json"});
    CHECK(ok.exit_code == 0);
    CHECK(load(tmp / "r.json")["init"]["mode"] == "file");
    write(tmp / "bad.json", R"({"z": [0.0]})");
    CHECK(cli::run({"solve", "--case", fixture("fix2.json"), "--objective", "loss", "--init", tmp / "bad.json"})
              .exit_code == 3);
}
