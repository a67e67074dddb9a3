#pragma once

#include <optional>
#include <string>
#include <vector>

namespace radopf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInfeasible = 2;
inline constexpr int kExitInput = 3;
inline constexpr int kExitSolver = 4;

struct CommandOutcome {
    int exit_code = kExitOk;
    std::optional<std::string> report_path;
    /// One line, printed on standard output by the executable.
    std::string summary;
};

/// Runs one subcommand. `args` excludes the program name, e.g.
/// {"solve", "--case", "c.json", "--objective", "loss", "--out", "r.json"}.
/// Never throws; every failure maps to an exit code.
CommandOutcome run(const std::vector<std::string>& args);

}  // namespace radopf::cli
