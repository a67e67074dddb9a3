#include "radopf/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv + 1, argv + argc);
    const auto outcome = radopf::cli::run(args);
    std::cout << outcome.summary << '\n';
    return outcome.exit_code;
}
