#include "sninf/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv + 1, argv + argc);
    const auto outcome = sninf::cli::run_command(args);
    std::cout << outcome.out;
    std::cerr << outcome.err;
    return outcome.exit_code;
}
