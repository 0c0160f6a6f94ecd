#include <iostream>
#include <string>
#include <vector>

#include "shelfscan_tools/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return shelfscan::cli::run(args, std::cout, std::cerr);
}
