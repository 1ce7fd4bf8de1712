#include <iostream>
#include <string>
#include <vector>

#include "pottsrf/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return pottsrf::cli::run(args, std::cout, std::cerr);
}
