#include <iostream>
#include <string>
#include <vector>

#include "lightguide/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return lightguide::run_cli(args, std::cout, std::cerr);
}
