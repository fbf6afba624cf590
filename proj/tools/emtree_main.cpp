#include <iostream>
#include <string>
#include <vector>

#include "emtree/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return emtree::run_cli(args, std::cout, std::cerr);
}
