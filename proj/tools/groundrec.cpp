#include <iostream>
#include <string>
#include <vector>

#include "groundrec/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return groundrec::cli::run(args, std::cout, std::cerr);
}
