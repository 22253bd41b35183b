#include <iostream>
#include <string>
#include <vector>

#include "uext/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return uext::cli::dispatch(args, std::cout, std::cerr);
}
