#include <iostream>
#include <string>
#include <vector>

#include "regionedit/cli/app.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return regionedit::cli::run_cli(args, std::cout, std::cerr);
}
