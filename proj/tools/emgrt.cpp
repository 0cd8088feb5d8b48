#include <iostream>
#include <string>
#include <vector>

#include "emgrt/cli.hpp"

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv, argv + argc);
    return emgrt::cli::run(args, std::cout, std::cerr);
}
