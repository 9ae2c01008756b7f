#include "ptm_cli/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return ptm::cli::run(argc, argv, std::cout, std::cerr);
}
