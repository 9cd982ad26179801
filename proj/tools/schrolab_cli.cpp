#include "schrolab/runner.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return schrolab::cli_main(argc, argv, std::cout, std::cerr);
}
