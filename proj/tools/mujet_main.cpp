#include <iostream>

#include "mujet/cli.hpp"

int main(int argc, char** argv)
{
    return mujet::cli::run(argc, argv, std::cout, std::cerr);
}
