#include <iostream>

#include "equimap/cli.hpp"

int main(int argc, char** argv) { return equimap::cli::run(argc, argv, std::cout, std::cerr); }
