#include <iostream>

#include "linqs/cli.hpp"

int main(int argc, char** argv) { return linqs::cli::run(argc, argv, std::cout, std::cerr); }
