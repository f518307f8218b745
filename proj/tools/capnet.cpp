#include <iostream>

#include "capnet/cli.hpp"

int main(int argc, char** argv) { return capnet::cli::run(argc, argv, std::cout, std::cerr); }
