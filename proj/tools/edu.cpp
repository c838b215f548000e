#include "edu/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return edu::run_cli(argc, argv, std::cout, std::cerr); }
