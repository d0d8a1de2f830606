#include <iostream>

#include "qad/cli.hpp"

int main(int argc, char** argv) { return qad::cli::run_cli(argc, argv, std::cout, std::cerr); }
