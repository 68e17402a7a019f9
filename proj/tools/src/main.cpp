#include <iostream>

#include "goe_cli/cli.hpp"

int main(int argc, char** argv) { return goe::cli::run_cli(argc, argv, std::cin, std::cout, std::cerr); }
