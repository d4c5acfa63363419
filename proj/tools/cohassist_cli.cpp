#include <iostream>

#include "cohassist/cli/commands.hpp"

int main(int argc, char** argv) { return cohassist::cli::run_cli(argc, argv, std::cout, std::cerr); }
