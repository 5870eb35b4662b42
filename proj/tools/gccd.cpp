#include <iostream>

#include "gccd/cli.hpp"

int main(int argc, char** argv) { return gccd::run_cli(argc, argv, std::cout, std::cerr); }
