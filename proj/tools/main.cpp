#include <iostream>

#include "sidewidth/cli.hpp"

int main(int argc, char** argv) { return sidewidth::run_cli(argc, argv, std::cout, std::cerr); }
