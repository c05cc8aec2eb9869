#include <iostream>

#include "smplab/cli/cli.hpp"

int main(int argc, char** argv) { return smplab::run_cli(argc, argv, std::cout, std::cerr); }
