#include <iostream>

#include "carboneq/cli.hpp"

int main(int argc, char** argv) { return carboneq::run_cli(argc, argv, std::cout, std::cerr); }
