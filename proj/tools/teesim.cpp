#include <iostream>

#include "teesim/cli.hpp"

int main(int argc, char** argv) { return teesim::cli_main(argc, argv, std::cout, std::cerr); }
