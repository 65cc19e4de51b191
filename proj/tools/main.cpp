#include <iostream>

#include "gpushare/cli.hpp"

int main(int argc, char** argv) { return gpushare::run_cli(argc, argv, std::cout, std::cerr); }
