#include <iostream>

#include "mirstat/cli.hpp"

int main(int argc, char** argv) { return mirstat::cli_main(argc, argv, std::cout, std::cerr); }
