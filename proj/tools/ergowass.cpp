#include <iostream>

#include "ergowass/cli.hpp"

int main(int argc, char** argv) { return ergowass::run_cli(argc, argv, std::cout, std::cerr); }
