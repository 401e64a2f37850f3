#include <iostream>

#include "canonimanip/cli.hpp"

int main(int argc, char** argv) { return canonimanip::run_cli(argc, argv, std::cout, std::cerr); }
