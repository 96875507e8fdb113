#include <iostream>

#include "ctmg/cli.hpp"

int main(int argc, char** argv) { return ctmg::cli::run(argc, argv, std::cout, std::cerr); }
