#include <iostream>

#include "msd/cli.hpp"

int main(int argc, char** argv) { return msd::cli::main(argc, argv, std::cout, std::cerr); }
