#include <iostream>

#include "stackres/cli.hpp"

int main(int argc, char** argv) { return stackres::cli::run(argc, argv, std::cout, std::cerr); }
