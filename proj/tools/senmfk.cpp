#include <iostream>

#include "senmfk/cli.hpp"

int main(int argc, char** argv) { return senmfk::cli::run(argc, argv, std::cout, std::cerr); }
