#include <iostream>

#include "nudg/cli.hpp"

int main(int argc, char** argv) { return nudg::cli::run(argc, argv, std::cout, std::cerr); }
