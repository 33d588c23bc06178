#include <iostream>

#include "womops/cli.hpp"

int main(int argc, char** argv) { return womops::cli::run(argc, argv, std::cout, std::cerr); }
