#include <iostream>

#include "eurlab/cli.hpp"

int main(int argc, char** argv) { return eurlab::cli::main_entry(argc, argv, std::cout, std::cerr); }
