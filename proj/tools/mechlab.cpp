#include "mechlab/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return mechlab::cli::main_entry(argc, argv, std::cout, std::cerr); }
