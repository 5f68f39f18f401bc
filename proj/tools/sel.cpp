#include <iostream>

#include "sel/harness.hpp"

int main(int argc, char** argv) { return sel::harness::run_cli(argc, argv, std::cout, std::cerr); }
