#include <iostream>

#include "tmem/cli.hpp"

int main(int argc, char** argv) { return tmem::run_cli(argc, argv, std::cout, std::cerr); }
