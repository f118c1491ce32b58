#include <iostream>

#include "hrelay/cli.hpp"

int main(int argc, char** argv) { return hrelay::run_cli(argc, argv, std::cout, std::cerr); }
