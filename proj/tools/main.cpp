#include <iostream>

#include "varest/cli.hpp"

int main(int argc, char** argv) { return varest::run_cli(argc, argv, std::cout, std::cerr); }
