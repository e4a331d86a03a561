#include <iostream>

#include "ews/cli.hpp"

int main(int argc, char** argv) { return ews::run_cli(argc, argv, std::cout, std::cerr); }
