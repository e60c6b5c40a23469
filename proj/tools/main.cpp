#include <iostream>

#include "softsensor/cli.hpp"

int main(int argc, char** argv) { return softsensor::run_cli(argc, argv, std::cout, std::cerr); }
