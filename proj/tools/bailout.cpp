#include <iostream>

#include "bailout/cli.hpp"

int main(int argc, char** argv) { return bailout::cli::run(argc, argv, std::cout, std::cerr); }
