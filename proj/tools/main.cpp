#include <iostream>

#include "nvi/cli/app.hpp"

int main(int argc, char** argv) { return nvi::cli::run(argc, argv, std::cout, std::cerr); }
