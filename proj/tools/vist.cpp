#include <iostream>

#include "vist/cli/app.hpp"

int main(int argc, char** argv) { return vist::cli::run(argc, argv, std::cout, std::cerr); }
