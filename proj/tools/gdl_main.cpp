#include <iostream>

#include "gdl/cli.hpp"

int main(int argc, char** argv) { return gdl::cli::dispatch(argc, argv, std::cout, std::cerr); }
