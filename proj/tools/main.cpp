#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return on2vec::cli::run(argc, argv, std::cout, std::cerr); }
