#include <iostream>

#include "tgp/cli/commands.hpp"

int main(int argc, char** argv) { return tgp::cli::run(argc, argv, std::cout, std::cerr); }
