#include <iostream>

#include "mirai/cli.hpp"

int main(int argc, char** argv) { return mirai::cli::run(argc, argv, std::cout, std::cerr); }
