#include "mirrorvlc/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return mirrorvlc::run_cli(argc, argv, std::cout, std::cerr); }
