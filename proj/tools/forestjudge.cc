#include <iostream>

#include "forestjudge/cli.h"

int main(int argc, char** argv) { return forestjudge::run_cli(argc, argv, std::cout, std::cerr); }
