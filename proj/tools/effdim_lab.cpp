#include "effdim/cli.hpp"

#include <iostream>

int main(int argc, char **argv) { return effdim::run_cli(argc, argv, std::cerr); }
