#include <iostream>

#include "consensus_lab/cli.hpp"

int main(int argc, char** argv) {
  return consensus_lab::cli::main(argc, argv, std::cout, std::cerr);
}
