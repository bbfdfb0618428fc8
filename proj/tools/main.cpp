#include <iostream>

#include "seqprior/cli.hpp"

int main(int argc, char** argv) {
  return seqprior::cli_main(argc, argv, std::cout, std::cerr);
}
