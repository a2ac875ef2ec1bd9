#include <iostream>

#include "spectrascreen/cli.hpp"

int main(int argc, char** argv) {
  return spectrascreen::cli::dispatch(argc, argv, std::cout, std::cerr);
}
