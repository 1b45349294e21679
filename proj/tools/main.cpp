#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
  return transrank::cli::run(argc, argv, std::cout, std::cerr);
}
