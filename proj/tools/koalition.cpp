#include <iostream>

#include "koalition/cli.hpp"

int main(int argc, char** argv) {
  return koalition::cli::run(argc, argv, std::cout, std::cerr);
}
