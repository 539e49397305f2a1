#include <iostream>

#include "spog/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return spog::run_cli(args, std::cout, std::cerr);
}
