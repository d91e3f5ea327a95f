#include <iostream>

#include "rankcast/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return rankcast::run_cli(args, std::cout, std::cerr);
}
