#include <iostream>

#include "fc2t/cli.hpp"

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(true);
  std::vector<std::string> args(argv + 1, argv + argc);
  return fc2t::cli::run_cli(args, std::cout, std::cerr);
}
