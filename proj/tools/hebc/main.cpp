#include <iostream>

#include "heb/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return heb::run_cli(args, std::cout, std::cerr);
}
