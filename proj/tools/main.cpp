#include <iostream>
#include <string>
#include <vector>

#include "sybilreg/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return sybilreg::run_cli(args, std::cout, std::cerr);
}
