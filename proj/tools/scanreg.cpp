#include <iostream>
#include <string>
#include <vector>

#include "scanreg/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return scanreg::cli::main_entry(args, std::cout, std::cerr);
}
