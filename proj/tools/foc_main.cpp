#include <iostream>
#include <string>
#include <vector>

#include "foc/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return foc::runCli(args, std::cout, std::cerr);
}
