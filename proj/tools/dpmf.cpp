#include <iostream>
#include <string>
#include <vector>

#include "dpmf/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dpmf::run_cli(args, std::cout, std::cerr);
}
