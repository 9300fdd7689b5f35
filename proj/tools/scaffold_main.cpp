#include <iostream>
#include <string>
#include <vector>

#include "scaffolding/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return scaffolding::cli_main(args, std::cout, std::cerr);
}
