#include <iostream>
#include <string>
#include <vector>

#include "kansa_cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return kansa::cli::run(args, std::cout, std::cerr);
}
