#include <iostream>
#include <string>
#include <vector>

#include "cpsense/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return cpsense::cli::run(args, std::cout, std::cerr);
}
