#include <iostream>
#include <string>
#include <vector>

#include "qsemi/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return qsemi::cli::run(args, std::cout, std::cerr);
}
