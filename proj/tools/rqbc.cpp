#include <iostream>
#include <string>
#include <vector>

#include "rqbc/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return rqbc::cli::main(args, std::cout, std::cerr);
}
