#include <iostream>
#include <string>
#include <vector>

#include "breps/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return breps::cli::run(args, std::cout, std::cerr);
}
