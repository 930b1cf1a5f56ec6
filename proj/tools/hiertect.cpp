#include <iostream>
#include <string>
#include <vector>

#include "hiertect/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return hiertect::cli::run(args, std::cout, std::cerr);
}
