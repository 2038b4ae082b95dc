#include <iostream>

#include "tagforge/cli.hpp"

int main(int argc, char** argv) {
  return tagforge::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
