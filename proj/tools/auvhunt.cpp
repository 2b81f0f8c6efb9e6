#include <iostream>

#include "auvhunt/harness/cli.hpp"

int main(int argc, char** argv) {
  return auvhunt::harness::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}
