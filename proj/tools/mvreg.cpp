#include <iostream>

#include "mvreg/cli.hpp"

int main(int argc, char** argv) {
  return mvreg::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}
