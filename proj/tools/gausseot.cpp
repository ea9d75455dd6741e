#include <iostream>

#include "cli/commands.hpp"

int main(int argc, char** argv) {
  return gausseot::cli::run_app(argc, argv, std::cout, std::cerr);
}
