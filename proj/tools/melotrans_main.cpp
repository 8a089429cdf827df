/**
 * @file melotrans_main.cpp
 * @brief Entry point for the melotrans command line.
 */

#include <iostream>
#include <string>
#include <vector>

#include "melotrans/pipeline/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return melotrans::pipeline::run_cli(args, std::cout, std::cerr);
}
