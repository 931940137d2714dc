#include <iostream>

#include "likratio_cli/cli.hpp"

int main(int argc, char** argv) {
  return likratio::cli::parse_and_dispatch(argc, argv, std::cout, std::cerr);
}
