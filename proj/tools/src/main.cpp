#include <iostream>

#include "campaign_cli/cli.hpp"

int main(int argc, char** argv) {
  return campaign::cli::run(argc, argv, std::cout, std::cerr);
}
