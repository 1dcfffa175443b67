#include <string>
#include <vector>

#include "sentlab/cli.hpp"

int main(int argc, char** argv) {
  return sentlab::cli::run(std::vector<std::string>(argv, argv + argc));
}
