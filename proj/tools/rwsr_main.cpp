#include <string>
#include <vector>

#include "rwsr/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return rwsr::cli::run(args);
}
