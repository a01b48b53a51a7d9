#include <string>
#include <vector>

#include "ifl/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return ifl::cli::run(args);
}
