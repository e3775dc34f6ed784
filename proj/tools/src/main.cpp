#include <string>
#include <vector>

#include "con360/cli.hpp"

int main(int argc, char** argv) {
  return con360::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
