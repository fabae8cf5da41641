#include "coinccl/commands.hpp"

int main(int argc, char** argv) {
  return coinccl::cli_main(argc, argv);
}
