// SPDX-License-Identifier: Apache-2.0

#include "tfus/pipeline.hpp"

int main(int argc, char** argv) {
  return tfus::cli_main(std::vector<std::string>(argv + 1, argv + argc));
}
