// Copyright The toar-audit Authors.
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "toar/cli/cli.hpp"

int main(int argc, char **argv)
{
  return toar::cli::main(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
