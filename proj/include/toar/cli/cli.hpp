// Copyright The toar-audit Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TOAR_CLI_CLI_HPP
#define TOAR_CLI_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace toar::cli
{

enum ExitCode : int
{
  kExitOk = 0,
  kExitUsage = 2,
  kExitHypothesis = 3,
  kExitBoundViolation = 4
};

// Entry point behind the toar-audit binary. `args` excludes the program name.
int main(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

}  // namespace toar::cli

#endif  // TOAR_CLI_CLI_HPP
