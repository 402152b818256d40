// Copyright The toar-audit Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TOAR_CLI_REPORT_HPP
#define TOAR_CLI_REPORT_HPP

#include "json.hpp"
#include <string>
#include "toar/cli/pipeline.hpp"

namespace toar::cli
{

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;
inline constexpr const char *kToolName = "toar-audit";
inline constexpr const char *kToolVersion = "1.0.0";

// Non-finite values become null.
Json number(double x);

std::string hex(std::uint64_t h);

Json plan_json(const ScalingPlan &plan, double band);
Json decomposition_json(const ToarDecomposition &dec, Index requested_steps);
Json audit_json(const StabilityAudit &audit, const std::optional<StabilityAudit> &scaled);
Json oracle_json(const OracleDistances &oracle);

struct RunInfo
{
  std::uint64_t seed = 0;
  std::string start_mode;  // "file" or "random"
  bool audit_enabled = true;
  double band = kDefaultRegimeBand;
};

// Exit status the report describes: 0 ok, 3 hypothesis failure or bounds not
// applicable, 4 bound violation.
int run_status(const PipelineResult &result, bool audit_enabled);

Json run_report(const ProblemPair &pair, const StartPair &start, const PipelineResult &result,
                const RunInfo &info);

Json sweep_report(const SweepConfig &config, const std::vector<CellResult> &cells);

// One row per cell, fixed column order.
std::string sweep_csv(const std::vector<CellResult> &cells);

}  // namespace toar::cli

#endif  // TOAR_CLI_REPORT_HPP
