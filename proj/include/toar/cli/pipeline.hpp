// Copyright The toar-audit Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TOAR_CLI_PIPELINE_HPP
#define TOAR_CLI_PIPELINE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>
#include "toar/scaling.hpp"

namespace toar::cli
{

// Complex Gaussian entries, each matrix rescaled to the requested spectral norm.
// A zero target gives a zero matrix.
ProblemPair random_pair(Index n, double norm_a, double norm_b, std::uint64_t seed);
StartPair random_start(Index n, std::uint64_t seed);

struct PipelineOptions
{
  ScalingMode mode = ScalingMode::automatic();
  double band = kDefaultRegimeBand;
  bool audit = true;
  bool oracle = false;  // needs n <= kAssemblyLimit
};

// Reference distances computed outside the compact iteration.
struct OracleDistances
{
  std::optional<double> arnoldi;      // span V (compact) vs full Arnoldi on the scaled companion
  std::optional<double> brute_force;  // span Q_k vs the recurrence-generated G_k
  std::optional<double> regenerated;  // nearby basis vs G_k of the recovered problem
  std::vector<std::string> notes;
};

struct PipelineResult
{
  ScalingPlan plan;
  ToarDecomposition decomposition;
  Index requested_steps = 0;
  std::optional<StabilityAudit> scaled_audit;
  std::optional<StabilityAudit> audit;  // mapped back to the original pair
  std::optional<std::string> hypothesis_failure;
  std::optional<OracleDistances> oracle;
};

// make_plan -> toar_run on the scaled pair with adjusted starts -> run_audit ->
// unscale_report. A HypothesisError in the audit is captured in the result.
PipelineResult run_pipeline(const ProblemPair &pair, const StartPair &start, Index steps,
                            const PipelineOptions &options);

struct SweepConfig
{
  std::vector<double> norms_a;
  std::vector<double> norms_b;
  Index n = 20;
  Index steps = 10;
  Index trials = 3;
  std::uint64_t seed = 0;
  bool with_and_without_scaling = false;
  // Zip the two grids instead of taking their product.
  bool paired = false;
  double band = kDefaultRegimeBand;
  // 0 reads TOAR_AUDIT_THREADS, then the hardware concurrency.
  unsigned threads = 0;
};

// Throws std::invalid_argument for empty grids, nonpositive targets, mismatched
// paired grids or invalid sizes.
void validate(const SweepConfig &config);

struct TrialMetrics
{
  double delta_a = 0.0;
  double delta_b = 0.0;
  double relative_delta_a = 0.0;
  double relative_delta_b = 0.0;
  double distance = 0.0;
  bool bounds_satisfied = false;
};

struct Aggregate
{
  Index trials = 0;  // successful trials behind the statistics
  double median_delta_a = 0.0;
  double median_delta_b = 0.0;
  double median_relative_delta_a = 0.0;
  double median_relative_delta_b = 0.0;
  double max_relative_delta_a = 0.0;
  double max_relative_delta_b = 0.0;
  double median_distance = 0.0;
  double max_distance = 0.0;
  Index bound_violations = 0;
};

Aggregate aggregate(const std::vector<TrialMetrics> &trials);

struct CellFailure
{
  Index trial = 0;
  std::string variant;  // "scaled" or "unscaled"
  std::string message;
};

struct CellResult
{
  double norm_a = 0.0;
  double norm_b = 0.0;
  Regime regime = Regime::unscaled;
  double alpha = 1.0;
  std::uint64_t seed = 0;
  std::optional<Aggregate> scaled;
  std::optional<Aggregate> unscaled;
  // Unscaled over scaled median relative ||dB||; present when both ran.
  std::optional<double> improvement;
  std::vector<CellFailure> failures;
};

std::uint64_t cell_seed(std::uint64_t seed, std::size_t cell, Index trial);

// Runs every cell (in parallel when threads allow); results are in grid order.
std::vector<CellResult> sweep(const SweepConfig &config);

unsigned sweep_threads(unsigned requested);

}  // namespace toar::cli

#endif  // TOAR_CLI_PIPELINE_HPP
