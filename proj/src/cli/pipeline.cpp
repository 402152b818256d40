// Copyright The toar-audit Authors.
// SPDX-License-Identifier: Apache-2.0

#include "toar/cli/pipeline.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <random>
#include <stdexcept>
#include <thread>

#include "toar/arnoldi.hpp"

namespace toar::cli
{

namespace
{

Matrix gaussian(Index rows, Index cols, std::mt19937_64 &rng)
{
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; j++)
  {
    for (Index i = 0; i < rows; i++)
    {
      const double re = normal(rng);
      const double im = normal(rng);
      m(i, j) = Complex(re, im) * M_SQRT1_2;
    }
  }
  return m;
}

Matrix with_norm(Matrix m, double target)
{
  if (target == 0.0)
  {
    return Matrix::Zero(m.rows(), m.cols());
  }
  m *= target / spectral_norm(m);
  return m;
}

double median(std::vector<double> v)
{
  if (v.empty())
  {
    return 0.0;
  }
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

double relative(double value, double reference)
{
  return reference > 0.0 ? value / reference : value;
}

OracleDistances run_oracles(const ScalingPlan &plan, const StartPair &scaled_start,
                            const ToarDecomposition &dec, const StabilityAudit *scaled_audit)
{
  OracleDistances out;
  const auto guarded = [&out](const char *what, auto &&f) -> std::optional<double>
  {
    try
    {
      return f();
    }
    catch (const std::exception &e)
    {
      out.notes.push_back(std::string(what) + ": " + e.what());
      return std::nullopt;
    }
  };

  out.arnoldi = guarded("arnoldi",
                        [&]
                        {
                          const CompanionOperator op(plan.scaled);
                          const ArnoldiDecomposition ref =
                              arnoldi_run(op, embed_start(scaled_start).v, dec.steps());
                          const Matrix v = dec.V();
                          const Index cols = std::min(v.cols(), ref.V.cols());
                          if (cols != v.cols() || cols != ref.V.cols())
                          {
                            out.notes.push_back(
                                "arnoldi: basis sizes differ, compared leading columns");
                          }
                          return subspace_distance(v.leftCols(cols), ref.V.leftCols(cols));
                        });
  out.brute_force = guarded("brute_force",
                            [&]
                            {
                              return subspace_distance(
                                  dec.Qk(), brute_force_second_order_basis(
                                                plan.scaled, scaled_start, dec.steps()));
                            });
  if (scaled_audit && scaled_audit->recovered)
  {
    out.regenerated = guarded("regenerated",
                              [&]
                              {
                                return regenerated_subspace_distance(
                                    plan.scaled, dec, scaled_audit->backward,
                                    *scaled_audit->recovered);
                              });
  }
  return out;
}

}  // namespace

ProblemPair random_pair(Index n, double norm_a, double norm_b, std::uint64_t seed)
{
  if (n < 1)
  {
    throw std::invalid_argument("random_pair: n must be >= 1");
  }
  if (!(norm_a >= 0.0) || !(norm_b >= 0.0) || !std::isfinite(norm_a) || !std::isfinite(norm_b))
  {
    throw std::invalid_argument("random_pair: target norms must be finite and nonnegative");
  }
  std::mt19937_64 rng(seed);
  Matrix a = with_norm(gaussian(n, n, rng), norm_a);
  Matrix b = with_norm(gaussian(n, n, rng), norm_b);
  return ProblemPair(std::move(a), std::move(b));
}

StartPair random_start(Index n, std::uint64_t seed)
{
  std::mt19937_64 rng(seed ^ 0x5bd1e995ULL);
  const Matrix r = gaussian(n, 2, rng);
  return StartPair(r.col(0), r.col(1));
}

PipelineResult run_pipeline(const ProblemPair &pair, const StartPair &start, Index steps,
                            const PipelineOptions &options)
{
  ScalingPlan plan = make_plan(pair, options.mode, options.band);
  const StartPair scaled_start = scale_start(plan, start);
  PipelineResult result{plan, toar_run(plan.scaled, scaled_start, steps), steps,
                        std::nullopt, std::nullopt, std::nullopt, std::nullopt};

  if (options.audit)
  {
    try
    {
      result.scaled_audit = run_audit(result.plan.scaled, result.decomposition);
      result.audit = unscale_report(result.plan, *result.scaled_audit);
    }
    catch (const HypothesisError &e)
    {
      result.hypothesis_failure = e.what();
    }
  }
  if (options.oracle)
  {
    if (pair.size() > kAssemblyLimit)
    {
      OracleDistances skipped;
      skipped.notes.push_back("oracle checks skipped: n = " + std::to_string(pair.size()) +
                              " exceeds " + std::to_string(kAssemblyLimit));
      result.oracle = std::move(skipped);
    }
    else
    {
      result.oracle =
          run_oracles(result.plan, scaled_start, result.decomposition,
                      result.scaled_audit ? &*result.scaled_audit : nullptr);
    }
  }
  return result;
}

void validate(const SweepConfig &config)
{
  if (config.norms_a.empty() || config.norms_b.empty())
  {
    throw std::invalid_argument("sweep: norm grids must be nonempty");
  }
  for (const auto *grid : {&config.norms_a, &config.norms_b})
  {
    for (const double v : *grid)
    {
      if (!(v > 0.0) || !std::isfinite(v))
      {
        throw std::invalid_argument("sweep: norm targets must be positive and finite");
      }
    }
  }
  if (config.paired && config.norms_a.size() != config.norms_b.size())
  {
    throw std::invalid_argument("sweep: paired grids must have equal length");
  }
  if (config.n < 1 || config.steps < 1 || config.steps >= 2 * config.n)
  {
    throw std::invalid_argument("sweep: need n >= 1 and 1 <= steps < 2n");
  }
  if (config.trials < 1)
  {
    throw std::invalid_argument("sweep: trials must be >= 1");
  }
}

Aggregate aggregate(const std::vector<TrialMetrics> &trials)
{
  Aggregate g;
  g.trials = static_cast<Index>(trials.size());
  if (trials.empty())
  {
    return g;
  }
  const auto column = [&trials](double TrialMetrics::*field)
  {
    std::vector<double> v;
    v.reserve(trials.size());
    for (const TrialMetrics &t : trials)
    {
      v.push_back(t.*field);
    }
    return v;
  };
  const auto maximum = [](const std::vector<double> &v)
  { return *std::max_element(v.begin(), v.end()); };

  g.median_delta_a = median(column(&TrialMetrics::delta_a));
  g.median_delta_b = median(column(&TrialMetrics::delta_b));
  const auto rel_a = column(&TrialMetrics::relative_delta_a);
  const auto rel_b = column(&TrialMetrics::relative_delta_b);
  const auto dist = column(&TrialMetrics::distance);
  g.median_relative_delta_a = median(rel_a);
  g.median_relative_delta_b = median(rel_b);
  g.max_relative_delta_a = maximum(rel_a);
  g.max_relative_delta_b = maximum(rel_b);
  g.median_distance = median(dist);
  g.max_distance = maximum(dist);
  g.bound_violations = std::count_if(trials.begin(), trials.end(),
                                     [](const TrialMetrics &t) { return !t.bounds_satisfied; });
  return g;
}

std::uint64_t cell_seed(std::uint64_t seed, std::size_t cell, Index trial)
{
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(cell), static_cast<std::uint32_t>(trial)};
  std::array<std::uint32_t, 2> words{};
  seq.generate(words.begin(), words.end());
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

unsigned sweep_threads(unsigned requested)
{
  if (requested > 0)
  {
    return requested;
  }
  if (const char *env = std::getenv("TOAR_AUDIT_THREADS"))
  {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0)
    {
      return static_cast<unsigned>(v);
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace
{

struct CellSpec
{
  double norm_a;
  double norm_b;
};

CellResult run_cell(const SweepConfig &config, const CellSpec &spec, std::size_t index)
{
  CellResult cell;
  cell.norm_a = spec.norm_a;
  cell.norm_b = spec.norm_b;
  cell.seed = cell_seed(config.seed, index, 0);

  std::vector<TrialMetrics> scaled;
  std::vector<TrialMetrics> unscaled;
  const auto attempt = [&](const ProblemPair &pair, const StartPair &start, Index trial,
                           const ScalingMode &mode, const char *variant,
                           std::vector<TrialMetrics> &into)
  {
    try
    {
      const PipelineResult r = run_pipeline(pair, start, config.steps,
                                            {mode, config.band, true, false});
      if (r.hypothesis_failure)
      {
        cell.failures.push_back({trial, variant, *r.hypothesis_failure});
        return;
      }
      const StabilityAudit &a = *r.audit;
      if (!a.recoverable || !a.bounds_applicable)
      {
        cell.failures.push_back(
            {trial, variant, a.diagnostics.empty() ? "audit infeasible" : a.diagnostics.front()});
        return;
      }
      into.push_back({a.norm_delta_a, a.norm_delta_b, relative(a.norm_delta_a, pair.norm_a()),
                      relative(a.norm_delta_b, pair.norm_b()), a.measured_distance,
                      a.all_satisfied()});
    }
    catch (const std::exception &e)
    {
      cell.failures.push_back({trial, variant, e.what()});
    }
  };

  for (Index t = 0; t < config.trials; t++)
  {
    const std::uint64_t s = cell_seed(config.seed, index, t);
    try
    {
      const ProblemPair pair = random_pair(config.n, spec.norm_a, spec.norm_b, s);
      const StartPair start = random_start(config.n, s);
      if (t == 0)
      {
        const ScalingPlan plan = make_plan(pair, ScalingMode::automatic(), config.band);
        cell.regime = plan.regime;
        cell.alpha = plan.alpha;
      }
      attempt(pair, start, t, ScalingMode::automatic(), "scaled", scaled);
      if (config.with_and_without_scaling)
      {
        attempt(pair, start, t, ScalingMode::none(), "unscaled", unscaled);
      }
    }
    catch (const std::exception &e)
    {
      cell.failures.push_back({t, "setup", e.what()});
    }
  }

  cell.scaled = aggregate(scaled);
  if (config.with_and_without_scaling)
  {
    cell.unscaled = aggregate(unscaled);
    if (!scaled.empty() && !unscaled.empty() && cell.scaled->median_relative_delta_b > 0.0)
    {
      cell.improvement =
          cell.unscaled->median_relative_delta_b / cell.scaled->median_relative_delta_b;
    }
  }
  return cell;
}

}  // namespace

std::vector<CellResult> sweep(const SweepConfig &config)
{
  validate(config);
  std::vector<CellSpec> specs;
  if (config.paired)
  {
    for (std::size_t i = 0; i < config.norms_a.size(); i++)
    {
      specs.push_back({config.norms_a[i], config.norms_b[i]});
    }
  }
  else
  {
    for (const double a : config.norms_a)
    {
      for (const double b : config.norms_b)
      {
        specs.push_back({a, b});
      }
    }
  }

  std::vector<CellResult> results(specs.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&]
  {
    for (std::size_t i = next++; i < specs.size(); i = next++)
    {
      results[i] = run_cell(config, specs[i], i);
    }
  };
  const unsigned threads =
      std::min<unsigned>(sweep_threads(config.threads), static_cast<unsigned>(specs.size()));
  if (threads <= 1)
  {
    worker();
    return results;
  }
  std::vector<std::jthread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; t++)
  {
    pool.emplace_back(worker);
  }
  pool.clear();
  return results;
}

}  // namespace toar::cli
