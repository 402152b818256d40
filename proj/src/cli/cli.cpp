// Copyright The toar-audit Authors.
// SPDX-License-Identifier: Apache-2.0

#include "toar/cli/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>

#include "CLI11.hpp"
#include "toar/cli/matrix_market.hpp"
#include "toar/cli/report.hpp"

namespace toar::cli
{

namespace
{

class UsageError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

ScalingMode parse_scale(const std::string &s)
{
  if (s == "auto")
  {
    return ScalingMode::automatic();
  }
  if (s == "none")
  {
    return ScalingMode::none();
  }
  double alpha = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), alpha);
  if (ec != std::errc() || p != s.data() + s.size() || !(alpha > 0.0) || !std::isfinite(alpha))
  {
    throw UsageError("--scale expects auto, none or a positive number, got '" + s + "'");
  }
  return ScalingMode::fixed(alpha);
}

void emit(const std::string &text, const std::string &path, std::ostream &out)
{
  if (path.empty())
  {
    out << text;
    return;
  }
  std::ofstream file(path);
  if (!file)
  {
    throw mm::ParseError("cannot write '" + path + "'");
  }
  file << text;
}

struct RunArgs
{
  std::string matrix_a;
  std::string matrix_b;
  std::string start;
  bool random_start = false;
  long long steps = 0;
  std::string scale = "auto";
  double band = kDefaultRegimeBand;
  bool audit = false;
  bool oracle = false;
  std::string report;
  std::uint64_t seed = 0;
};

int do_run(const RunArgs &a, std::ostream &out, std::ostream &err)
{
  if (a.start.empty() == !a.random_start)
  {
    throw UsageError("give exactly one of --start FILE or --random-start");
  }
  const ScalingMode mode = parse_scale(a.scale);
  const ProblemPair pair(mm::read_file(a.matrix_a), mm::read_file(a.matrix_b));
  const StartPair start =
      a.random_start ? random_start(pair.size(), a.seed) : mm::read_start_file(a.start);
  if (start.size() != pair.size())
  {
    throw UsageError("start vectors have length " + std::to_string(start.size()) +
                     ", matrices are " + std::to_string(pair.size()) + " x " +
                     std::to_string(pair.size()));
  }
  if (a.steps >= 2 * pair.size())
  {
    throw UsageError("--steps must be below 2n = " + std::to_string(2 * pair.size()));
  }

  const PipelineResult result = run_pipeline(pair, start, a.steps, {mode, a.band, a.audit, a.oracle});
  const RunInfo info{a.seed, a.random_start ? "random" : "file", a.audit, a.band};
  emit(run_report(pair, start, result, info).dump(2) + "\n", a.report, out);

  const int status = run_status(result, a.audit);
  if (result.hypothesis_failure)
  {
    err << "audit hypothesis failed: " << *result.hypothesis_failure << '\n';
  }
  else if (status == kExitHypothesis)
  {
    err << "backward error too large for the bounds to apply\n";
  }
  else if (status == kExitBoundViolation)
  {
    err << "bound violation\n";
  }
  return status;
}

struct SweepArgs
{
  SweepConfig config;
  std::string report;
  std::string csv;
};

int do_sweep(SweepArgs a, std::ostream &out)
{
  validate(a.config);
  const std::vector<CellResult> cells = sweep(a.config);
  emit(sweep_report(a.config, cells).dump(2) + "\n", a.report, out);
  if (!a.csv.empty())
  {
    emit(sweep_csv(cells), a.csv, out);
  }
  return kExitOk;
}

struct GenerateArgs
{
  long long n = 0;
  double norm_a = 1.0;
  double norm_b = 1.0;
  std::uint64_t seed = 0;
  std::string out_a;
  std::string out_b;
  std::string out_start;
};

int do_generate(const GenerateArgs &g)
{
  const ProblemPair pair = random_pair(g.n, g.norm_a, g.norm_b, g.seed);
  mm::write_file(g.out_a, pair.a());
  mm::write_file(g.out_b, pair.b());
  if (!g.out_start.empty())
  {
    mm::write_start_file(g.out_start, random_start(g.n, g.seed));
  }
  return kExitOk;
}

}  // namespace

int main(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
  CLI::App app{"Second-order Krylov bases by two-level orthogonal Arnoldi, with a "
               "backward stability audit",
               kToolName};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  RunArgs run;
  CLI::App *run_cmd = app.add_subcommand("run", "Run the iteration on one problem");
  run_cmd->add_option("--matrix-a", run.matrix_a, "Matrix Market file for A")->required();
  run_cmd->add_option("--matrix-b", run.matrix_b, "Matrix Market file for B")->required();
  run_cmd->add_option("--start", run.start, "n x 2 Matrix Market file: columns r_{-1}, r_0");
  run_cmd->add_flag("--random-start", run.random_start, "Draw starts from --seed");
  run_cmd->add_option("--steps", run.steps, "Number of Arnoldi steps k")
      ->required()
      ->check(CLI::Range(1LL, std::numeric_limits<long long>::max()));
  run_cmd->add_option("--scale", run.scale, "auto, none or a fixed alpha")
      ->capture_default_str();
  run_cmd->add_option("--regime-band", run.band, "Factor around sqrt(||B||) counted as balanced")
      ->check(CLI::Range(1.0, 1e300))
      ->capture_default_str();
  run_cmd->add_flag("--audit", run.audit, "Run the backward stability audit");
  run_cmd->add_flag("--oracle-check", run.oracle, "Compare against reference bases (n <= 64)");
  run_cmd->add_option("--report", run.report, "JSON report path (default: stdout)");
  run_cmd->add_option("--seed", run.seed, "Random seed")->capture_default_str();

  SweepArgs sw;
  CLI::App *sweep_cmd = app.add_subcommand("sweep", "Audit random problems over a norm grid");
  sweep_cmd->add_option("--norms-a", sw.config.norms_a, "Target ||A||_2 values")
      ->required()
      ->delimiter(',');
  sweep_cmd->add_option("--norms-b", sw.config.norms_b, "Target ||B||_2 values")
      ->required()
      ->delimiter(',');
  sweep_cmd->add_option("--size", sw.config.n, "Problem size n")->capture_default_str();
  sweep_cmd->add_option("--steps", sw.config.steps, "Steps k")->capture_default_str();
  sweep_cmd->add_option("--trials", sw.config.trials, "Trials per cell")->capture_default_str();
  sweep_cmd->add_option("--seed", sw.config.seed, "Base seed")->capture_default_str();
  sweep_cmd->add_option("--regime-band", sw.config.band, "Balanced band factor")
      ->check(CLI::Range(1.0, 1e300))
      ->capture_default_str();
  sweep_cmd->add_flag("--with-and-without-scaling", sw.config.with_and_without_scaling,
                      "Also run every trial unscaled");
  sweep_cmd->add_flag("--paired", sw.config.paired, "Zip the two grids instead of crossing them");
  sweep_cmd->add_option("--report", sw.report, "JSON report path (default: stdout)");
  sweep_cmd->add_option("--csv", sw.csv, "Optional CSV summary path");

  GenerateArgs gen;
  CLI::App *gen_cmd =
      app.add_subcommand("generate", "Write a random problem as Matrix Market files");
  gen_cmd->add_option("--size", gen.n, "Problem size n")
      ->required()
      ->check(CLI::Range(1LL, 1LL << 13));
  gen_cmd->add_option("--norm-a", gen.norm_a, "Target ||A||_2")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  gen_cmd->add_option("--norm-b", gen.norm_b, "Target ||B||_2")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  gen_cmd->add_option("--out-a", gen.out_a, "Output file for A")->required();
  gen_cmd->add_option("--out-b", gen.out_b, "Output file for B")->required();
  gen_cmd->add_option("--out-start", gen.out_start, "Output file for the starts");

  std::vector<std::string> argv_storage{kToolName};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char *> argv;
  for (std::string &s : argv_storage)
  {
    argv.push_back(s.data());
  }

  try
  {
    app.parse(static_cast<int>(argv.size()), argv.data());
  }
  catch (const CLI::ParseError &e)
  {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try
  {
    if (*run_cmd)
    {
      return do_run(run, out, err);
    }
    if (*sweep_cmd)
    {
      return do_sweep(sw, out);
    }
    return do_generate(gen);
  }
  catch (const UsageError &e)
  {
    err << "usage error: " << e.what() << '\n';
  }
  catch (const mm::ParseError &e)
  {
    err << "input error: " << e.what() << '\n';
  }
  catch (const std::invalid_argument &e)
  {
    err << "invalid input: " << e.what() << '\n';
  }
  return kExitUsage;
}

}  // namespace toar::cli
