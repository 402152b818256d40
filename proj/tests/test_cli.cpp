// Copyright The toar-audit Authors.
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"
#include "json.hpp"
#include "oracles.hpp"
#include "toar/cli/cli.hpp"
#include "toar/cli/matrix_market.hpp"
#include "toar/cli/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace toar;
using nlohmann::json;

namespace
{

namespace fs = std::filesystem;

struct TempDir
{
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("toar_cli_" + std::to_string(std::random_device{}())))
  {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string &name) const { return (path / name).string(); }
};

struct Outcome
{
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(const std::vector<std::string> &args)
{
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::main(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string &path)
{
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Every number finite; null only where a value is legitimately absent.
void check_values(const json &j, const std::string &key, std::vector<std::string> &bad)
{
  static const std::set<std::string> nullable = {"breakdown_step", "hypothesis_failure",
                                                 "improvement"};
  if (j.is_null() && !nullable.contains(key))
  {
    bad.push_back(key);
  }
  else if (j.is_number_float() && !std::isfinite(j.get<double>()))
  {
    bad.push_back(key);
  }
  else if (j.is_object())
  {
    for (const auto &[k, v] : j.items())
    {
      check_values(v, k, bad);
    }
  }
  else if (j.is_array())
  {
    for (const auto &v : j)
    {
      check_values(v, key, bad);
    }
  }
}

void generate(const TempDir &dir, int n, double na, double nb, int seed)
{
  const Outcome g = invoke({"generate", "--size", std::to_string(n), "--norm-a", std::to_string(na),
                            "--norm-b", std::to_string(nb), "--seed", std::to_string(seed),
                            "--out-a", dir / "a.mtx", "--out-b", dir / "b.mtx", "--out-start",
                            dir / "s.mtx"});
  REQUIRE(g.code == 0);
}

}  // namespace

TEST_CASE("audited run on a balanced problem")
{
  TempDir dir;
  generate(dir, 20, 1.0, 1.0, 5);
  const Outcome r = invoke({"run", "--matrix-a", dir / "a.mtx", "--matrix-b", dir / "b.mtx",
                            "--start", dir / "s.mtx", "--steps", "10", "--audit", "--oracle-check",
                            "--report", dir / "r.json"});
  CHECK(r.code == cli::kExitOk);
  const json report = json::parse(slurp(dir / "r.json"));
  CHECK(report["schema_version"] == 1);
  CHECK(report["command"] == "run");
  CHECK(report["audit"]["all_satisfied"] == true);
  CHECK(report["audit"]["bounds"]["distance"]["satisfied"] == true);
  CHECK(report["audit"]["bounds"]["delta_a"]["satisfied"] == true);
  CHECK(report["audit"]["bounds"]["delta_b"]["satisfied"] == true);
  CHECK(report["decomposition"]["steps"] == 10);
  CHECK(report["oracle"]["brute_force_distance"].get<double>() <= 1e-10);
  CHECK(report["status"]["exit_code"] == 0);
  std::vector<std::string> bad;
  check_values(report, "", bad);
  CHECK_MESSAGE(bad.empty(), (bad.empty() ? "" : bad.front()));
  for (const char *b : {"distance", "delta_a", "delta_b"})
  {
    CHECK(report["audit"]["bounds"][b].contains("measured"));
    CHECK(report["audit"]["bounds"][b].contains("bound"));
  }
}

TEST_CASE("scale none and auto agree on the Krylov subspace")
{
  const Index n = 20;
  const ProblemPair pair = cli::random_pair(n, 1.0, 1.0, 9);
  const StartPair start = cli::random_start(n, 9);
  cli::PipelineOptions none;
  none.mode = ScalingMode::none();
  cli::PipelineOptions automatic;
  const cli::PipelineResult a = cli::run_pipeline(pair, start, 10, none);
  const cli::PipelineResult b = cli::run_pipeline(pair, start, 10, automatic);
  CHECK(a.plan.alpha == 1.0);
  CHECK(a.decomposition.dim_k() == b.decomposition.dim_k());
  CHECK(oracle::projector_distance(a.decomposition.Qk(), b.decomposition.Qk()) <= 1e-8);
  REQUIRE(a.audit.has_value());
  REQUIRE(b.audit.has_value());
  CHECK(a.audit->all_satisfied());
  CHECK(b.audit->all_satisfied());
}

TEST_CASE("usage errors exit with 2")
{
  TempDir dir;
  generate(dir, 4, 1.0, 1.0, 1);
  const std::vector<std::string> base = {"run", "--matrix-a", dir / "a.mtx", "--matrix-b",
                                         dir / "b.mtx", "--random-start"};
  auto with = [&](std::vector<std::string> extra) {
    std::vector<std::string> args = base;
    args.insert(args.end(), extra.begin(), extra.end());
    return invoke(args).code;
  };
  CHECK(with({"--steps", "0"}) == cli::kExitUsage);
  CHECK(with({"--steps", "8"}) == cli::kExitUsage);  // needs k < 2n
  CHECK(with({"--steps", "2", "--scale", "-1"}) == cli::kExitUsage);
  CHECK(with({"--steps", "2", "--scale", "sometimes"}) == cli::kExitUsage);
  CHECK(with({"--steps", "2", "--start", dir / "s.mtx"}) == cli::kExitUsage);
  CHECK(with({"--steps", "2"}) == cli::kExitOk);
  CHECK(invoke({"run", "--matrix-a", dir / "missing.mtx", "--matrix-b", dir / "b.mtx",
                "--random-start", "--steps", "2"})
            .code == cli::kExitUsage);
  CHECK(invoke({"run", "--matrix-a", dir / "a.mtx", "--steps", "2"}).code == cli::kExitUsage);
  CHECK(invoke({"bogus"}).code == cli::kExitUsage);
  CHECK(invoke({"--help"}).code == cli::kExitOk);

  CHECK(invoke({"sweep", "--norms-a", "", "--norms-b", "1"}).code == cli::kExitUsage);
  CHECK(invoke({"sweep", "--norms-a", "1", "--norms-b", "-1"}).code == cli::kExitUsage);
  CHECK(invoke({"sweep", "--norms-a", "1,2", "--norms-b", "1", "--paired"}).code ==
        cli::kExitUsage);
}

TEST_CASE("sweep configuration validation")
{
  cli::SweepConfig c;
  CHECK_THROWS_AS(cli::validate(c), std::invalid_argument);
  c.norms_a = {1.0};
  c.norms_b = {1.0};
  CHECK_NOTHROW(cli::validate(c));
  c.norms_b = {0.0};
  CHECK_THROWS_AS(cli::validate(c), std::invalid_argument);
  c.norms_b = {1.0};
  c.trials = 0;
  CHECK_THROWS_AS(cli::validate(c), std::invalid_argument);
}

TEST_CASE("single balanced cell")
{
  cli::SweepConfig c;
  c.norms_a = {1.0};
  c.norms_b = {1.0};
  c.trials = 3;
  c.seed = 17;
  c.with_and_without_scaling = true;
  const std::vector<cli::CellResult> cells = cli::sweep(c);
  REQUIRE(cells.size() == 1);
  CHECK(cells[0].failures.empty());
  REQUIRE(cells[0].scaled.has_value());
  REQUIRE(cells[0].unscaled.has_value());
  for (const cli::Aggregate &agg : {*cells[0].scaled, *cells[0].unscaled})
  {
    CHECK(agg.trials == 3);
    CHECK(agg.max_relative_delta_a <= 1e-12);
    CHECK(agg.max_relative_delta_b <= 1e-12);
    CHECK(agg.bound_violations == 0);
  }
}

TEST_CASE("aggregate statistics")
{
  std::vector<cli::TrialMetrics> t(3);
  t[0].relative_delta_b = 3.0;
  t[1].relative_delta_b = 1.0;
  t[2].relative_delta_b = 2.0;
  t[1].bounds_satisfied = t[2].bounds_satisfied = true;
  const cli::Aggregate a = cli::aggregate(t);
  CHECK(a.trials == 3);
  CHECK(a.median_relative_delta_b == 2.0);
  CHECK(a.max_relative_delta_b == 3.0);
  CHECK(a.bound_violations == 1);
}

TEST_CASE("cell seeds are distinct and stable")
{
  std::set<std::uint64_t> seen;
  for (std::size_t cell = 0; cell < 10; cell++)
  {
    for (Index trial = 0; trial < 10; trial++)
    {
      seen.insert(cli::cell_seed(42, cell, trial));
    }
  }
  CHECK(seen.size() == 100);
  CHECK(cli::cell_seed(42, 3, 4) == cli::cell_seed(42, 3, 4));
  CHECK(cli::cell_seed(42, 3, 4) != cli::cell_seed(43, 3, 4));
}

TEST_CASE("random problems hit their target norms")
{
  const ProblemPair p = cli::random_pair(7, 1e-3, 1e5, 2);
  CHECK(p.norm_a() == doctest::Approx(1e-3).epsilon(1e-12));
  CHECK(p.norm_b() == doctest::Approx(1e5).epsilon(1e-12));
  CHECK(cli::random_pair(7, 1e-3, 1e5, 2).fingerprint() == p.fingerprint());
  CHECK(cli::random_pair(7, 1e-3, 1e5, 3).fingerprint() != p.fingerprint());
}

TEST_CASE("reports are byte identical across runs")
{
  TempDir dir;
  generate(dir, 10, 2.0, 50.0, 8);
  for (const char *name : {"r1.json", "r2.json"})
  {
    CHECK(invoke({"run", "--matrix-a", dir / "a.mtx", "--matrix-b", dir / "b.mtx",
                  "--random-start", "--seed", "99", "--steps", "6", "--audit", "--report",
                  dir / name})
              .code == cli::kExitOk);
  }
  CHECK(slurp(dir / "r1.json") == slurp(dir / "r2.json"));

  for (const char *name : {"s1.json", "s2.json"})
  {
    CHECK(invoke({"sweep", "--norms-a", "1,100", "--norms-b", "1e-2,1e4", "--size", "6",
                  "--steps", "4", "--trials", "2", "--seed", "5", "--with-and-without-scaling",
                  "--report", dir / name, "--csv", dir / (std::string(name) + ".csv")})
              .code == cli::kExitOk);
  }
  CHECK(slurp(dir / "s1.json") == slurp(dir / "s2.json"));
  CHECK(slurp(dir / "s1.json.csv") == slurp(dir / "s2.json.csv"));
  const json sweep = json::parse(slurp(dir / "s1.json"));
  CHECK(sweep["cells"].size() == 4);
  std::vector<std::string> bad;
  check_values(sweep, "", bad);
  CHECK_MESSAGE(bad.empty(), (bad.empty() ? "" : bad.front()));
}

TEST_CASE("run reports the starts written by generate")
{
  TempDir dir;
  generate(dir, 5, 1.0, 1.0, 4);
  const StartPair s = mm::read_start_file(dir / "s.mtx");
  const StartPair ref = cli::random_start(5, 4);
  CHECK(s.r_minus1() == ref.r_minus1());
  CHECK(s.r_zero() == ref.r_zero());
}
