// Copyright The toar-audit Authors.
// SPDX-License-Identifier: Apache-2.0

#include "toar/cli/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace toar::cli
{

Json number(double x)
{
  return std::isfinite(x) ? Json(x) : Json(nullptr);
}

std::string hex(std::uint64_t h)
{
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace
{

template <typename T>
Json optional_number(const std::optional<T> &v)
{
  return v ? number(*v) : Json(nullptr);
}

Json bound_json(const std::optional<BoundCheck> &b)
{
  if (!b)
  {
    return nullptr;
  }
  return Json{{"measured", number(b->measured)},
              {"bound", number(b->bound)},
              {"satisfied", b->satisfied}};
}

Json relative_or_null(double value, double reference)
{
  return reference > 0.0 ? number(value / reference) : Json(nullptr);
}

std::string mode_name(ScalingMode::Kind k)
{
  switch (k)
  {
    case ScalingMode::Kind::automatic:
      return "auto";
    case ScalingMode::Kind::fixed:
      return "fixed";
    case ScalingMode::Kind::none:
      return "none";
  }
  return "unknown";
}

// Largest entry below the first subdiagonal; exactly zero for a valid run.
double below_subdiagonal(const Matrix &h)
{
  double worst = 0.0;
  for (Index j = 0; j < h.cols(); j++)
  {
    for (Index i = j + 2; i < h.rows(); i++)
    {
      worst = std::max(worst, std::abs(h(i, j)));
    }
  }
  return worst;
}

Json aggregate_json(const std::optional<Aggregate> &g)
{
  if (!g)
  {
    return nullptr;
  }
  return Json{{"trials", g->trials},
              {"median_delta_a", number(g->median_delta_a)},
              {"median_delta_b", number(g->median_delta_b)},
              {"median_relative_delta_a", number(g->median_relative_delta_a)},
              {"median_relative_delta_b", number(g->median_relative_delta_b)},
              {"max_relative_delta_a", number(g->max_relative_delta_a)},
              {"max_relative_delta_b", number(g->max_relative_delta_b)},
              {"median_distance", number(g->median_distance)},
              {"max_distance", number(g->max_distance)},
              {"bound_violations", g->bound_violations}};
}

Json tool_json()
{
  return Json{{"name", kToolName}, {"version", kToolVersion}};
}

}  // namespace

Json plan_json(const ScalingPlan &plan, double band)
{
  return Json{{"mode", mode_name(plan.mode)},
              {"alpha", number(plan.alpha)},
              {"regime", std::string(to_string(plan.regime))},
              {"regime_band", number(band)},
              {"start_adjustment", number(plan.start_adjustment)},
              {"scaled_norm_a", number(plan.scaled.norm_a())},
              {"scaled_norm_b", number(plan.scaled.norm_b())},
              {"predicted",
               {{"distance", number(plan.predicted.distance)},
                {"delta_a", number(plan.predicted.delta_a)},
                {"delta_b", number(plan.predicted.delta_b)}}},
              {"damping_unresolved", plan.damping_unresolved},
              {"fallback_alpha", plan.used_fallback}};
}

Json decomposition_json(const ToarDecomposition &dec, Index requested_steps)
{
  Json deflations = Json::array();
  for (const DeflationEvent &e : dec.deflation_log())
  {
    deflations.push_back({{"step", e.step}, {"beta", number(e.beta)}});
  }
  const Matrix q = dec.Q();
  const Matrix u = dec.U();
  return Json{
      {"requested_steps", requested_steps},
      {"steps", dec.steps()},
      {"d_k", dec.dim_k()},
      {"d_k_plus_1", dec.dim()},
      {"columns", dec.columns()},
      {"invariant_subspace", dec.invariant_subspace()},
      {"breakdown_step", dec.invariant_subspace() ? Json(dec.steps()) : Json(nullptr)},
      {"deflations", deflations},
      {"companion_norm", number(dec.companion_norm())},
      {"structure",
       {{"q_orthonormality_defect", number(orthonormality_defect(q))},
        {"q_tolerance", number(orthotol(q.rows(), q.cols()))},
        {"u_orthonormality_defect", number(orthonormality_defect(u))},
        {"u_tolerance", number(orthotol(u.rows(), u.cols()))},
        {"h_below_subdiagonal", number(below_subdiagonal(dec.H()))}}}};
}

Json audit_json(const StabilityAudit &a, const std::optional<StabilityAudit> &scaled)
{
  const BackwardError &be = a.backward;
  Json out{
      {"residual_norm", number(a.residual_norm)},
      {"residual_relative", relative_or_null(a.residual_norm, a.norm_c)},
      {"norm_E", number(be.norm_E)},
      {"norm_E21", number(be.norm_E21)},
      {"block_norm_max", number(be.block_norm_max)},
      {"frobenius_E", number(be.frobenius_E)},
      {"verification_residual", number(be.verification_residual)},
      {"verified", be.verified},
      {"cond_Uk", number(be.cond_Uk)},
      {"cond_Qk", number(be.cond_Qk)},
      {"recoverable", a.recoverable},
      {"bounds_applicable", a.bounds_applicable},
      {"alpha", number(a.alpha)},
      {"norm_delta_a", a.recoverable ? number(a.norm_delta_a) : Json(nullptr)},
      {"norm_delta_b", a.recoverable ? number(a.norm_delta_b) : Json(nullptr)},
      {"relative_delta_a",
       a.recoverable ? relative_or_null(a.norm_delta_a, a.norm_a) : Json(nullptr)},
      {"relative_delta_b",
       a.recoverable ? relative_or_null(a.norm_delta_b, a.norm_b) : Json(nullptr)},
      {"measured_distance", a.recoverable ? number(a.measured_distance) : Json(nullptr)},
      {"measured_distance_direct",
       a.recoverable ? number(a.measured_distance_direct) : Json(nullptr)},
      {"nearby_solve_residual", a.recoverable ? number(a.solve_residual) : Json(nullptr)},
      {"identity_residual",
       a.recovered ? optional_number(a.recovered->identity_residual) : Json(nullptr)},
      {"transformed_relation_residual",
       a.recoverable ? number(a.w_check_residual) : Json(nullptr)},
      {"bounds",
       {{"slack", number(a.slack)},
        {"distance", bound_json(a.distance)},
        {"delta_a", bound_json(a.delta_a)},
        {"delta_b", bound_json(a.delta_b)}}},
      {"all_satisfied", a.all_satisfied()},
      {"diagnostics", a.diagnostics}};
  if (scaled && a.alpha != 1.0)
  {
    out["scaled_problem"] = {{"norm_delta_a", number(scaled->norm_delta_a)},
                             {"norm_delta_b", number(scaled->norm_delta_b)},
                             {"delta_a", bound_json(scaled->delta_a)},
                             {"delta_b", bound_json(scaled->delta_b)}};
  }
  return out;
}

Json oracle_json(const OracleDistances &o)
{
  return Json{{"arnoldi_distance", optional_number(o.arnoldi)},
              {"brute_force_distance", optional_number(o.brute_force)},
              {"regenerated_distance", optional_number(o.regenerated)},
              {"notes", o.notes}};
}

int run_status(const PipelineResult &result, bool audit_enabled)
{
  if (!audit_enabled)
  {
    return 0;
  }
  if (result.hypothesis_failure || !result.audit || !result.audit->bounds_applicable)
  {
    return 3;
  }
  return result.audit->all_satisfied() ? 0 : 4;
}

Json run_report(const ProblemPair &pair, const StartPair &start, const PipelineResult &result,
                const RunInfo &info)
{
  Json report{{"schema_version", kSchemaVersion},
              {"tool", tool_json()},
              {"command", "run"},
              {"seed", info.seed},
              {"problem",
               {{"n", pair.size()},
                {"norm_a", number(pair.norm_a())},
                {"norm_b", number(pair.norm_b())},
                {"fingerprint", hex(pair.fingerprint())},
                {"start",
                 {{"mode", info.start_mode},
                  {"norm_r_minus1", number(start.r_minus1().norm())},
                  {"norm_r_zero", number(start.r_zero().norm())}}}}},
              {"plan", plan_json(result.plan, info.band)},
              {"decomposition", decomposition_json(result.decomposition, result.requested_steps)}};
  if (info.audit_enabled)
  {
    report["audit"] = result.audit ? audit_json(*result.audit, result.scaled_audit)
                                   : Json(nullptr);
  }
  if (result.oracle)
  {
    report["oracle"] = oracle_json(*result.oracle);
  }
  const int status = run_status(result, info.audit_enabled);
  report["status"] = {{"exit_code", status},
                      {"hypothesis_failure", result.hypothesis_failure
                                                 ? Json(*result.hypothesis_failure)
                                                 : Json(nullptr)}};
  return report;
}

Json sweep_report(const SweepConfig &config, const std::vector<CellResult> &cells)
{
  Json out_cells = Json::array();
  for (const CellResult &c : cells)
  {
    Json failures = Json::array();
    for (const CellFailure &f : c.failures)
    {
      failures.push_back({{"trial", f.trial}, {"variant", f.variant}, {"message", f.message}});
    }
    out_cells.push_back({{"norm_a", number(c.norm_a)},
                         {"norm_b", number(c.norm_b)},
                         {"regime", std::string(to_string(c.regime))},
                         {"alpha", number(c.alpha)},
                         {"seed", c.seed},
                         {"scaled", aggregate_json(c.scaled)},
                         {"unscaled", aggregate_json(c.unscaled)},
                         {"improvement", optional_number(c.improvement)},
                         {"failures", failures}});
  }
  return Json{{"schema_version", kSchemaVersion},
              {"tool", tool_json()},
              {"command", "sweep"},
              {"seed", config.seed},
              {"config",
               {{"norms_a", config.norms_a},
                {"norms_b", config.norms_b},
                {"paired", config.paired},
                {"n", config.n},
                {"steps", config.steps},
                {"trials", config.trials},
                {"with_and_without_scaling", config.with_and_without_scaling},
                {"regime_band", number(config.band)}}},
              {"cells", out_cells}};
}

std::string sweep_csv(const std::vector<CellResult> &cells)
{
  std::ostringstream os;
  os.precision(6);
  os << std::scientific;
  os << "norm_a,norm_b,regime,alpha,scaled_median_rel_delta_a,scaled_median_rel_delta_b,"
        "scaled_median_distance,unscaled_median_rel_delta_a,unscaled_median_rel_delta_b,"
        "unscaled_median_distance,improvement,failures\n";
  const auto field = [&os](bool present, double v)
  {
    if (present)
    {
      os << v;
    }
  };
  for (const CellResult &c : cells)
  {
    const bool s = c.scaled && c.scaled->trials > 0;
    const bool u = c.unscaled && c.unscaled->trials > 0;
    os << c.norm_a << ',' << c.norm_b << ',' << to_string(c.regime) << ',' << c.alpha << ',';
    field(s, s ? c.scaled->median_relative_delta_a : 0.0);
    os << ',';
    field(s, s ? c.scaled->median_relative_delta_b : 0.0);
    os << ',';
    field(s, s ? c.scaled->median_distance : 0.0);
    os << ',';
    field(u, u ? c.unscaled->median_relative_delta_a : 0.0);
    os << ',';
    field(u, u ? c.unscaled->median_relative_delta_b : 0.0);
    os << ',';
    field(u, u ? c.unscaled->median_distance : 0.0);
    os << ',';
    field(c.improvement.has_value(), c.improvement.value_or(0.0));
    os << ',' << c.failures.size() << '\n';
  }
  return os.str();
}

}  // namespace toar::cli
