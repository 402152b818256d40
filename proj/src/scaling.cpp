// Copyright The toar-audit Authors.
// SPDX-License-Identifier: Apache-2.0

#include "toar/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace toar
{

std::string_view to_string(Regime r)
{
  switch (r)
  {
    case Regime::balanced_i:
      return "balanced_i";
    case Regime::balanced_ii:
      return "balanced_ii";
    case Regime::heavy_damping_iii:
      return "heavy_damping_iii";
    case Regime::unscaled:
      return "unscaled";
  }
  return "unknown";
}

PredictedOrders predicted_orders(const ProblemPair &pair, double alpha)
{
  const double m = std::max({1.0, alpha * pair.norm_a(), alpha * alpha * pair.norm_b()});
  return {unit_roundoff * m, unit_roundoff * m / alpha,
          unit_roundoff * m * m / (alpha * alpha)};
}

double f_alpha(const ProblemPair &pair, double alpha)
{
  if (!(alpha > 0.0) || !std::isfinite(alpha))
  {
    throw std::invalid_argument("f_alpha: alpha must be positive and finite");
  }
  return (1.0 + pair.norm_a() * alpha + pair.norm_b() * alpha * alpha) / alpha;
}

double alpha_opt(const ProblemPair &pair)
{
  if (pair.norm_b() == 0.0)
  {
    throw std::domain_error("alpha_opt: B = 0, scaling parameter undefined");
  }
  return 1.0 / std::sqrt(pair.norm_b());
}

double fallback_alpha(const ProblemPair &pair)
{
  return 1.0 / std::max(1.0, pair.norm_a());
}

Regime classify_regime(const ProblemPair &pair, double band)
{
  if (!(band >= 1.0))
  {
    throw std::invalid_argument("classify_regime: band factor must be >= 1");
  }
  if (pair.norm_b() == 0.0)
  {
    return Regime::unscaled;
  }
  const double root = std::sqrt(pair.norm_b());
  const double a = pair.norm_a();
  if (a > band * root)
  {
    return Regime::heavy_damping_iii;
  }
  if (a >= root / band)
  {
    return Regime::balanced_ii;
  }
  return Regime::balanced_i;
}

ScalingMode ScalingMode::fixed(double alpha)
{
  if (!(alpha > 0.0) || !std::isfinite(alpha))
  {
    throw std::invalid_argument("fixed scaling needs a positive finite alpha");
  }
  return ScalingMode(Kind::fixed, alpha);
}

ScalingPlan make_plan(const ProblemPair &pair, const ScalingMode &mode, double band)
{
  const Regime regime = classify_regime(pair, band);
  double alpha = 1.0;
  bool fallback = false;
  switch (mode.kind())
  {
    case ScalingMode::Kind::none:
      break;
    case ScalingMode::Kind::fixed:
      alpha = mode.alpha();
      break;
    case ScalingMode::Kind::automatic:
      if (regime == Regime::unscaled)
      {
        alpha = fallback_alpha(pair);
        fallback = true;
      }
      else if (regime == Regime::heavy_damping_iii)
      {
        alpha = 1.0 / pair.norm_a();
      }
      else
      {
        alpha = alpha_opt(pair);
      }
      break;
  }

  ScalingPlan plan{
      alpha,
      alpha == 1.0 ? pair : ProblemPair(alpha * pair.a(), (alpha * alpha) * pair.b()),
      regime,
      predicted_orders(pair, alpha),
      1.0 / alpha,
      mode.kind(),
      pair.norm_a(),
      pair.norm_b(),
      pair.fingerprint(),
      regime == Regime::heavy_damping_iii,
      fallback};
  return plan;
}

StartPair scale_start(const ScalingPlan &plan, const StartPair &start)
{
  if (plan.alpha == 1.0)
  {
    return start;
  }
  return StartPair(plan.start_adjustment * start.r_minus1(), start.r_zero());
}

StabilityAudit unscale_report(const ScalingPlan &plan, const StabilityAudit &scaled)
{
  if (scaled.pair_fingerprint != plan.scaled.fingerprint())
  {
    throw std::invalid_argument("unscale_report: audit was not run on the scaled pair");
  }
  StabilityAudit out = scaled;
  out.pair_fingerprint = plan.original_fingerprint;
  out.norm_a = plan.original_norm_a;
  out.norm_b = plan.original_norm_b;
  out.alpha = plan.alpha;
  if (plan.alpha == 1.0)
  {
    return out;
  }

  const double ia = 1.0 / plan.alpha;
  const double ia2 = ia * ia;
  out.norm_delta_a = ia * scaled.norm_delta_a;
  out.norm_delta_b = ia2 * scaled.norm_delta_b;
  out.frobenius_delta_a = ia * scaled.frobenius_delta_a;
  out.frobenius_delta_b = ia2 * scaled.frobenius_delta_b;
  if (out.recovered)
  {
    out.recovered->delta_a *= ia;
    out.recovered->delta_b *= ia2;
    out.recovered->norm_delta_a = out.norm_delta_a;
    out.recovered->norm_delta_b = out.norm_delta_b;
  }
  if (scaled.delta_a)
  {
    out.delta_a = BoundCheck::compare(out.norm_delta_a, ia * scaled.delta_a->bound);
  }
  if (scaled.delta_b)
  {
    out.delta_b = BoundCheck::compare(out.norm_delta_b, ia2 * scaled.delta_b->bound);
  }
  return out;
}

}  // namespace toar
