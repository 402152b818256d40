// Copyright The toar-audit Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TOAR_SCALING_HPP
#define TOAR_SCALING_HPP

#include <cstdint>
#include <optional>
#include <string_view>
#include "toar/audit.hpp"

namespace toar
{

enum class Regime
{
  balanced_i,         // ||A|| <= sqrt(||B||), below the band
  balanced_ii,        // ||A|| within a factor rho of sqrt(||B||)
  heavy_damping_iii,  // ||A|| > rho sqrt(||B||)
  unscaled            // B = 0
};

std::string_view to_string(Regime r);

// Half-width (as a factor) of the band around sqrt(||B||) counted as balanced_ii.
inline constexpr double kDefaultRegimeBand = 1.5;

// Error orders predicted for a given alpha:
//   distance ~ eps m,  ||dA|| ~ eps m / alpha,  ||dB|| ~ eps m^2 / alpha^2,
// with m = max{1, alpha ||A||, alpha^2 ||B||}.
struct PredictedOrders
{
  double distance = 0.0;
  double delta_a = 0.0;
  double delta_b = 0.0;
};

PredictedOrders predicted_orders(const ProblemPair &pair, double alpha);

// (1 + ||A|| alpha + ||B|| alpha^2) / alpha
double f_alpha(const ProblemPair &pair, double alpha);

// ||B||^{-1/2}. Throws std::domain_error when B = 0.
double alpha_opt(const ProblemPair &pair);

// Used when B = 0: 1 / max{1, ||A||}.
double fallback_alpha(const ProblemPair &pair);

Regime classify_regime(const ProblemPair &pair, double band = kDefaultRegimeBand);

class ScalingMode
{
public:
  enum class Kind
  {
    automatic,
    fixed,
    none
  };

  static ScalingMode automatic() { return ScalingMode(Kind::automatic, 1.0); }
  static ScalingMode none() { return ScalingMode(Kind::none, 1.0); }
  // Throws std::invalid_argument unless alpha is positive and finite.
  static ScalingMode fixed(double alpha);

  Kind kind() const { return kind_; }
  double alpha() const { return alpha_; }

private:
  ScalingMode(Kind kind, double alpha) : kind_(kind), alpha_(alpha) {}

  Kind kind_;
  double alpha_;
};

struct ScalingPlan
{
  double alpha = 1.0;
  ProblemPair scaled;
  Regime regime = Regime::unscaled;
  PredictedOrders predicted;
  double start_adjustment = 1.0;  // applied to r_{-1}
  ScalingMode::Kind mode = ScalingMode::Kind::none;

  double original_norm_a = 0.0;
  double original_norm_b = 0.0;
  std::uint64_t original_fingerprint = 0;

  // Heavily damped problem: ||dB|| stays of order eps ||A||^2 under any alpha
  // offered here.
  bool damping_unresolved = false;
  // B = 0 forced the fallback alpha in automatic mode.
  bool used_fallback = false;
};

ScalingPlan make_plan(const ProblemPair &pair, const ScalingMode &mode,
                      double band = kDefaultRegimeBand);

// (alpha^{-1} r_{-1}, r_0), matching the companion of (alpha A, alpha^2 B).
StartPair scale_start(const ScalingPlan &plan, const StartPair &start);

// Maps an audit of plan.scaled back to the original pair: dA = dA_a / alpha,
// dB = dB_a / alpha^2, with bounds divided by the same powers. The distance is
// unaffected. Throws std::invalid_argument if the audit was not run on plan.scaled.
StabilityAudit unscale_report(const ScalingPlan &plan, const StabilityAudit &scaled);

}  // namespace toar

#endif  // TOAR_SCALING_HPP
