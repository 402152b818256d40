// Copyright The toar-audit Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TOAR_AUDIT_HPP
#define TOAR_AUDIT_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>
#include "toar/toar.hpp"

namespace toar
{

// A hypothesis of the backward-error construction does not hold (rank loss in Q_k
// or U_k). The audit cannot proceed.
class HypothesisError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// ||E_21||_2 >= 1, so I + E_21 may be singular and the companion structure cannot
// be recovered.
class InfeasibleError : public std::domain_error
{
public:
  using std::domain_error::domain_error;
};

// Relative slack applied when comparing a measured quantity with its bound.
inline constexpr double kBoundSlack = 1e-8;

struct Residual
{
  Matrix R;  // 2n x k
  double norm = 0.0;
};

// R = C (I_2 (x) Q_k) U_k - (I_2 (x) Q_{k+1}) U_{k+1} H, evaluated blockwise.
Residual compute_residual(const ProblemPair &pair, const ToarDecomposition &dec);

// E = -R U_k^+ (I_2 (x) Q_k^+), split conformally with the companion matrix.
struct BackwardError
{
  Matrix E11, E12, E21, E22;
  double norm_E = 0.0;
  double norm_E21 = 0.0;
  double block_norm_max = 0.0;  // max_ij ||E_ij||_2
  double frobenius_E = 0.0;

  // || E V_k + R ||_2; zero in exact arithmetic.
  double verification_residual = 0.0;
  bool verified = true;  // verification_residual <= 100 eps ||R||_2

  // Conditioning of the two bases entering the pseudoinverses.
  double cond_Uk = 1.0;
  double cond_Qk = 1.0;
  double pinv_norm_Uk = 1.0;
  double pinv_norm_Qk = 1.0;
  double cutoff_Uk = 0.0;
  double cutoff_Qk = 0.0;

  Index size() const { return E11.rows(); }
  Matrix assemble() const;

  // Splits a given 2n x 2n perturbation into blocks and fills the norms.
  static BackwardError from_matrix(const Matrix &e);
};

// Throws HypothesisError when U_k or Q_k is numerically rank deficient.
BackwardError project_backward_error(const Matrix &R, const ToarDecomposition &dec);

// Similarity that restores the companion pattern of C + E:
//   S (C + E) = [A + dA, B + dB; I, 0] S,   S = [I, T; 0, M^{-1}],
// with M = I + E_21 and T = M^{-1} E_22.
struct RecoveredPerturbation
{
  Matrix delta_a;
  Matrix delta_b;
  Matrix transform_topright;     // T
  Matrix transform_bottomright;  // M^{-1}
  double norm_delta_a = 0.0;
  double norm_delta_b = 0.0;
  // Relative residual of the similarity identity when n <= kAssemblyLimit.
  std::optional<double> identity_residual;
};

// Closed forms
//   dA = E11 + T M,
//   dB = B E21 + E12 M - (A + E11) T M.
// Throws InfeasibleError when ||E21||_2 >= 1.
RecoveredPerturbation recover_companion(const ProblemPair &pair, const BackwardError &be);

// || S (C+E) - C~ S ||_2 / (||S|| ||C+E|| + ||C~|| ||S||), both sides assembled.
double recovery_identity_residual(const ProblemPair &pair, const BackwardError &be,
                                  const RecoveredPerturbation &rp);

struct NearbyBasis
{
  Matrix basis;                 // (I + E21)^{-1} Q_k
  Index rank = 0;
  double solve_residual = 0.0;  // ||(I + E21) basis - Q_k||_2
};

NearbyBasis nearby_basis(const ToarDecomposition &dec, const BackwardError &be);

// dist(span Q_k, span (I + E21)^{-1} Q_k) evaluated through the multiplicative
// perturbation F = (I + E21)^{-1} E21, so small distances keep relative accuracy.
double nearby_distance(const ToarDecomposition &dec, const BackwardError &be);

// Compact blocks mapped through S:
//   W_i = [Q_i U1_i + T Q_i U2_i;  M^{-1} Q_i U2_i],   i = k, k+1.
struct TransformedEmbedding
{
  Matrix Wk;
  Matrix Wnext;
};

TransformedEmbedding transformed_embedding(const ToarDecomposition &dec,
                                           const RecoveredPerturbation &rp);

struct EmbeddingCheck
{
  double residual = 0.0;  // || C~ W_k - W_{k+1} H ||_2
  double scale = 1.0;     // ||C~|| ||W_k|| + ||W_{k+1}|| ||H||
  double relative() const { return scale > 0.0 ? residual / scale : residual; }
};

// Residual of the exact Arnoldi relation for the recovered companion
// C~ = [A + dA, B + dB; I, 0].
EmbeddingCheck transformed_embedding_check(const ProblemPair &pair,
                                           const ToarDecomposition &dec,
                                           const BackwardError &be,
                                           const RecoveredPerturbation &rp);

// Orthonormal basis of span{r_{-1}, r_0, ..., r_{k-1}} generated directly from the
// recurrence. Columns are normalized before a column-pivoted QR with rank tolerance
// n eps.
Matrix brute_force_second_order_basis(const ProblemPair &pair, const StartPair &s,
                                      Index k);

// Starting vectors of the recovered recurrence: first column of W_k is
// [r~_0; r~_{-1}].
StartPair recovered_start(const ToarDecomposition &dec, const RecoveredPerturbation &rp);

// Distance between span (I + E21)^{-1} Q_k and the second-order subspace regenerated
// from (A + dA, B + dB) and the recovered starts.
double regenerated_subspace_distance(const ProblemPair &pair,
                                     const ToarDecomposition &dec,
                                     const BackwardError &be,
                                     const RecoveredPerturbation &rp);

struct BoundCheck
{
  double measured = 0.0;
  double bound = 0.0;
  bool satisfied = false;

  static BoundCheck compare(double measured, double bound);
};

// ||E|| / (1 - ||E||)
double distance_bound(double norm_e);
// ||E|| + ||E|| (1 + ||E||) / (1 - ||E||)
double delta_a_bound(double norm_e);
// m (||E|| (2 + ||E||) + ||E|| (1 + ||E||)^2 / (1 - ||E||)),  m = max{1, ||A||, ||B||}
double delta_b_bound(double norm_e, double norm_max);

struct StabilityAudit
{
  std::uint64_t pair_fingerprint = 0;
  Index n = 0;
  Index k = 0;
  Index dim_k = 0;
  double norm_a = 0.0;
  double norm_b = 0.0;
  double norm_c = 0.0;

  double residual_norm = 0.0;
  double residual_frobenius = 0.0;
  BackwardError backward;

  // Structure recovery needs ||E21|| < 1; the bounds need ||E|| < 1.
  bool recoverable = false;
  bool bounds_applicable = false;
  std::vector<std::string> diagnostics;

  std::optional<RecoveredPerturbation> recovered;
  Matrix nearby_basis;
  double solve_residual = 0.0;
  double measured_distance = 0.0;         // perturbation route
  double measured_distance_direct = 0.0;  // generic subspace_distance
  double w_check_residual = 0.0;          // relative
  double w_check_scale = 0.0;

  double norm_delta_a = 0.0;
  double norm_delta_b = 0.0;
  double frobenius_delta_a = 0.0;
  double frobenius_delta_b = 0.0;

  std::optional<BoundCheck> distance;
  std::optional<BoundCheck> delta_a;
  std::optional<BoundCheck> delta_b;
  double slack = kBoundSlack;

  // Set when the perturbations were mapped back from a scaled problem.
  double alpha = 1.0;

  // True when every applicable bound holds; false when none apply.
  bool all_satisfied() const;
};

// Runs the full backward-error construction on a finished decomposition.
// Rank loss in Q_k or U_k throws HypothesisError; ||E|| >= 1 is reported through
// bounds_applicable and the diagnostics.
StabilityAudit run_audit(const ProblemPair &pair, const ToarDecomposition &dec);

}  // namespace toar

#endif  // TOAR_AUDIT_HPP
