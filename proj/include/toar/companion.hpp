// Copyright The toar-audit Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TOAR_COMPANION_HPP
#define TOAR_COMPANION_HPP

#include <cstdint>
#include "toar/dense.hpp"

namespace toar
{

// Largest n for which the 2n x 2n companion matrix is ever assembled.
inline constexpr Index kAssemblyLimit = 64;

// The coefficient matrices A, B of the recurrence r_i = A r_{i-1} + B r_{i-2}.
// Spectral norms are computed once on construction.
class ProblemPair
{
public:
  ProblemPair(Matrix a, Matrix b);

  const Matrix &a() const { return a_; }
  const Matrix &b() const { return b_; }
  Index size() const { return a_.rows(); }

  double norm_a() const { return norm_a_; }
  double norm_b() const { return norm_b_; }
  // max{1, ||A||_2, ||B||_2}
  double norm_max() const;

  // FNV-1a over the dimensions and raw entries of A and B.
  std::uint64_t fingerprint() const;

private:
  Matrix a_;
  Matrix b_;
  double norm_a_;
  double norm_b_;
};

// Starting vectors r_{-1}, r_0; not both zero.
class StartPair
{
public:
  StartPair(Vector r_minus1, Vector r_zero);

  const Vector &r_minus1() const { return r_minus1_; }
  const Vector &r_zero() const { return r_zero_; }
  Index size() const { return r_zero_.size(); }

private:
  Vector r_minus1_;
  Vector r_zero_;
};

struct EmbeddedStart
{
  Vector v;              // [r_0; r_{-1}] / factor
  double factor = 1.0;   // || [r_0; r_{-1}] ||_2
};

EmbeddedStart embed_start(const StartPair &s);

enum class NormPath
{
  assembled_svd,
  power_iteration
};

struct CompanionNorm
{
  double value = 1.0;
  NormPath path = NormPath::assembled_svd;
};

// ||C||_2 for C = [A B; I 0]. For n <= 64 the companion is assembled and its
// largest singular value taken; above that a matrix-free power iteration is used.
// Either way the result is clamped into [m, sqrt(3) m], m = max{1, ||A||, ||B||}.
CompanionNorm companion_norm(const ProblemPair &pair);

// Explicit 2n x 2n companion matrix. Throws for n > kAssemblyLimit.
Matrix assemble_companion(const ProblemPair &pair);

// The action v -> [A v_top + B v_bot; v_top], never materialized.
class CompanionOperator
{
public:
  explicit CompanionOperator(ProblemPair pair);

  const ProblemPair &pair() const { return pair_; }
  Index size() const { return pair_.size(); }
  Index dimension() const { return 2 * pair_.size(); }
  double norm_estimate() const { return norm_.value; }
  NormPath norm_path() const { return norm_.path; }

  Vector apply(const Vector &v) const;
  Vector apply_adjoint(const Vector &v) const;
  Matrix apply(const Matrix &v) const;

private:
  ProblemPair pair_;
  CompanionNorm norm_;
};

}  // namespace toar

#endif  // TOAR_COMPANION_HPP
