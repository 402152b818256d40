// Copyright The toar-audit Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TOAR_DENSE_HPP
#define TOAR_DENSE_HPP

#include <complex>
#include <functional>
#include <limits>
#include <string_view>
#include <Eigen/Dense>

namespace toar
{

using Index = Eigen::Index;
using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using MatrixView = Eigen::Ref<const Matrix>;
using VectorView = Eigen::Ref<const Vector>;

// Unit roundoff of IEEE binary64, 2^-53.
inline constexpr double unit_roundoff = std::numeric_limits<double>::epsilon() / 2;

// Orthonormality tolerance for an n x d basis: 100 d eps sqrt(n).
double orthotol(Index n, Index d);

bool all_finite(MatrixView m);

// Throws std::invalid_argument naming `what` when m has a NaN or Inf entry.
void require_finite(MatrixView m, std::string_view what);

//
// Norms.
//

// Largest singular value. Dense SVD when min(rows, cols) <= 64, otherwise power
// iteration on M^H M (relative tolerance 1e-10, at most 500 iterations).
double spectral_norm(MatrixView m);

// Largest singular value from a dense SVD regardless of size.
double spectral_norm_svd(MatrixView m);

using LinearMap = std::function<Vector(const Vector &)>;

// Matrix-free power iteration on A^H A given the actions of A and A^H. The probe
// vector is deterministic so repeated calls agree bit for bit.
double spectral_norm_power(const LinearMap &apply, const LinearMap &apply_adjoint,
                           Index cols);

// || Q^H Q - I ||_F.
double orthonormality_defect(MatrixView q);

//
// Orthonormal bases and Gram-Schmidt.
//

// An n x d matrix whose columns are orthonormal to within orthotol(n, d).
class OrthonormalBasis
{
public:
  explicit OrthonormalBasis(Matrix q);

  const Matrix &matrix() const { return q_; }
  Index rows() const { return q_.rows(); }
  Index cols() const { return q_.cols(); }
  double defect() const { return defect_; }

private:
  Matrix q_;
  double defect_;
};

// v = Q coeffs + residual with residual orthogonal to span(Q).
struct Projection
{
  Vector coeffs;
  Vector residual;
  double beta = 0.0;  // ||residual||_2
  int passes = 0;
};

// Classical Gram-Schmidt with DGKS reorthogonalization: a second pass runs when
// the norm drops below 1/sqrt(2) of its previous value. Never more than two
// passes. The basis columns are assumed orthonormal and are not checked.
Projection orthogonalize_against(const Vector &v, MatrixView basis);
Projection orthogonalize_against(const Vector &v, const OrthonormalBasis &basis);

//
// Pseudoinverse and rank.
//

struct PseudoinverseProduct
{
  Matrix value;          // X M^+
  Index rank = 0;        // effective rank of M
  double cutoff = 0.0;   // max(rows, cols) eps sigma_max(M)
  double sigma_max = 0.0;
  double sigma_min = 0.0;  // smallest retained singular value
  bool rank_deficient = false;

  double condition() const { return sigma_min > 0.0 ? sigma_max / sigma_min : 0.0; }
  double pinv_norm() const { return sigma_min > 0.0 ? 1.0 / sigma_min : 0.0; }
};

// Returns X M^+ through a truncated SVD of M. Requires cols(X) == cols(M). Rank
// loss is flagged on the result, not thrown.
PseudoinverseProduct pinv_apply_right(MatrixView m, MatrixView x);

// Numerical rank from singular values with cutoff max(rows, cols) eps sigma_max.
Index numerical_rank(MatrixView m);

// Orthonormal basis of the column space from an SVD with the numerical_rank cutoff.
Matrix column_space_basis(MatrixView m);

// Orthonormal basis of the column space from a column-pivoted Householder QR,
// keeping the leading pivots with |R_ii| > tol.
Matrix rrqr_basis(MatrixView m, double tol);

//
// Subspace distance.
//

// || P_span(X) - P_span(Y) ||_2, the sine of the largest principal angle. The two
// column spaces must have the same numerical rank.
double subspace_distance(MatrixView x, MatrixView y);

}  // namespace toar

#endif  // TOAR_DENSE_HPP
