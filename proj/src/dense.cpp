// Copyright The toar-audit Authors.
// SPDX-License-Identifier: Apache-2.0

#include "toar/dense.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace toar
{

namespace
{

constexpr Index kDenseSvdLimit = 64;
constexpr int kPowerMaxIterations = 500;
constexpr double kPowerTolerance = 1e-10;

Vector deterministic_probe(Index size)
{
  Vector x(size);
  for (Index i = 0; i < size; i++)
  {
    const double t = static_cast<double>(i);
    x(i) = Complex(std::cos(0.7 * t + 0.3) + 1.5, std::sin(1.3 * t + 0.1));
  }
  return x / x.norm();
}

}  // namespace

double orthotol(Index n, Index d)
{
  return 100.0 * static_cast<double>(d) * unit_roundoff *
         std::sqrt(static_cast<double>(n));
}

bool all_finite(MatrixView m)
{
  for (Index j = 0; j < m.cols(); j++)
  {
    for (Index i = 0; i < m.rows(); i++)
    {
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag()))
      {
        return false;
      }
    }
  }
  return true;
}

void require_finite(MatrixView m, std::string_view what)
{
  if (!all_finite(m))
  {
    throw std::invalid_argument(std::string(what) + " has non-finite entries");
  }
}

double spectral_norm_svd(MatrixView m)
{
  if (m.size() == 0)
  {
    return 0.0;
  }
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

double spectral_norm_power(const LinearMap &apply, const LinearMap &apply_adjoint,
                           Index cols)
{
  if (cols == 0)
  {
    return 0.0;
  }
  Vector x = deterministic_probe(cols);
  double sigma = 0.0;
  for (int it = 0; it < kPowerMaxIterations; it++)
  {
    const Vector y = apply(x);
    const Vector z = apply_adjoint(y);
    const double zn = z.norm();
    if (zn == 0.0)
    {
      return std::max(sigma, y.norm());
    }
    // sqrt(||M^H M x||) bounds ||M x|| from above for unit x and is the sharper
    // lower estimate of sigma_max.
    const double next = std::sqrt(zn);
    x = z / zn;
    const bool converged = std::abs(next - sigma) <= kPowerTolerance * next;
    sigma = next;
    if (converged)
    {
      break;
    }
  }
  return sigma;
}

double spectral_norm(MatrixView m)
{
  if (m.size() == 0)
  {
    return 0.0;
  }
  if (std::min(m.rows(), m.cols()) <= kDenseSvdLimit)
  {
    return spectral_norm_svd(m);
  }
  return spectral_norm_power([&m](const Vector &x) -> Vector { return m * x; },
                             [&m](const Vector &y) -> Vector { return m.adjoint() * y; },
                             m.cols());
}

double orthonormality_defect(MatrixView q)
{
  const Matrix gram = q.adjoint() * q;
  return (gram - Matrix::Identity(q.cols(), q.cols())).norm();
}

OrthonormalBasis::OrthonormalBasis(Matrix q) : q_(std::move(q)), defect_(0.0)
{
  if (q_.cols() > q_.rows())
  {
    throw std::invalid_argument("orthonormal basis has more columns than rows");
  }
  require_finite(q_, "orthonormal basis");
  defect_ = orthonormality_defect(q_);
  if (defect_ > orthotol(q_.rows(), q_.cols()))
  {
    throw std::invalid_argument("basis columns are not orthonormal (defect " +
                                std::to_string(defect_) + ")");
  }
}

Projection orthogonalize_against(const Vector &v, MatrixView basis)
{
  if (v.size() != basis.rows())
  {
    throw std::invalid_argument("orthogonalize_against: vector length " +
                                std::to_string(v.size()) + " does not match basis rows " +
                                std::to_string(basis.rows()));
  }
  Projection p;
  p.residual = v;
  p.coeffs = Vector::Zero(basis.cols());
  if (basis.cols() == 0)
  {
    p.beta = v.norm();
    return p;
  }
  double previous = v.norm();
  for (int pass = 0; pass < 2; pass++)
  {
    const Vector c = basis.adjoint() * p.residual;
    p.residual.noalias() -= basis * c;
    p.coeffs += c;
    p.passes = pass + 1;
    const double current = p.residual.norm();
    if (current > previous * M_SQRT1_2)
    {
      break;
    }
    previous = current;
  }
  p.beta = p.residual.norm();
  return p;
}

Projection orthogonalize_against(const Vector &v, const OrthonormalBasis &basis)
{
  return orthogonalize_against(v, basis.matrix());
}

PseudoinverseProduct pinv_apply_right(MatrixView m, MatrixView x)
{
  if (x.cols() != m.cols())
  {
    throw std::invalid_argument("pinv_apply_right: X has " + std::to_string(x.cols()) +
                                " columns, M has " + std::to_string(m.cols()));
  }
  PseudoinverseProduct out;
  out.value = Matrix::Zero(x.rows(), m.rows());
  if (m.size() == 0)
  {
    return out;
  }
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd &s = svd.singularValues();
  out.sigma_max = s(0);
  out.cutoff = static_cast<double>(std::max(m.rows(), m.cols())) * unit_roundoff *
               out.sigma_max;
  for (Index i = 0; i < s.size(); i++)
  {
    if (s(i) > out.cutoff)
    {
      out.rank = i + 1;
    }
  }
  out.rank_deficient = out.rank < std::min(m.rows(), m.cols());
  if (out.rank == 0)
  {
    return out;
  }
  out.sigma_min = s(out.rank - 1);
  const Index r = out.rank;
  Matrix xv = x * svd.matrixV().leftCols(r);
  for (Index i = 0; i < r; i++)
  {
    xv.col(i) /= s(i);
  }
  out.value.noalias() = xv * svd.matrixU().leftCols(r).adjoint();
  return out;
}

Index numerical_rank(MatrixView m)
{
  if (m.size() == 0)
  {
    return 0;
  }
  Eigen::JacobiSVD<Matrix> svd(m);
  const Eigen::VectorXd &s = svd.singularValues();
  const double cutoff =
      static_cast<double>(std::max(m.rows(), m.cols())) * unit_roundoff * s(0);
  Index rank = 0;
  while (rank < s.size() && s(rank) > cutoff)
  {
    rank++;
  }
  return rank;
}

Matrix column_space_basis(MatrixView m)
{
  if (m.size() == 0)
  {
    return Matrix(m.rows(), 0);
  }
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU);
  const Eigen::VectorXd &s = svd.singularValues();
  const double cutoff =
      static_cast<double>(std::max(m.rows(), m.cols())) * unit_roundoff * s(0);
  Index rank = 0;
  while (rank < s.size() && s(rank) > cutoff)
  {
    rank++;
  }
  return svd.matrixU().leftCols(rank);
}

Matrix rrqr_basis(MatrixView m, double tol)
{
  if (m.size() == 0)
  {
    return Matrix(m.rows(), 0);
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(m);
  const Matrix &r = qr.matrixQR();
  const Index steps = std::min(m.rows(), m.cols());
  Index rank = 0;
  while (rank < steps && std::abs(r(rank, rank)) > tol)
  {
    rank++;
  }
  Matrix q = qr.householderQ() * Matrix::Identity(m.rows(), rank);
  return q;
}

double subspace_distance(MatrixView x, MatrixView y)
{
  if (x.rows() != y.rows())
  {
    throw std::invalid_argument("subspace_distance: row counts differ (" +
                                std::to_string(x.rows()) + " vs " +
                                std::to_string(y.rows()) + ")");
  }
  const Matrix bx = column_space_basis(x);
  const Matrix by = column_space_basis(y);
  if (bx.cols() != by.cols())
  {
    throw std::invalid_argument("subspace_distance: rank mismatch (" +
                                std::to_string(bx.cols()) + " vs " +
                                std::to_string(by.cols()) + ")");
  }
  if (bx.cols() == 0)
  {
    return 0.0;
  }
  const Matrix outside = by - bx * (bx.adjoint() * by);
  return std::min(1.0, spectral_norm(outside));
}

}  // namespace toar
