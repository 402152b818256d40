// Copyright The toar-audit Authors.
// SPDX-License-Identifier: Apache-2.0

#include "toar/arnoldi.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace toar
{

ArnoldiDecomposition arnoldi_run(const CompanionOperator &op, const Vector &v1, Index k)
{
  const Index dim = op.dimension();
  if (k < 1 || k >= dim)
  {
    throw std::invalid_argument("arnoldi_run: k = " + std::to_string(k) +
                                " outside [1, " + std::to_string(dim - 1) + "]");
  }
  if (v1.size() != dim)
  {
    throw std::invalid_argument("arnoldi_run: start vector has the wrong length");
  }
  if (std::abs(v1.norm() - 1.0) > 1e-12)
  {
    throw std::invalid_argument("arnoldi_run: start vector is not unit norm");
  }
  const double breaktol = static_cast<double>(dim) * unit_roundoff * op.norm_estimate();

  ArnoldiDecomposition out;
  out.V = Matrix::Zero(dim, k + 1);
  out.H = Matrix::Zero(k + 1, k);
  out.V.col(0) = v1;
  for (Index j = 0; j < k; j++)
  {
    const Vector w = op.apply(Vector(out.V.col(j)));
    const Projection p = orthogonalize_against(w, out.V.leftCols(j + 1));
    out.H.col(j).head(j + 1) = p.coeffs;
    out.steps = j + 1;
    if (p.beta <= breaktol)
    {
      out.breakdown_at = j + 1;
      out.V.conservativeResize(Eigen::NoChange, j + 1);
      out.H.conservativeResize(j + 1, j + 1);
      return out;
    }
    out.H(j + 1, j) = p.beta;
    out.V.col(j + 1) = p.residual / p.beta;
  }
  return out;
}

}  // namespace toar
