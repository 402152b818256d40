// Copyright The toar-audit Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TOAR_ARNOLDI_HPP
#define TOAR_ARNOLDI_HPP

#include <optional>
#include "toar/companion.hpp"

namespace toar
{

// C V_k = V_{k+1} H_k with V materialized in full (2n rows). Used as the reference
// the compact iteration is checked against.
//
// Without breakdown V has k+1 columns and H is (k+1) x k. When step j breaks down
// (subdiagonal entry at or below 2n eps ||C||_2) the run stops with an invariant
// subspace: V has j columns and H is j x j.
struct ArnoldiDecomposition
{
  Matrix V;
  Matrix H;
  Index steps = 0;
  std::optional<Index> breakdown_at;
};

ArnoldiDecomposition arnoldi_run(const CompanionOperator &op, const Vector &v1, Index k);

}  // namespace toar

#endif  // TOAR_ARNOLDI_HPP
