// Copyright The toar-audit Authors.
// SPDX-License-Identifier: Apache-2.0

#ifndef TOAR_TOAR_HPP
#define TOAR_TOAR_HPP

#include <vector>
#include "toar/companion.hpp"

namespace toar
{

struct DeflationEvent
{
  Index step = 0;     // 1-based step at which the first-level remainder vanished
  double beta = 0.0;  // its norm before being dropped
};

// Two-level orthogonal Arnoldi state. The Arnoldi basis of the companion operator
// is held in compact form V = (I_2 (x) Q) U with U = [U1; U2], and is never formed
// during the iteration.
//
// After k steps without breakdown:
//   Q  = Q_{k+1}  (n x d_{k+1}),  U = U_{k+1}  (2 d_{k+1} x (k+1)),  H  (k+1) x k,
// and the leading blocks give Q_k (n x d_k) and U_k (2 d_k x k). If step k finds an
// invariant subspace, U keeps k columns and H is k x k.
//
// Each first-level growth of Q appends a row to U1 that is zero except in the new
// column and a row to U2 that is zero throughout. Those entries are never written.
class ToarDecomposition
{
public:
  // Compact basis of v1 = [r_0; r_{-1}] / ||.||, with Q from ordered Gram-Schmidt
  // of (r_0, r_{-1}) at rank tolerance n eps max ||r_i||.
  static ToarDecomposition init(const ProblemPair &pair, const StartPair &start);

  // Wraps externally built factors (synthetic decompositions, fault injection).
  // `dim_k` is the number of leading Q columns forming Q_k. The result cannot be
  // extended.
  static ToarDecomposition from_parts(Matrix q, Matrix u1, Matrix u2, Matrix h,
                                      Index dim_k, double companion_norm);

  // One Arnoldi step on the companion operator. Throws std::logic_error after an
  // invariant subspace has been found.
  void extend(const ProblemPair &pair);

  void reserve(Index steps);

  Index size() const { return n_; }
  Index steps() const { return steps_; }
  Index columns() const { return j_; }
  Index dim() const { return d_; }         // d_{k+1}
  Index dim_k() const { return d_prev_; }  // d_k
  bool invariant_subspace() const { return invariant_; }
  bool extendable() const { return extendable_; }
  double companion_norm() const { return norm_c_; }
  const std::vector<DeflationEvent> &deflation_log() const { return deflations_; }

  Matrix Q() const { return q_.leftCols(d_); }
  Matrix Qk() const { return q_.leftCols(d_prev_); }
  Matrix U1() const { return u1_.topLeftCorner(d_, j_); }
  Matrix U2() const { return u2_.topLeftCorner(d_, j_); }
  Matrix U() const;   // [U1; U2], 2 d x j
  Matrix Uk() const;  // leading 2 d_k x k block
  Matrix H() const { return h_.topLeftCorner(j_, steps_); }
  Matrix V() const;   // (I_2 (x) Q) U, 2n x j
  Matrix Vk() const;  // (I_2 (x) Q_k) U_k, 2n x k

private:
  ToarDecomposition() = default;

  void ensure_capacity(Index d, Index j);

  Index n_ = 0;
  Index d_ = 0;
  Index d_prev_ = 0;
  Index j_ = 0;
  Index steps_ = 0;
  bool invariant_ = false;
  bool extendable_ = true;
  double norm_c_ = 1.0;
  Matrix q_;   // n x capacity
  Matrix u1_;  // capacity x capacity, zero beyond the active block
  Matrix u2_;
  Matrix h_;
  std::vector<DeflationEvent> deflations_;
};

ToarDecomposition toar_init(const ProblemPair &pair, const StartPair &start);

ToarDecomposition toar_step(ToarDecomposition state, const ProblemPair &pair);

// k steps, stopping early at an invariant subspace. Requires 1 <= k < 2n.
ToarDecomposition toar_run(const ProblemPair &pair, const StartPair &start, Index k);

}  // namespace toar

#endif  // TOAR_TOAR_HPP
