// Copyright The toar-audit Authors.
// SPDX-License-Identifier: Apache-2.0

#include "toar/toar.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace toar
{

namespace
{

// Zero-padded enlargement; entries outside the old block stay exactly zero.
void grow(Matrix &m, Index rows, Index cols)
{
  if (m.rows() >= rows && m.cols() >= cols)
  {
    return;
  }
  Matrix bigger = Matrix::Zero(std::max(rows, m.rows()), std::max(cols, m.cols()));
  bigger.topLeftCorner(m.rows(), m.cols()) = m;
  m.swap(bigger);
}

Index grown_capacity(Index current, Index needed, Index limit)
{
  if (current >= needed)
  {
    return current;
  }
  return std::min(std::max(needed, 2 * current), std::max(needed, limit));
}

Matrix stack(const Matrix &top, const Matrix &bottom)
{
  Matrix s(top.rows() + bottom.rows(), top.cols());
  s << top, bottom;
  return s;
}

}  // namespace

void ToarDecomposition::ensure_capacity(Index d, Index j)
{
  const Index dcap = grown_capacity(q_.cols(), d, n_);
  const Index jcap = grown_capacity(u1_.cols(), j, 2 * n_);
  grow(q_, n_, dcap);
  grow(u1_, dcap, jcap);
  grow(u2_, dcap, jcap);
  grow(h_, jcap, jcap);
}

void ToarDecomposition::reserve(Index steps)
{
  ensure_capacity(std::min(n_, d_ + steps), std::min(2 * n_, j_ + steps));
}

ToarDecomposition ToarDecomposition::init(const ProblemPair &pair, const StartPair &start)
{
  const Index n = pair.size();
  if (start.size() != n)
  {
    throw std::invalid_argument("toar_init: start vectors have length " +
                                std::to_string(start.size()) + ", problem size is " +
                                std::to_string(n));
  }
  ToarDecomposition dec;
  dec.n_ = n;
  dec.norm_c_ = toar::companion_norm(pair).value;
  dec.ensure_capacity(std::min<Index>(2, n), 1);

  const double tol = static_cast<double>(n) * unit_roundoff *
                     std::max(start.r_zero().norm(), start.r_minus1().norm());
  for (const Vector *r : {&start.r_zero(), &start.r_minus1()})
  {
    const Projection p = orthogonalize_against(*r, dec.q_.leftCols(dec.d_));
    if (p.beta > tol)
    {
      dec.q_.col(dec.d_) = p.residual / p.beta;
      dec.d_++;
    }
  }
  const Index d = dec.d_;
  Vector coords(2 * d);
  coords.head(d) = dec.q_.leftCols(d).adjoint() * start.r_zero();
  coords.tail(d) = dec.q_.leftCols(d).adjoint() * start.r_minus1();
  coords /= coords.norm();
  dec.u1_.col(0).head(d) = coords.head(d);
  dec.u2_.col(0).head(d) = coords.tail(d);
  dec.j_ = 1;
  dec.d_prev_ = d;
  return dec;
}

ToarDecomposition ToarDecomposition::from_parts(Matrix q, Matrix u1, Matrix u2, Matrix h,
                                                Index dim_k, double companion_norm)
{
  const Index d = q.cols();
  const Index j = u1.cols();
  const Index k = h.cols();
  if (u1.rows() != d || u2.rows() != d || u2.cols() != j)
  {
    throw std::invalid_argument("from_parts: U blocks must both be d x j with d = cols(Q)");
  }
  if (h.rows() != j || (j != k && j != k + 1) || k < 1)
  {
    throw std::invalid_argument("from_parts: H must be (k+1) x k or k x k with k >= 1");
  }
  if (dim_k < 1 || dim_k > d)
  {
    throw std::invalid_argument("from_parts: dim_k outside [1, cols(Q)]");
  }
  ToarDecomposition dec;
  dec.n_ = q.rows();
  dec.d_ = d;
  dec.d_prev_ = dim_k;
  dec.j_ = j;
  dec.steps_ = k;
  dec.invariant_ = (j == k);
  dec.extendable_ = false;
  dec.norm_c_ = companion_norm;
  dec.q_ = std::move(q);
  dec.u1_ = std::move(u1);
  dec.u2_ = std::move(u2);
  dec.h_ = std::move(h);
  return dec;
}

void ToarDecomposition::extend(const ProblemPair &pair)
{
  if (!extendable_)
  {
    throw std::logic_error("toar_step: decomposition was assembled from parts");
  }
  if (invariant_)
  {
    throw std::logic_error("toar_step: invariant subspace already found at step " +
                           std::to_string(steps_));
  }
  if (pair.size() != n_)
  {
    throw std::invalid_argument("toar_step: problem size does not match the decomposition");
  }
  if (j_ >= 2 * n_)
  {
    throw std::logic_error("toar_step: Krylov dimension limit 2n reached");
  }

  const Index last = j_ - 1;
  const Vector u1 = u1_.col(last).head(d_);
  const Vector u2 = u2_.col(last).head(d_);
  const auto q = q_.leftCols(d_);

  // Top block of C v_j; the bottom block Q u1 is already in span(Q).
  Vector t = pair.a() * (q * u1);
  t.noalias() += pair.b() * (q * u2);

  const Projection first = orthogonalize_against(t, q);
  const double defltol = static_cast<double>(n_) * unit_roundoff * (t.norm() + norm_c_);
  steps_++;
  d_prev_ = d_;
  const bool grows = first.beta > defltol;
  const Index d_new = grows ? d_ + 1 : d_;
  ensure_capacity(d_new, j_ + 1);
  if (grows)
  {
    q_.col(d_) = first.residual / first.beta;
  }
  else
  {
    deflations_.push_back({steps_, first.beta});
  }

  // Coordinates of C v_j in the basis I_2 (x) Q_new: top [c; beta], bottom [u1; 0].
  Vector candidate = Vector::Zero(2 * d_new);
  candidate.head(d_) = first.coeffs;
  if (grows)
  {
    candidate(d_) = first.beta;
  }
  candidate.segment(d_new, d_) = u1;

  const Matrix u_stack =
      stack(u1_.topLeftCorner(d_new, j_), u2_.topLeftCorner(d_new, j_));
  const Projection second = orthogonalize_against(candidate, u_stack);
  h_.col(steps_ - 1).head(j_) = second.coeffs;
  d_ = d_new;

  const double breaktol = static_cast<double>(n_) * unit_roundoff * norm_c_;
  if (second.beta <= breaktol)
  {
    invariant_ = true;
    return;
  }
  h_(j_, steps_ - 1) = second.beta;
  const Vector u_new = second.residual / second.beta;
  u1_.col(j_).head(d_) = u_new.head(d_);
  u2_.col(j_).head(d_) = u_new.tail(d_);
  j_++;
}

Matrix ToarDecomposition::U() const
{
  return stack(U1(), U2());
}

Matrix ToarDecomposition::Uk() const
{
  return stack(u1_.topLeftCorner(d_prev_, steps_), u2_.topLeftCorner(d_prev_, steps_));
}

Matrix ToarDecomposition::V() const
{
  const auto q = q_.leftCols(d_);
  return stack(q * u1_.topLeftCorner(d_, j_), q * u2_.topLeftCorner(d_, j_));
}

Matrix ToarDecomposition::Vk() const
{
  const auto q = q_.leftCols(d_prev_);
  return stack(q * u1_.topLeftCorner(d_prev_, steps_),
               q * u2_.topLeftCorner(d_prev_, steps_));
}

ToarDecomposition toar_init(const ProblemPair &pair, const StartPair &start)
{
  return ToarDecomposition::init(pair, start);
}

ToarDecomposition toar_step(ToarDecomposition state, const ProblemPair &pair)
{
  state.extend(pair);
  return state;
}

ToarDecomposition toar_run(const ProblemPair &pair, const StartPair &start, Index k)
{
  const Index n = pair.size();
  if (k < 1 || k >= 2 * n)
  {
    throw std::invalid_argument("toar_run: k = " + std::to_string(k) + " outside [1, " +
                                std::to_string(2 * n - 1) + "]");
  }
  ToarDecomposition dec = ToarDecomposition::init(pair, start);
  dec.reserve(k);
  for (Index s = 0; s < k && !dec.invariant_subspace(); s++)
  {
    dec.extend(pair);
  }
  return dec;
}

}  // namespace toar
