// Copyright The toar-audit Authors.
// SPDX-License-Identifier: Apache-2.0

#include "toar/companion.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>

namespace toar
{

namespace
{

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

void fnv_mix(std::uint64_t &h, const void *data, std::size_t bytes)
{
  const auto *p = static_cast<const unsigned char *>(data);
  for (std::size_t i = 0; i < bytes; i++)
  {
    h ^= p[i];
    h *= kFnvPrime;
  }
}

void require_length(const Vector &v, Index expected, const char *what)
{
  if (v.size() != expected)
  {
    throw std::invalid_argument(std::string(what) + ": expected length " +
                                std::to_string(expected) + ", got " +
                                std::to_string(v.size()));
  }
}

}  // namespace

ProblemPair::ProblemPair(Matrix a, Matrix b) : a_(std::move(a)), b_(std::move(b))
{
  if (a_.rows() == 0 || a_.rows() != a_.cols())
  {
    throw std::invalid_argument("matrix A must be square and nonempty");
  }
  if (b_.rows() != a_.rows() || b_.cols() != a_.cols())
  {
    throw std::invalid_argument("matrix B must have the same size as A");
  }
  require_finite(a_, "matrix A");
  require_finite(b_, "matrix B");
  norm_a_ = spectral_norm(a_);
  norm_b_ = spectral_norm(b_);
}

double ProblemPair::norm_max() const
{
  return std::max({1.0, norm_a_, norm_b_});
}

std::uint64_t ProblemPair::fingerprint() const
{
  std::uint64_t h = kFnvOffset;
  const std::int64_t n = size();
  fnv_mix(h, &n, sizeof(n));
  fnv_mix(h, a_.data(), sizeof(Complex) * static_cast<std::size_t>(a_.size()));
  fnv_mix(h, b_.data(), sizeof(Complex) * static_cast<std::size_t>(b_.size()));
  return h;
}

StartPair::StartPair(Vector r_minus1, Vector r_zero)
  : r_minus1_(std::move(r_minus1)), r_zero_(std::move(r_zero))
{
  if (r_zero_.size() == 0 || r_minus1_.size() != r_zero_.size())
  {
    throw std::invalid_argument("start vectors must be nonempty and of equal length");
  }
  require_finite(r_minus1_, "start vector r_{-1}");
  require_finite(r_zero_, "start vector r_0");
  if (r_minus1_.norm() == 0.0 && r_zero_.norm() == 0.0)
  {
    throw std::invalid_argument("start vectors are both zero");
  }
}

EmbeddedStart embed_start(const StartPair &s)
{
  const Index n = s.size();
  EmbeddedStart out;
  out.v.resize(2 * n);
  out.v.head(n) = s.r_zero();
  out.v.tail(n) = s.r_minus1();
  out.factor = out.v.norm();
  out.v /= out.factor;
  return out;
}

Matrix assemble_companion(const ProblemPair &pair)
{
  const Index n = pair.size();
  if (n > kAssemblyLimit)
  {
    throw std::invalid_argument("companion assembly refused for n = " + std::to_string(n) +
                                " > " + std::to_string(kAssemblyLimit));
  }
  Matrix c = Matrix::Zero(2 * n, 2 * n);
  c.topLeftCorner(n, n) = pair.a();
  c.topRightCorner(n, n) = pair.b();
  c.bottomLeftCorner(n, n).setIdentity();
  return c;
}

CompanionNorm companion_norm(const ProblemPair &pair)
{
  const Index n = pair.size();
  CompanionNorm out;
  if (n <= kAssemblyLimit)
  {
    out.value = spectral_norm_svd(assemble_companion(pair));
    out.path = NormPath::assembled_svd;
  }
  else
  {
    const Matrix &a = pair.a();
    const Matrix &b = pair.b();
    out.value = spectral_norm_power(
        [&](const Vector &v) -> Vector
        {
          Vector w(2 * n);
          w.head(n) = a * v.head(n) + b * v.tail(n);
          w.tail(n) = v.head(n);
          return w;
        },
        [&](const Vector &v) -> Vector
        {
          Vector w(2 * n);
          w.head(n) = a.adjoint() * v.head(n) + v.tail(n);
          w.tail(n) = b.adjoint() * v.head(n);
          return w;
        },
        2 * n);
    out.path = NormPath::power_iteration;
  }
  const double lower = pair.norm_max();
  out.value = std::clamp(out.value, lower, std::sqrt(3.0) * lower);
  return out;
}

CompanionOperator::CompanionOperator(ProblemPair pair)
  : pair_(std::move(pair)), norm_(companion_norm(pair_))
{
}

Vector CompanionOperator::apply(const Vector &v) const
{
  const Index n = size();
  require_length(v, 2 * n, "CompanionOperator::apply");
  Vector w(2 * n);
  w.head(n).noalias() = pair_.a() * v.head(n);
  w.head(n).noalias() += pair_.b() * v.tail(n);
  w.tail(n) = v.head(n);
  return w;
}

Vector CompanionOperator::apply_adjoint(const Vector &v) const
{
  const Index n = size();
  require_length(v, 2 * n, "CompanionOperator::apply_adjoint");
  Vector w(2 * n);
  w.head(n).noalias() = pair_.a().adjoint() * v.head(n);
  w.head(n) += v.tail(n);
  w.tail(n).noalias() = pair_.b().adjoint() * v.head(n);
  return w;
}

Matrix CompanionOperator::apply(const Matrix &v) const
{
  const Index n = size();
  if (v.rows() != 2 * n)
  {
    throw std::invalid_argument("CompanionOperator::apply: block has " +
                                std::to_string(v.rows()) + " rows, expected " +
                                std::to_string(2 * n));
  }
  Matrix w(2 * n, v.cols());
  w.topRows(n).noalias() = pair_.a() * v.topRows(n);
  w.topRows(n).noalias() += pair_.b() * v.bottomRows(n);
  w.bottomRows(n) = v.topRows(n);
  return w;
}

}  // namespace toar
