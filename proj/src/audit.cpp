// Copyright The toar-audit Authors.
// SPDX-License-Identifier: Apache-2.0

#include "toar/audit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace toar
{

namespace
{

void require_same_size(const ProblemPair &pair, const ToarDecomposition &dec,
                       const char *where)
{
  if (pair.size() != dec.size())
  {
    throw std::invalid_argument(std::string(where) +
                                ": problem and decomposition sizes differ");
  }
  if (dec.steps() < 1)
  {
    throw std::invalid_argument(std::string(where) + ": decomposition has no steps");
  }
}

std::string format_double(double x)
{
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << x;
  return os.str();
}

Matrix identity(Index n)
{
  return Matrix::Identity(n, n);
}

}  // namespace

Residual compute_residual(const ProblemPair &pair, const ToarDecomposition &dec)
{
  require_same_size(pair, dec, "compute_residual");
  const Index n = dec.size();
  const Matrix vk = dec.Vk();
  const Matrix vn = dec.V();
  const Matrix h = dec.H();

  Residual out;
  out.R.resize(2 * n, dec.steps());
  out.R.topRows(n).noalias() = pair.a() * vk.topRows(n);
  out.R.topRows(n).noalias() += pair.b() * vk.bottomRows(n);
  out.R.topRows(n).noalias() -= vn.topRows(n) * h;
  out.R.bottomRows(n) = vk.topRows(n);
  out.R.bottomRows(n).noalias() -= vn.bottomRows(n) * h;
  out.norm = spectral_norm(out.R);
  return out;
}

Matrix BackwardError::assemble() const
{
  const Index n = size();
  Matrix e(2 * n, 2 * n);
  e << E11, E12, E21, E22;
  return e;
}

BackwardError BackwardError::from_matrix(const Matrix &e)
{
  if (e.rows() != e.cols() || e.rows() % 2 != 0 || e.rows() == 0)
  {
    throw std::invalid_argument("BackwardError: perturbation must be 2n x 2n");
  }
  const Index n = e.rows() / 2;
  BackwardError be;
  be.E11 = e.topLeftCorner(n, n);
  be.E12 = e.topRightCorner(n, n);
  be.E21 = e.bottomLeftCorner(n, n);
  be.E22 = e.bottomRightCorner(n, n);
  be.norm_E = spectral_norm(e);
  be.norm_E21 = spectral_norm(be.E21);
  be.block_norm_max = std::max({spectral_norm(be.E11), spectral_norm(be.E12), be.norm_E21,
                                spectral_norm(be.E22)});
  be.frobenius_E = e.norm();
  return be;
}

BackwardError project_backward_error(const Matrix &R, const ToarDecomposition &dec)
{
  const Index n = dec.size();
  const Index d = dec.dim_k();
  const Index k = dec.steps();
  if (R.rows() != 2 * n || R.cols() != k)
  {
    throw std::invalid_argument("project_backward_error: residual must be 2n x k");
  }
  const Matrix uk = dec.Uk();
  const Matrix qk = dec.Qk();

  const PseudoinverseProduct pu = pinv_apply_right(uk, R);
  if (pu.rank < uk.cols())
  {
    throw HypothesisError("U_k is not of full column rank (rank " + std::to_string(pu.rank) +
                          " < " + std::to_string(uk.cols()) + ")");
  }
  // Both column halves of R U_k^+ go through Q_k^+ in one factorization.
  Matrix halves(4 * n, d);
  halves << pu.value.leftCols(d), pu.value.rightCols(d);
  const PseudoinverseProduct pq = pinv_apply_right(qk, halves);
  if (pq.rank < qk.cols())
  {
    throw HypothesisError("Q_k is not of full column rank (rank " + std::to_string(pq.rank) +
                          " < " + std::to_string(qk.cols()) + ")");
  }
  Matrix e(2 * n, 2 * n);
  e << -pq.value.topRows(2 * n), -pq.value.bottomRows(2 * n);

  BackwardError be = BackwardError::from_matrix(e);
  be.cond_Uk = pu.condition();
  be.cond_Qk = pq.condition();
  be.pinv_norm_Uk = pu.pinv_norm();
  be.pinv_norm_Qk = pq.pinv_norm();
  be.cutoff_Uk = pu.cutoff;
  be.cutoff_Qk = pq.cutoff;

  const Matrix check = e * dec.Vk() + R;
  be.verification_residual = spectral_norm(check);
  be.verified = be.verification_residual <= 100.0 * unit_roundoff * spectral_norm(R);
  return be;
}

RecoveredPerturbation recover_companion(const ProblemPair &pair, const BackwardError &be)
{
  const Index n = pair.size();
  if (be.size() != n)
  {
    throw std::invalid_argument("recover_companion: perturbation size mismatch");
  }
  if (!(be.norm_E21 < 1.0))
  {
    throw InfeasibleError("||E21||_2 = " + format_double(be.norm_E21) +
                          " >= 1; companion structure is not recoverable");
  }
  const Matrix m = identity(n) + be.E21;
  const Eigen::PartialPivLU<Matrix> lu(m);

  RecoveredPerturbation rp;
  rp.transform_topright = lu.solve(be.E22);
  rp.transform_bottomright = lu.inverse();
  const Matrix tm = rp.transform_topright * m;
  rp.delta_a = be.E11 + tm;
  rp.delta_b = pair.b() * be.E21 + be.E12 * m - (pair.a() + be.E11) * tm;
  rp.norm_delta_a = spectral_norm(rp.delta_a);
  rp.norm_delta_b = spectral_norm(rp.delta_b);
  if (n <= kAssemblyLimit)
  {
    rp.identity_residual = recovery_identity_residual(pair, be, rp);
  }
  return rp;
}

double recovery_identity_residual(const ProblemPair &pair, const BackwardError &be,
                                  const RecoveredPerturbation &rp)
{
  const Index n = pair.size();
  Matrix s = Matrix::Zero(2 * n, 2 * n);
  s.topLeftCorner(n, n).setIdentity();
  s.topRightCorner(n, n) = rp.transform_topright;
  s.bottomRightCorner(n, n) = rp.transform_bottomright;

  const Matrix perturbed = assemble_companion(pair) + be.assemble();
  const ProblemPair recovered(pair.a() + rp.delta_a, pair.b() + rp.delta_b);
  const Matrix target = assemble_companion(recovered);

  const Matrix lhs = s * perturbed;
  const Matrix rhs = target * s;
  const double norm_s = spectral_norm_svd(s);
  const double scale =
      norm_s * (spectral_norm_svd(perturbed) + spectral_norm_svd(target));
  return spectral_norm_svd(lhs - rhs) / scale;
}

NearbyBasis nearby_basis(const ToarDecomposition &dec, const BackwardError &be)
{
  const Index n = dec.size();
  if (be.size() != n)
  {
    throw std::invalid_argument("nearby_basis: perturbation size mismatch");
  }
  if (!(be.norm_E21 < 1.0))
  {
    throw InfeasibleError("||E21||_2 >= 1; nearby basis undefined");
  }
  const Matrix m = identity(n) + be.E21;
  const Matrix qk = dec.Qk();
  NearbyBasis out;
  out.basis = Eigen::PartialPivLU<Matrix>(m).solve(qk);
  out.rank = numerical_rank(out.basis);
  out.solve_residual = spectral_norm(m * out.basis - qk);
  if (out.rank != qk.cols())
  {
    throw HypothesisError("nearby basis lost rank (" + std::to_string(out.rank) + " < " +
                          std::to_string(qk.cols()) + ")");
  }
  return out;
}

double nearby_distance(const ToarDecomposition &dec, const BackwardError &be)
{
  const Index n = dec.size();
  if (!(be.norm_E21 < 1.0))
  {
    throw InfeasibleError("||E21||_2 >= 1; nearby basis undefined");
  }
  const Matrix m = identity(n) + be.E21;
  const Eigen::PartialPivLU<Matrix> lu(m);
  const Matrix qk = dec.Qk();
  // (I + E21)^{-1} Q = Q - F Q. Projecting out span(Q) leaves -P F Q, which is
  // computed without cancellation against Q itself.
  const Matrix fq = lu.solve(be.E21) * qk;
  const Matrix outside = fq - qk * (qk.adjoint() * fq);
  const Matrix tilde = qk - fq;
  const Eigen::HouseholderQR<Matrix> qr(tilde);
  const Matrix r = qr.matrixQR().topRows(qk.cols()).triangularView<Eigen::Upper>();
  const Matrix sine =
      r.triangularView<Eigen::Upper>().solve<Eigen::OnTheRight>(outside);
  return std::min(1.0, spectral_norm(sine));
}

TransformedEmbedding transformed_embedding(const ToarDecomposition &dec,
                                           const RecoveredPerturbation &rp)
{
  const auto map = [&rp](const Matrix &q, const Matrix &u1, const Matrix &u2)
  {
    const Matrix qu1 = q * u1;
    const Matrix qu2 = q * u2;
    Matrix w(2 * q.rows(), u1.cols());
    w.topRows(q.rows()) = qu1 + rp.transform_topright * qu2;
    w.bottomRows(q.rows()) = rp.transform_bottomright * qu2;
    return w;
  };
  const Index dk = dec.dim_k();
  const Matrix uk = dec.Uk();
  TransformedEmbedding out;
  out.Wk = map(dec.Qk(), uk.topRows(dk), uk.bottomRows(dk));
  out.Wnext = map(dec.Q(), dec.U1(), dec.U2());
  return out;
}

EmbeddingCheck transformed_embedding_check(const ProblemPair &pair,
                                           const ToarDecomposition &dec,
                                           const BackwardError &be,
                                           const RecoveredPerturbation &rp)
{
  require_same_size(pair, dec, "transformed_embedding_check");
  if (be.size() != pair.size() || rp.delta_a.rows() != pair.size())
  {
    throw std::invalid_argument("transformed_embedding_check: size mismatch");
  }
  const Index n = pair.size();
  const TransformedEmbedding w = transformed_embedding(dec, rp);
  const Matrix h = dec.H();
  const ProblemPair recovered(pair.a() + rp.delta_a, pair.b() + rp.delta_b);

  Matrix diff(2 * n, dec.steps());
  diff.topRows(n).noalias() = recovered.a() * w.Wk.topRows(n);
  diff.topRows(n).noalias() += recovered.b() * w.Wk.bottomRows(n);
  diff.topRows(n).noalias() -= w.Wnext.topRows(n) * h;
  diff.bottomRows(n) = w.Wk.topRows(n);
  diff.bottomRows(n).noalias() -= w.Wnext.bottomRows(n) * h;

  EmbeddingCheck out;
  out.residual = spectral_norm(diff);
  out.scale = companion_norm(recovered).value * spectral_norm(w.Wk) +
              spectral_norm(w.Wnext) * spectral_norm(h);
  return out;
}

Matrix brute_force_second_order_basis(const ProblemPair &pair, const StartPair &s, Index k)
{
  const Index n = pair.size();
  if (k < 1)
  {
    throw std::invalid_argument("brute_force_second_order_basis: k must be >= 1");
  }
  if (s.size() != n)
  {
    throw std::invalid_argument("brute_force_second_order_basis: start length mismatch");
  }
  Matrix krylov(n, k + 1);
  krylov.col(0) = s.r_minus1();
  krylov.col(1) = s.r_zero();
  Vector older = s.r_minus1();
  Vector newer = s.r_zero();
  for (Index i = 2; i <= k; i++)
  {
    Vector next = pair.a() * newer + pair.b() * older;
    // Rescaling both terms by a common factor keeps every direction and avoids
    // overflow for large norms.
    const double scale = std::max(next.norm(), newer.norm());
    if (scale > 0.0)
    {
      next /= scale;
      newer /= scale;
    }
    krylov.col(i) = next;
    older = std::move(newer);
    newer = std::move(next);
  }
  for (Index j = 0; j <= k; j++)
  {
    const double norm = krylov.col(j).norm();
    if (norm > 0.0)
    {
      krylov.col(j) /= norm;
    }
  }
  return rrqr_basis(krylov, static_cast<double>(n) * unit_roundoff);
}

StartPair recovered_start(const ToarDecomposition &dec, const RecoveredPerturbation &rp)
{
  const Index n = dec.size();
  const TransformedEmbedding w = transformed_embedding(dec, rp);
  return StartPair(w.Wk.col(0).tail(n), w.Wk.col(0).head(n));
}

double regenerated_subspace_distance(const ProblemPair &pair, const ToarDecomposition &dec,
                                     const BackwardError &be,
                                     const RecoveredPerturbation &rp)
{
  const ProblemPair recovered(pair.a() + rp.delta_a, pair.b() + rp.delta_b);
  const Matrix regenerated =
      brute_force_second_order_basis(recovered, recovered_start(dec, rp), dec.steps());
  return subspace_distance(nearby_basis(dec, be).basis, regenerated);
}

BoundCheck BoundCheck::compare(double measured, double bound)
{
  return {measured, bound, measured <= bound * (1.0 + kBoundSlack)};
}

double distance_bound(double norm_e)
{
  return norm_e / (1.0 - norm_e);
}

double delta_a_bound(double norm_e)
{
  return norm_e + norm_e * (1.0 + norm_e) / (1.0 - norm_e);
}

double delta_b_bound(double norm_e, double norm_max)
{
  const double onep = 1.0 + norm_e;
  return norm_max * (norm_e * (2.0 + norm_e) + norm_e * onep * onep / (1.0 - norm_e));
}

bool StabilityAudit::all_satisfied() const
{
  return bounds_applicable && distance && delta_a && delta_b && distance->satisfied &&
         delta_a->satisfied && delta_b->satisfied;
}

StabilityAudit run_audit(const ProblemPair &pair, const ToarDecomposition &dec)
{
  require_same_size(pair, dec, "run_audit");
  StabilityAudit a;
  a.pair_fingerprint = pair.fingerprint();
  a.n = dec.size();
  a.k = dec.steps();
  a.dim_k = dec.dim_k();
  a.norm_a = pair.norm_a();
  a.norm_b = pair.norm_b();
  a.norm_c = dec.companion_norm();

  const Residual res = compute_residual(pair, dec);
  a.residual_norm = res.norm;
  a.residual_frobenius = res.R.norm();
  a.backward = project_backward_error(res.R, dec);
  if (!a.backward.verified)
  {
    a.diagnostics.push_back("E V_k + R check exceeds 100 eps ||R||: " +
                            format_double(a.backward.verification_residual));
  }

  a.recoverable = a.backward.norm_E21 < 1.0;
  a.bounds_applicable = a.backward.norm_E < 1.0;
  if (!a.bounds_applicable)
  {
    a.diagnostics.push_back("||E||_2 = " + format_double(a.backward.norm_E) +
                            " >= 1; bounds not applicable");
  }
  if (!a.recoverable)
  {
    a.diagnostics.push_back("||E21||_2 >= 1; companion structure not recoverable");
    return a;
  }

  RecoveredPerturbation rp = recover_companion(pair, a.backward);
  if (rp.identity_residual && *rp.identity_residual > 100.0 * unit_roundoff)
  {
    a.diagnostics.push_back("similarity identity residual " +
                            format_double(*rp.identity_residual) + " exceeds 100 eps");
  }
  const NearbyBasis nb = nearby_basis(dec, a.backward);
  a.nearby_basis = nb.basis;
  a.solve_residual = nb.solve_residual;
  a.measured_distance = nearby_distance(dec, a.backward);
  a.measured_distance_direct = subspace_distance(dec.Qk(), nb.basis);

  const EmbeddingCheck w = transformed_embedding_check(pair, dec, a.backward, rp);
  a.w_check_residual = w.relative();
  a.w_check_scale = w.scale;
  if (a.w_check_residual > 1000.0 * unit_roundoff)
  {
    a.diagnostics.push_back("transformed Arnoldi relation residual " +
                            format_double(a.w_check_residual) + " exceeds 1000 eps");
  }

  a.norm_delta_a = rp.norm_delta_a;
  a.norm_delta_b = rp.norm_delta_b;
  a.frobenius_delta_a = rp.delta_a.norm();
  a.frobenius_delta_b = rp.delta_b.norm();
  a.recovered = std::move(rp);

  if (a.bounds_applicable)
  {
    const double e = a.backward.norm_E;
    a.distance = BoundCheck::compare(a.measured_distance, distance_bound(e));
    a.delta_a = BoundCheck::compare(a.norm_delta_a, delta_a_bound(e));
    a.delta_b = BoundCheck::compare(a.norm_delta_b, delta_b_bound(e, pair.norm_max()));
  }
  return a;
}

}  // namespace toar
