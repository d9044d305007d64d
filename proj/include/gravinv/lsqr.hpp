#pragma once

// Golub-Kahan bidiagonalization and the Krylov-subspace inversion path used as
// the comparison baseline: the same focusing iteration, with the subspace from
// t GKB steps and alpha from the truncated UPRE.

#include "gravinv/irls.hpp"
#include "gravinv/regparam.hpp"
#include "gravinv/types.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <concepts>
#include <string>

namespace gravinv {

template <class Op>
concept VectorOperator = requires(Op& op, const Vector& x) {
  { op.rows() } -> std::convertible_to<Index>;
  { op.cols() } -> std::convertible_to<Index>;
  { op.apply(x) } -> std::convertible_to<Vector>;
  { op.apply_transpose(x) } -> std::convertible_to<Vector>;
};

/// A V_t = U_{t+1} B_t, B_t lower bidiagonal ((t+1) x t). After a breakdown in
/// beta the recurrence closes exactly and B is square (t x t).
struct GkbFactorization {
  Matrix U;  // m x (t+1), or m x t after a beta breakdown
  Matrix V;  // n x t
  Matrix B;
  double beta1 = 0.0;  // ||r||
  Index t = 0;
  bool breakdown = false;
  bool reorthogonalized = true;
};

namespace detail {

// Two passes of classical Gram-Schmidt against the first `count` columns.
inline void reorthogonalize(Vector& x, const Matrix& basis, Index count) {
  if (count == 0) return;
  for (int pass = 0; pass < 2; ++pass) {
    const auto Q = basis.leftCols(count);
    x.noalias() -= Q * (Q.transpose() * x);
  }
}

inline constexpr double kBreakdownTolerance = 1e-13;

}  // namespace detail

/// t steps of Golub-Kahan bidiagonalization started from r. Exactly t products
/// with A and t with A^T unless the recurrence breaks down earlier.
template <VectorOperator Op>
GkbFactorization gkb(Op& A, const Vector& r, Index t, bool reorth = true) {
  const Index m = A.rows();
  const Index n = A.cols();
  detail::require(r.size() == m, "gkb: start vector length does not match the operator");
  detail::require(t >= 1 && t <= std::min(m, n),
                  "gkb: subspace size t=" + std::to_string(t) + " outside [1, min(m, n)]");
  const double beta1 = r.norm();
  detail::require(beta1 > 0.0, "gkb: start vector is zero");

  GkbFactorization f;
  f.beta1 = beta1;
  f.reorthogonalized = reorth;
  Matrix U = Matrix::Zero(m, t + 1);
  Matrix V = Matrix::Zero(n, t);
  Vector alphas = Vector::Zero(t);
  Vector betas = Vector::Zero(t);  // betas(i) = beta_{i+2}, below alphas(i)

  U.col(0) = r / beta1;
  Vector v = A.apply_transpose(U.col(0));
  alphas(0) = v.norm();
  double scale = alphas(0);
  detail::require(alphas(0) > 0.0, "gkb: A^T r vanishes, no Krylov subspace");
  V.col(0) = v / alphas(0);

  Index steps = t;
  bool beta_breakdown = false;
  for (Index i = 0; i < t; ++i) {
    Vector u = A.apply(V.col(i)) - alphas(i) * U.col(i);
    if (reorth) detail::reorthogonalize(u, U, i + 1);
    betas(i) = u.norm();
    scale = std::max(scale, betas(i));
    if (betas(i) <= detail::kBreakdownTolerance * scale) {
      steps = i + 1;
      beta_breakdown = true;
      f.breakdown = true;
      break;
    }
    U.col(i + 1) = u / betas(i);
    if (i + 1 == t) break;

    Vector w = A.apply_transpose(U.col(i + 1)) - betas(i) * V.col(i);
    if (reorth) detail::reorthogonalize(w, V, i + 1);
    alphas(i + 1) = w.norm();
    scale = std::max(scale, alphas(i + 1));
    if (alphas(i + 1) <= detail::kBreakdownTolerance * scale) {
      steps = i + 1;
      f.breakdown = true;
      break;
    }
    V.col(i + 1) = w / alphas(i + 1);
  }

  f.t = steps;
  const Index brows = beta_breakdown ? steps : steps + 1;
  f.B = Matrix::Zero(brows, steps);
  for (Index i = 0; i < steps; ++i) {
    f.B(i, i) = alphas(i);
    if (i + 1 < brows) f.B(i + 1, i) = betas(i);
  }
  f.U = U.leftCols(brows);
  f.V = V.leftCols(steps);
  return f;
}

/// Singular triples of A restricted to the Krylov subspace:
/// B_t = P S Z^T gives U = U_{t+1} P, V = V_t Z.
/// If `residual` is given it receives, per kept value, a bound on
/// ||A^T u_i - sigma_i v_i|| / sigma_i. The exact residual is
/// alpha_{t+1} |P_{t+1,i}|; alpha_{t+1} <= ||A|| is replaced by sigma_1 so that
/// no further product with A^T is needed.
inline SvdTriple gkb_triple(const GkbFactorization& f, Vector* residual = nullptr) {
  Eigen::BDCSVD<Matrix> svd(f.B, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double top = s.size() > 0 ? s(0) : 0.0;
  Index r = 0;
  while (r < s.size() && s(r) > 0.0 && s(r) * s(r) > kRankTolerance * top * top) ++r;
  if (r == 0) throw RankDeficiencyError("gkb: projected matrix is numerically zero", 0);

  SvdTriple out;
  out.q = r;
  out.l = f.t;
  out.p = 0;
  out.sigma = s.head(r);
  out.U = f.U * svd.matrixU().leftCols(r);
  out.V = f.V * svd.matrixV().leftCols(r);
  if (residual) {
    // after a breakdown the subspace is invariant and the residuals vanish
    const bool closed = f.breakdown;
    residual->resize(r);
    for (Index i = 0; i < r; ++i)
      (*residual)(i) = closed ? 0.0 : top * std::abs(svd.matrixU()(f.B.rows() - 1, i)) / s(i);
  }
  return out;
}

/// Focusing inversion on t-dimensional Krylov subspaces with the truncated UPRE.
/// The default truncation keeps the converged Ritz values.
inline InversionResult lsqr_invert(const InversionProblem& prob, const InversionConfig& cfg) {
  detail::require(cfg.solver == Solver::Lsqr, "lsqr_invert: config must select the LSQR solver");
  return detail::run_irls(prob, cfg, [&](WeightedSystem& A, const Vector& residual, Index) {
    const GkbFactorization f = gkb(A, residual, cfg.t, cfg.reorthogonalize);
    Vector ritz;
    SubspaceFactorization out{gkb_triple(f, &ritz), 0};
    out.upre_terms = cfg.tupre_rule == TupreRule::RitzConverged
                         ? tupre_converged_index(ritz, cfg.tupre_ritz_tolerance)
                         : tupre_truncation_index(out.triple.sigma, cfg.tupre_threshold);
    return out;
  });
}

/// Dispatches on cfg.solver.
inline InversionResult solve(const InversionProblem& prob, const InversionConfig& cfg,
                             const MemoryPolicy& memory = {}) {
  return cfg.solver == Solver::Lsqr ? lsqr_invert(prob, cfg) : invert(prob, cfg, memory);
}

}  // namespace gravinv
