#pragma once

// Randomized SVD for under-determined (m <= n) matrices: Gaussian sketch of the
// row space, Householder QR, projection, and singular triples recovered from the
// eigendecomposition of B^T B. Includes the dense baseline and flop model.

#include "gravinv/types.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Householder>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <random>
#include <string>

namespace gravinv {

/// Rank-q factorization A ~= U diag(sigma) V^T.
struct SvdTriple {
  Matrix U;      // m x q, orthonormal columns
  Vector sigma;  // q values, descending, > 0
  Matrix V;      // n x q, orthonormal columns
  Index q = 0;
  Index l = 0;  // sketch size q + p (after clamping)
  Index p = 0;

  Index rank() const { return sigma.size(); }
};

/// How the n x l orthonormal basis is applied to the system matrix.
enum class BasisApplication {
  Factored,  // Householder reflectors, never accumulated
  Explicit,  // thin Q formed once
};

/// How singular triples of the projected matrix B are obtained.
enum class SmallSvdRoute {
  EigenBtB,   // eigendecomposition of B^T B
  DirectSvd,  // SVD of B, for severely ill-conditioned inputs
};

struct RsvdConfig {
  Index q = 1;
  Index p = 10;
  std::uint64_t seed = 0;
  BasisApplication basis = BasisApplication::Factored;
  SmallSvdRoute route = SmallSvdRoute::EigenBtB;
};

/// Eigenvalues at or below tau * lambda_max count as numerically zero.
inline constexpr double kRankTolerance = 1e-14;

/// Orthonormal basis Q (n x l) of range(Y^T), held as Householder reflectors.
class FactoredBasis {
public:
  explicit FactoredBasis(const Matrix& Yt) : qr_(Yt), rows_(Yt.rows()), cols_(Yt.cols()) {}

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }

  auto reflectors() const { return qr_.householderQ(); }

  /// Q * X for X of size l x k.
  Matrix apply(const Matrix& X) const {
    Matrix out = Matrix::Zero(rows_, X.cols());
    out.topRows(cols_) = X;
    out.applyOnTheLeft(qr_.householderQ());
    return out;
  }

  /// Q^T * X for X of size n x k; returns the leading l rows.
  Matrix apply_transpose(Matrix X) const {
    X.applyOnTheLeft(qr_.householderQ().adjoint());
    return X.topRows(cols_);
  }

  Matrix explicit_q() const { return apply(Matrix::Identity(cols_, cols_)); }

private:
  Eigen::HouseholderQR<Matrix> qr_;
  Index rows_;
  Index cols_;
};

/// Operator interface used by the randomized factorization. Implementations
/// may count visits; each call is one pass over the underlying matrix.
template <class Op>
concept SketchableOperator = requires(Op& op, const Matrix& X, const FactoredBasis& Q) {
  { op.rows() } -> std::convertible_to<Index>;
  { op.cols() } -> std::convertible_to<Index>;
  { op.sketch(X) } -> std::convertible_to<Matrix>;          // X * A   (X is l x m)
  { op.multiply(X) } -> std::convertible_to<Matrix>;        // A * X   (X is n x k)
  { op.multiply_basis(Q) } -> std::convertible_to<Matrix>;  // A * Q, Q factored
};

namespace detail {

inline constexpr Index kRowBlock = 128;

// A * Q with Q factored: process A in row blocks, B_blk = (Q^T A_blk^T)^T.
template <class RowBlockFn>
Matrix multiply_factored_rows(Index m, const FactoredBasis& Q, RowBlockFn&& transposed_block) {
  Matrix B(m, Q.cols());
  for (Index r = 0; r < m; r += kRowBlock) {
    const Index b = std::min(kRowBlock, m - r);
    B.middleRows(r, b) = Q.apply_transpose(transposed_block(r, b)).transpose();
  }
  return B;
}

}  // namespace detail

/// Dense matrix adapter for SketchableOperator.
class DenseOperator {
public:
  explicit DenseOperator(const Matrix& A) : A_(A) {}

  Index rows() const { return A_.rows(); }
  Index cols() const { return A_.cols(); }
  Matrix sketch(const Matrix& X) { return X * A_; }
  Matrix multiply(const Matrix& X) { return A_ * X; }
  Matrix multiply_basis(const FactoredBasis& Q) {
    return detail::multiply_factored_rows(A_.rows(), Q, [&](Index r, Index b) -> Matrix {
      return A_.middleRows(r, b).transpose();
    });
  }
  Vector apply(const Vector& x) { return A_ * x; }
  Vector apply_transpose(const Vector& y) { return A_.transpose() * y; }

private:
  const Matrix& A_;
};

/// Standard-normal l x m test matrix, filled row by row from a seeded mt19937_64.
inline Matrix gaussian_matrix(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix omega(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) omega(i, j) = normal(rng);
  return omega;
}

namespace detail {

inline Matrix apply_basis(const Matrix& Q, const Matrix& X) { return Q * X; }
inline Matrix apply_basis(const FactoredBasis& Q, const Matrix& X) { return Q.apply(X); }

inline Index basis_cols(const Matrix& Q) { return Q.cols(); }
inline Index basis_cols(const FactoredBasis& Q) { return Q.cols(); }

inline Index numerical_rank(const Vector& lambda_desc) {
  const double top = lambda_desc.size() > 0 ? lambda_desc(0) : 0.0;
  if (!(top > 0.0)) return 0;
  Index r = 0;
  while (r < lambda_desc.size() && lambda_desc(r) > kRankTolerance * top) ++r;
  return r;
}

template <class Basis>
SvdTriple eig_to_svd_impl(const Matrix& B, const Basis& Q, Index q, SmallSvdRoute route) {
  const Index l = B.cols();
  require(basis_cols(Q) == l, "eig_to_svd: basis has " + std::to_string(basis_cols(Q)) +
                                  " columns but B has " + std::to_string(l));
  require(q >= 1 && q <= l, "eig_to_svd: need 1 <= q <= l, got q=" + std::to_string(q) +
                                " l=" + std::to_string(l));

  Vector lambda(l);
  Matrix Vt(l, l);  // right singular vectors of B, descending order
  if (route == SmallSvdRoute::EigenBtB) {
    Matrix BtB = Matrix::Zero(l, l);
    BtB.selfadjointView<Eigen::Lower>().rankUpdate(B.transpose());
    BtB.triangularView<Eigen::StrictlyUpper>() = BtB.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(BtB);
    if (eig.info() != Eigen::Success) throw Error("eig_to_svd: eigendecomposition failed");
    // ascending from the solver; reverse before truncating
    lambda = eig.eigenvalues().reverse();
    Vt = eig.eigenvectors().rowwise().reverse();
    lambda = lambda.cwiseMax(0.0);
  } else {
    Eigen::BDCSVD<Matrix> svd(B, Eigen::ComputeThinV);
    lambda = svd.singularValues().array().square().matrix();
    Vt = svd.matrixV();
  }

  const Index rank = numerical_rank(lambda);
  if (rank < q)
    throw RankDeficiencyError("randsvd: numerical rank " + std::to_string(rank) +
                                  " of the projected matrix is below the requested rank q=" +
                                  std::to_string(q),
                              rank);

  SvdTriple out;
  out.q = q;
  out.l = l;
  out.sigma = lambda.head(q).cwiseSqrt();
  const Matrix Vq = Vt.leftCols(q);
  out.V = apply_basis(Q, Vq);
  out.U = (B * Vq) * out.sigma.cwiseInverse().asDiagonal();
  return out;
}

}  // namespace detail

/// Singular triples of A ~= B Q^T from the eigendecomposition of B^T B:
/// V_q = Q Vt(:, 1:q), Sigma_q = sqrt(D(1:q)), U_q = B Vt(:, 1:q) Sigma_q^{-1}.
inline SvdTriple eig_to_svd(const Matrix& B, const Matrix& Q, Index q,
                            SmallSvdRoute route = SmallSvdRoute::EigenBtB) {
  return detail::eig_to_svd_impl(B, Q, q, route);
}

inline SvdTriple eig_to_svd(const Matrix& B, const FactoredBasis& Q, Index q,
                            SmallSvdRoute route = SmallSvdRoute::EigenBtB) {
  return detail::eig_to_svd_impl(B, Q, q, route);
}

/// Sketch size actually used: l = min(q + p, m).
inline Index sketch_size(Index q, Index p, Index m) { return std::min(q + p, m); }

/// Rank-q randomized SVD of an m x n operator, m <= n.
template <SketchableOperator Op>
SvdTriple rsvd(Op& A, const RsvdConfig& cfg) {
  const Index m = A.rows();
  const Index n = A.cols();
  detail::require(m <= n, "rsvd: expects an under-determined matrix (m <= n), got " +
                              std::to_string(m) + "x" + std::to_string(n));
  detail::require(cfg.q >= 1, "rsvd: target rank q must be >= 1");
  detail::require(cfg.p >= 0, "rsvd: oversampling p must be >= 0");
  detail::require(cfg.q <= m, "rsvd: target rank q=" + std::to_string(cfg.q) +
                                  " exceeds the row count m=" + std::to_string(m));
  const Index l = sketch_size(cfg.q, cfg.p, m);

  const Matrix omega = gaussian_matrix(l, m, cfg.seed);  // step 1
  const Matrix Yt = A.sketch(omega).transpose();         // step 2, stored as Y^T (n x l)
  const FactoredBasis Q(Yt);                             // step 3

  SvdTriple out;
  if (cfg.basis == BasisApplication::Factored) {
    const Matrix B = A.multiply_basis(Q);  // step 4
    out = detail::eig_to_svd_impl(B, Q, cfg.q, cfg.route);  // steps 5-7
  } else {
    const Matrix Qe = Q.explicit_q();
    const Matrix B = A.multiply(Qe);
    out = detail::eig_to_svd_impl(B, Qe, cfg.q, cfg.route);
  }
  out.l = l;
  out.p = l - cfg.q;
  return out;
}

inline SvdTriple rsvd(const Matrix& A, const RsvdConfig& cfg) {
  DenseOperator op(A);
  return rsvd(op, cfg);
}

/// Thin SVD of an m x n matrix (m <= n) through the m x m eigendecomposition
/// of A A^T. Returns every triple whose eigenvalue exceeds the rank tolerance.
inline SvdTriple dense_svd_underdetermined(const Matrix& A) {
  const Index m = A.rows();
  detail::require(m <= A.cols(), "dense_svd_underdetermined: expects m <= n");
  Matrix AAt = Matrix::Zero(m, m);
  AAt.selfadjointView<Eigen::Lower>().rankUpdate(A);
  AAt.triangularView<Eigen::StrictlyUpper>() = AAt.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(AAt);
  if (eig.info() != Eigen::Success)
    throw Error("dense_svd_underdetermined: eigendecomposition failed");
  const Vector lambda = eig.eigenvalues().reverse().cwiseMax(0.0);
  const Index r = detail::numerical_rank(lambda);
  detail::require(r >= 1, "dense_svd_underdetermined: matrix is numerically zero");

  SvdTriple out;
  out.q = r;
  out.l = m;
  out.p = 0;
  out.sigma = lambda.head(r).cwiseSqrt();
  out.U = eig.eigenvectors().rowwise().reverse().leftCols(r);
  out.V = (A.transpose() * out.U) * out.sigma.cwiseInverse().asDiagonal();
  return out;
}

/// Leading-order flop counts of the randomized SVD steps (a length-n dot
/// product costs 2n flops).
struct FlopEstimate {
  // Symmetric eigendecomposition with eigenvectors, ~9 l^3 (implicit QR).
  static constexpr double kEigenConstant = 9.0;

  double sketch = 0.0;          // step 2: 2lmn
  double qr = 0.0;              // step 3: 2l^2(n - l/3)
  double project = 0.0;         // step 4: 4lmn
  double gram = 0.0;            // step 5: 2l^2 m
  double eigen = 0.0;           // step 6: c l^3
  double singular_vectors = 0.0;  // step 7: lq(2l + 3m)

  double total() const { return sketch + qr + project + gram + eigen + singular_vectors; }
  double dominant() const { return sketch + project; }  // 6lmn
};

inline FlopEstimate flop_estimate(Index m, Index n, Index l, Index q) {
  detail::require(q >= 1 && q <= l && l <= m && m <= n,
                  "flop_estimate: expects 1 <= q <= l <= m <= n");
  const double M = static_cast<double>(m), N = static_cast<double>(n);
  const double L = static_cast<double>(l), Q = static_cast<double>(q);
  FlopEstimate f;
  f.sketch = 2.0 * L * M * N;
  f.qr = 2.0 * L * L * (N - L / 3.0);
  f.project = 4.0 * L * M * N;
  f.gram = 2.0 * L * L * M;
  f.eigen = FlopEstimate::kEigenConstant * L * L * L;
  f.singular_vectors = L * Q * (2.0 * L + 3.0 * M);
  return f;
}

}  // namespace gravinv
