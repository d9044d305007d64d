#include "gravinv/randsvd.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <Eigen/SVD>

using namespace gravinv;
using gravinv::testing::max_abs_off_identity;
using gravinv::testing::random_matrix;
using gravinv::testing::random_vector;
using gravinv::testing::with_spectrum;

namespace {

double reconstruction_error(const Matrix& A, const SvdTriple& t) {
  return (A - t.U * t.sigma.asDiagonal() * t.V.transpose()).norm();
}

void expect_valid_triple(const SvdTriple& t, double tol = 1e-10) {
  EXPECT_LE(max_abs_off_identity(t.U.transpose() * t.U), tol);
  EXPECT_LE(max_abs_off_identity(t.V.transpose() * t.V), tol);
  for (Index i = 0; i < t.sigma.size(); ++i) {
    EXPECT_GT(t.sigma(i), 0.0);
    if (i > 0) {
      EXPECT_LE(t.sigma(i), t.sigma(i - 1));
    }
  }
  EXPECT_LE(t.q, t.l);
}

Vector decaying(Index k, double rate) {
  Vector s(k);
  for (Index i = 0; i < k; ++i) s(i) = std::pow(rate, static_cast<double>(i));
  return s;
}

}  // namespace

TEST(Rsvd, RankOneIdentity) {
  const Vector x = random_vector(30, 1), y = random_vector(90, 2);
  const Matrix A = x * y.transpose();
  RsvdConfig cfg;
  cfg.q = 1;
  const SvdTriple t = rsvd(A, cfg);
  EXPECT_NEAR(t.sigma(0) / (x.norm() * y.norm()), 1.0, 1e-10);
  EXPECT_LE(reconstruction_error(A, t), 1e-10 * A.norm());
}

TEST(Rsvd, FullSketchMatchesDenseOracle) {
  const Matrix A = random_matrix(50, 200, 3);
  RsvdConfig cfg;
  cfg.q = 50;
  const SvdTriple t = rsvd(A, cfg);
  EXPECT_EQ(t.l, 50);
  EXPECT_EQ(t.p, 0);
  Eigen::BDCSVD<Matrix> oracle(A);
  for (Index i = 0; i < 50; ++i)
    EXPECT_NEAR(t.sigma(i) / oracle.singularValues()(i), 1.0, 1e-8) << i;
  expect_valid_triple(t);
  EXPECT_LE(reconstruction_error(A, t), 1e-10 * A.norm());
}

TEST(Rsvd, ExplicitAndFactoredBasesAgree) {
  const Matrix A = with_spectrum(40, 160, decaying(40, 0.8), 5);
  RsvdConfig cfg;
  cfg.q = 12;
  cfg.seed = 99;
  const SvdTriple f = rsvd(A, cfg);
  cfg.basis = BasisApplication::Explicit;
  const SvdTriple e = rsvd(A, cfg);
  EXPECT_LE((f.sigma - e.sigma).norm(), 1e-12 * f.sigma.norm());
  EXPECT_LE((f.U * f.sigma.asDiagonal() * f.V.transpose() - e.U * e.sigma.asDiagonal() * e.V.transpose()).norm(),
            1e-10 * A.norm());
}

TEST(Rsvd, DirectSvdRouteAgrees) {
  const Matrix A = with_spectrum(40, 160, decaying(40, 0.8), 6);
  RsvdConfig cfg;
  cfg.q = 15;
  const SvdTriple a = rsvd(A, cfg);
  cfg.route = SmallSvdRoute::DirectSvd;
  const SvdTriple b = rsvd(A, cfg);
  for (Index i = 0; i < 15; ++i) EXPECT_NEAR(a.sigma(i) / b.sigma(i), 1.0, 1e-9);
  expect_valid_triple(b);
}

TEST(Rsvd, DeterministicForSeed) {
  const Matrix A = random_matrix(30, 100, 8);
  RsvdConfig cfg;
  cfg.q = 10;
  cfg.seed = 1234;
  const SvdTriple a = rsvd(A, cfg), b = rsvd(A, cfg);
  EXPECT_EQ(a.sigma, b.sigma);
  EXPECT_EQ(a.U, b.U);
  EXPECT_EQ(a.V, b.V);
  cfg.seed = 1235;
  EXPECT_NE(rsvd(A, cfg).sigma, a.sigma);
}

TEST(Rsvd, ClampsSketchSize) {
  const Matrix A = random_matrix(20, 50, 9);
  RsvdConfig cfg;
  cfg.q = 15;
  cfg.p = 10;
  const SvdTriple t = rsvd(A, cfg);
  EXPECT_EQ(t.l, 20);
  EXPECT_EQ(t.p, 5);
  EXPECT_EQ(t.rank(), 15);
}

TEST(Rsvd, InterlacingAgainstDense) {
  const Matrix A = with_spectrum(60, 300, decaying(60, 0.9), 10);
  Eigen::BDCSVD<Matrix> oracle(A);
  for (Index q : {5, 10, 20, 40}) {
    RsvdConfig cfg;
    cfg.q = q;
    cfg.seed = static_cast<std::uint64_t>(q);
    const SvdTriple t = rsvd(A, cfg);
    expect_valid_triple(t);
    for (Index i = 0; i < q; ++i) EXPECT_LE(t.sigma(i), oracle.singularValues()(i) + 1e-10);
  }
}

TEST(Rsvd, ResidualNonIncreasingInQ) {
  const Matrix A = with_spectrum(50, 200, decaying(50, 0.85), 11);
  double prev = A.norm() * 2;
  for (Index q = 2; q <= 50; q += 4) {
    RsvdConfig cfg;
    cfg.q = q;
    cfg.seed = 42;
    const double r = reconstruction_error(A, rsvd(A, cfg));
    EXPECT_LE(r, prev * (1 + 1e-12) + 1e-12 * A.norm()) << "q=" << q;
    prev = r;
  }
}

TEST(Rsvd, RankDeficiencyNamesAchievableRank) {
  const Matrix A = with_spectrum(30, 90, decaying(4, 0.5), 12);
  RsvdConfig cfg;
  cfg.q = 8;
  try {
    rsvd(A, cfg);
    FAIL() << "expected rank deficiency";
  } catch (const RankDeficiencyError& e) {
    EXPECT_EQ(e.achievable_rank(), 4);
  }
}

TEST(Rsvd, Preconditions) {
  RsvdConfig cfg;
  cfg.q = 3;
  EXPECT_THROW(rsvd(random_matrix(10, 5, 1), cfg), Error);  // over-determined
  cfg.q = 0;
  EXPECT_THROW(rsvd(random_matrix(5, 10, 1), cfg), Error);
  cfg.q = 6;
  EXPECT_THROW(rsvd(random_matrix(5, 10, 1), cfg), Error);
  cfg.q = 2;
  cfg.p = -1;
  EXPECT_THROW(rsvd(random_matrix(5, 10, 1), cfg), Error);
}

TEST(EigToSvd, OrthogonalColumns) {
  Matrix B = Matrix::Zero(6, 3);
  B(0, 0) = 2.0;  // norms placed out of order on purpose
  B(1, 1) = 3.0;
  B(2, 2) = 1.0;
  const Matrix Q = gravinv::testing::random_orthonormal(9, 3, 13);
  const SvdTriple t = eig_to_svd(B, Q, 3);
  EXPECT_NEAR(t.sigma(0), 3.0, 1e-12);
  EXPECT_NEAR(t.sigma(1), 2.0, 1e-12);
  EXPECT_NEAR(t.sigma(2), 1.0, 1e-12);
}

TEST(EigToSvd, MatchesDirectSvdOfB) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Matrix B = random_matrix(40, 12, 100 + seed);
    const Matrix Q = gravinv::testing::random_orthonormal(70, 12, 200 + seed);
    const SvdTriple t = eig_to_svd(B, Q, 12);
    Eigen::JacobiSVD<Matrix> oracle(B, Eigen::ComputeThinU);
    for (Index i = 0; i < 12; ++i) EXPECT_NEAR(t.sigma(i) / oracle.singularValues()(i), 1.0, 1e-10);
    const Matrix overlap = (oracle.matrixU().transpose() * t.U).cwiseAbs();
    EXPECT_LE(max_abs_off_identity(overlap), 1e-8);
    // completeness at q = l: B = U Sigma Vt^T with Vt = Q^T V
    const Matrix Vt = Q.transpose() * t.V;
    EXPECT_LE((B - t.U * t.sigma.asDiagonal() * Vt.transpose()).norm(), 1e-9 * B.norm());
  }
}

TEST(EigToSvd, FactoredAndExplicitBasisAgree) {
  const Matrix Yt = random_matrix(50, 8, 14);
  const FactoredBasis F(Yt);
  const Matrix Qe = F.explicit_q();
  EXPECT_LE(max_abs_off_identity(Qe.transpose() * Qe), 1e-12);
  const Matrix B = random_matrix(20, 8, 15);
  const SvdTriple a = eig_to_svd(B, F, 5), b = eig_to_svd(B, Qe, 5);
  EXPECT_LE((a.V - b.V).norm(), 1e-12);
  const Matrix X = random_matrix(50, 3, 16);
  EXPECT_LE((F.apply_transpose(X) - Qe.transpose() * X).norm(), 1e-12 * X.norm());
}

TEST(EigToSvd, RejectsZeroLeadingEigenvalue) {
  Matrix B = Matrix::Zero(5, 3);
  B(0, 0) = 1.0;
  const Matrix Q = gravinv::testing::random_orthonormal(8, 3, 17);
  EXPECT_THROW(eig_to_svd(B, Q, 2), RankDeficiencyError);
  EXPECT_THROW(eig_to_svd(B, Q, 4), Error);
}

TEST(DenseSvd, DiagonalExtended) {
  Matrix A = Matrix::Zero(3, 7);
  A(0, 0) = 5;
  A(1, 1) = 4;
  A(2, 2) = 3;
  const SvdTriple t = dense_svd_underdetermined(A);
  ASSERT_EQ(t.rank(), 3);
  EXPECT_NEAR(t.sigma(0), 5, 1e-12);
  EXPECT_NEAR(t.sigma(1), 4, 1e-12);
  EXPECT_NEAR(t.sigma(2), 3, 1e-12);
}

TEST(DenseSvd, CompletenessAndAgreementWithRsvd) {
  const Matrix A = random_matrix(30, 80, 18);
  const SvdTriple d = dense_svd_underdetermined(A);
  expect_valid_triple(d, 1e-10);
  EXPECT_LE(reconstruction_error(A, d), 1e-9 * A.norm());
  RsvdConfig cfg;
  cfg.q = 30;
  const SvdTriple r = rsvd(A, cfg);
  for (Index i = 0; i < 30; ++i) EXPECT_NEAR(r.sigma(i) / d.sigma(i), 1.0, 1e-8);
}

TEST(FlopEstimate, CostTableEntries) {
  const FlopEstimate f = flop_estimate(600, 6000, 110, 100);
  EXPECT_EQ(f.sketch, 7.92e8);
  EXPECT_EQ(f.sketch, 2.0 * 110 * 600 * 6000);
  EXPECT_EQ(f.qr, 2.0 * 110 * 110 * (6000 - 110.0 / 3.0));
  EXPECT_EQ(f.project, 4.0 * 110 * 600 * 6000);
  EXPECT_EQ(f.gram, 2.0 * 110 * 110 * 600);
  EXPECT_EQ(f.eigen, 9.0 * 110 * 110 * 110);
  EXPECT_EQ(f.singular_vectors, 110.0 * 100 * (2 * 110 + 3 * 600));
  EXPECT_EQ(f.dominant(), 6.0 * 110 * 600 * 6000);
}

TEST(FlopEstimate, DominanceAndSubstitution) {
  const FlopEstimate full = flop_estimate(500, 20000, 500, 490);
  EXPECT_EQ(full.project, 4.0 * 500 * 500 * 20000);
  for (Index l : {10, 50, 110}) {
    const FlopEstimate f = flop_estimate(1000, 100 * l, l, l - 5);
    EXPECT_GT(f.dominant() / f.total(), 0.9);
  }
  // with m close to l the 2 l^2 n QR term competes: ratio ~ 6m / (6m + 2l)
  const FlopEstimate square = flop_estimate(110, 11000, 110, 100);
  EXPECT_LT(square.dominant() / square.total(), 0.75);
  const FlopEstimate four = flop_estimate(440, 11000, 110, 100);
  EXPECT_GT(four.dominant() / four.total(), 0.9);
  EXPECT_THROW(flop_estimate(600, 500, 110, 100), Error);
  EXPECT_THROW(flop_estimate(600, 6000, 700, 100), Error);
}
