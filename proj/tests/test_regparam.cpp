#include "gravinv/regparam.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace gravinv;
using gravinv::testing::fine_grid_argmin;
using gravinv::testing::random_input;
using gravinv::testing::upre_oracle;

TEST(UpreValue, HandEvaluation) {
  const UpreInput in{Vector::Constant(1, 1.0), Vector::Constant(1, 2.0)};
  EXPECT_DOUBLE_EQ(upre_value(1.0, in), 1.0);
  EXPECT_THROW(upre_value(0.0, in), Error);
  EXPECT_THROW(upre_value(-1.0, in), Error);
}

TEST(UpreValue, MatchesOracleOnRandomInputs) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const UpreInput in = random_input(30, seed);
    for (double a : {1e-5, 1e-3, 0.1, 1.0, 17.0, 300.0}) {
      const double ref = upre_oracle(a, in.sigma, in.beta);
      EXPECT_NEAR(upre_value(a, in), ref, 1e-10 * std::max(1.0, std::abs(ref)));
    }
  }
}

TEST(UpreValue, Limits) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const UpreInput in = random_input(25, seed + 100);
    const double q = static_cast<double>(in.size());
    EXPECT_NEAR(upre_value(1e8 * in.sigma(0), in), in.beta.squaredNorm() - q, 1e-8);
    EXPECT_NEAR(upre_value(1e-8 * in.sigma.minCoeff(), in), q, 1e-8);
  }
}

TEST(MinimizeUpre, ZeroCoefficientsPickLargestAlpha) {
  UpreInput in = random_input(15, 3);
  in.beta.setZero();
  const UpreMinimum r = minimize_upre(in);
  EXPECT_EQ(r.grid_index, 99);
  EXPECT_TRUE(r.at_boundary);
  EXPECT_DOUBLE_EQ(r.alpha, in.sigma.maxCoeff());
}

TEST(MinimizeUpre, MatchesFineGridWithinOneCoarseCell) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const UpreInput in = random_input(20, 1000 + seed);
    const UpreMinimum r = minimize_upre(in);
    const double cell = std::log(in.sigma(0) / in.sigma(19)) / 99.0;
    const double fine = fine_grid_argmin(in, 1000000);
    EXPECT_LE(std::abs(std::log(r.alpha) - std::log(fine)), cell * (1 + 1e-9)) << "seed " << seed;
    EXPECT_LE(r.value, upre_oracle(r.grid_alpha[static_cast<std::size_t>(r.grid_index)], in.sigma, in.beta));
  }
}

TEST(MinimizeUpre, GridShapeAndBoundaryFlag) {
  const UpreInput in = random_input(10, 5);
  AlphaSearch s;
  s.grid_size = 37;
  s.refine_tolerance = 0.0;
  const UpreMinimum r = minimize_upre(in, s);
  ASSERT_EQ(r.grid_alpha.size(), 37u);
  EXPECT_DOUBLE_EQ(r.grid_alpha.front(), in.sigma.minCoeff());
  EXPECT_DOUBLE_EQ(r.grid_alpha.back(), in.sigma.maxCoeff());
  EXPECT_EQ(r.alpha, r.grid_alpha[static_cast<std::size_t>(r.grid_index)]);
  EXPECT_EQ(r.at_boundary, r.grid_index == 0 || r.grid_index == 36);
  s.grid_size = 1;
  EXPECT_THROW(minimize_upre(in, s), Error);
}

TEST(MinimizeUpre, DegenerateReturnsLargestWithFlag) {
  const UpreInput in{Vector::Constant(3, 2.0), Vector::Zero(3)};
  const UpreMinimum r = minimize_upre(in);
  EXPECT_TRUE(r.degenerate);
  EXPECT_TRUE(r.at_boundary);
  EXPECT_DOUBLE_EQ(r.alpha, 2.0);
}

TEST(MinimizeUpre, RefinementNeverWorsens) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const UpreInput in = random_input(20, 50 + seed);
    AlphaSearch coarse;
    coarse.refine_tolerance = 0.0;
    EXPECT_LE(minimize_upre(in).value, minimize_upre(in, coarse).value);
  }
}

TEST(MinimizeUpre, ScaleEquivariance) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const UpreInput in = random_input(20, 300 + seed);
    const double c = 37.5;
    const UpreInput scaled{in.sigma * c, in.beta};
    const UpreMinimum a = minimize_upre(in), b = minimize_upre(scaled);
    EXPECT_EQ(a.grid_index, b.grid_index);
    EXPECT_NEAR(b.alpha / (c * a.alpha), 1.0, 2e-3);
  }
}

TEST(MinimizeUpre, RejectsInvalidInput) {
  EXPECT_THROW(minimize_upre({Vector::Constant(2, 1.0), Vector::Zero(3)}), Error);
  Vector s(3);
  s << 1.0, 2.0, 0.5;
  EXPECT_THROW(minimize_upre({s, Vector::Zero(3)}), Error);
  s << 2.0, 1.0, 0.0;
  EXPECT_THROW(minimize_upre({s, Vector::Zero(3)}), Error);
}

TEST(InitialAlpha, Rule) {
  Vector s(3);
  s << 100.0, 10.0, 1.0;
  EXPECT_DOUBLE_EQ(initial_alpha(s), 5000.0);
  for (double c : {1.0, 2.0, 50.0}) EXPECT_GE(initial_alpha(s, c), s(0));
  EXPECT_THROW(initial_alpha(Vector()), Error);
  EXPECT_THROW(initial_alpha(s, 0.0), Error);
}

TEST(InitialAlpha, SpectralRule) {
  Vector s(4);
  s << 8.0, 4.0, 2.0, 2.0;  // mean 4
  EXPECT_DOUBLE_EQ(initial_alpha_spectral(s, 100, 10, 1.0), 10.0 * 2.0);
  EXPECT_NEAR(initial_alpha_spectral(s, 6000, 600, 3.5), std::pow(10.0, 3.5) * 2.0, 1e-9);
  // more trailing values lower the mean and raise alpha
  Vector longer(6);
  longer << 8.0, 4.0, 2.0, 2.0, 1.0, 1.0;
  EXPECT_GT(initial_alpha_spectral(longer, 100, 10), initial_alpha_spectral(s, 100, 10));
}

TEST(TruncatedUpre, FullTruncationIsNoOp) {
  const UpreInput in = random_input(20, 7);
  const UpreMinimum a = truncated_upre(in, 20), b = minimize_upre(in);
  EXPECT_EQ(a.alpha, b.alpha);
  EXPECT_THROW(truncated_upre(in, 0), Error);
  EXPECT_THROW(truncated_upre(in, 21), Error);
}

TEST(TruncatedUpre, TinyAppendedValueIsIgnored) {
  Vector s(20), b(20);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> N;
  for (Index i = 0; i < 20; ++i) {
    s(i) = std::pow(10.0, -2.0 * static_cast<double>(i) / 19.0);
    b(i) = 5.0 * s(i) + 0.05 * N(rng);
  }
  const UpreInput clean{s, b};
  Vector s2(21), b2(21);
  s2 << s, 1e-12 * s(0);
  b2 << b, 0.05;
  const UpreInput polluted{s2, b2};

  const Index trunc = tupre_truncation_index(s2);
  EXPECT_EQ(trunc, 20);
  const UpreMinimum ref = minimize_upre(clean);
  const UpreMinimum untrunc = minimize_upre(polluted);
  const UpreMinimum tr = truncated_upre(polluted, trunc);
  const double cell = std::log(s(0) / s(19)) / 99.0;
  EXPECT_LE(std::abs(std::log(tr.alpha / ref.alpha)), cell);
  // the tiny value stretches the untruncated grid over twelve decades
  EXPECT_DOUBLE_EQ(untrunc.grid_alpha.front(), s2(20));
  EXPECT_DOUBLE_EQ(tr.grid_alpha.front(), s(19));
}

TEST(TruncatedUpre, TruncationIndexRule) {
  Vector s(5);
  s << 1.0, 0.5, 2e-3, 1e-3, 5e-4;
  EXPECT_EQ(tupre_truncation_index(s), 4);  // values >= 1e-3 * s_1 are kept
  EXPECT_EQ(tupre_truncation_index(s, 0.1), 2);
  EXPECT_EQ(tupre_truncation_index(s, 0.0), 5);
  EXPECT_EQ(tupre_truncation_index(s, 10.0), 1);
}

TEST(TruncatedUpre, ConvergedIndexIsLeadingRun) {
  Vector r(6);
  r << 0.0, 1e-9, 5e-3, 0.3, 1e-4, 0.2;
  EXPECT_EQ(tupre_converged_index(r), 3);  // stops at the first unconverged value
  EXPECT_EQ(tupre_converged_index(r, 0.5), 6);
  EXPECT_EQ(tupre_converged_index(Vector::Constant(3, 1.0)), 1);  // never below one term
  EXPECT_THROW(tupre_converged_index(r, -1.0), Error);
  EXPECT_THROW(tupre_converged_index(Vector()), Error);
}
