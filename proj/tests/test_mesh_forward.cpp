#include "gravinv/forward.hpp"
#include "gravinv/mesh.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace gravinv;
using gravinv::testing::point_mass_gz;

TEST(BuildMesh, CellCounts) {
  EXPECT_EQ(build_mesh({1500, 1000, 300}, {50, 50, 50}).size(), 3600);
  const Mesh big = build_mesh({5000, 2750, 600}, {50, 50, 50});
  EXPECT_EQ(big.nx(), 100);
  EXPECT_EQ(big.ny(), 55);
  EXPECT_EQ(big.nz(), 12);
  EXPECT_EQ(big.size(), 66000);
  const Mesh one = build_mesh({7, 7, 7}, {7, 7, 7});
  EXPECT_EQ(one.size(), 1);
  EXPECT_EQ(one.linear(one.cell(0)), 0);
}

TEST(BuildMesh, RejectsNonMultipleWithRemainder) {
  try {
    build_mesh({1520, 1000, 300}, {50, 50, 50});
    FAIL() << "expected rejection";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("remainder 20"), std::string::npos) << e.what();
  }
  EXPECT_THROW(build_mesh({0, 1000, 300}, {50, 50, 50}), Error);
  EXPECT_THROW(build_mesh({100, 100, 100}, {-50, 50, 50}), Error);
}

TEST(Mesh, IndexBijectionDepthFastest) {
  const Mesh mesh(4, 3, 5, 10, 20, 30);
  for (Index c = 0; c < mesh.size(); ++c) EXPECT_EQ(mesh.linear(mesh.cell(c)), c);
  EXPECT_EQ(mesh.linear(0, 0, 1), 1);
  EXPECT_EQ(mesh.linear(0, 1, 0), 5);
  EXPECT_EQ(mesh.linear(1, 0, 0), 15);
  const Point3 c = mesh.center(CellIndex{1, 2, 3});
  EXPECT_DOUBLE_EQ(c.x, 15.0);
  EXPECT_DOUBLE_EQ(c.y, 50.0);
  EXPECT_DOUBLE_EQ(c.z, 105.0);
}

TEST(Mesh, RejectsCellsAboveSurface) { EXPECT_THROW(Mesh(1, 1, 1, 1, 1, 1, {0, 0, -5}), Error); }

TEST(PrismGz, RejectsDegenerateAndInterior) {
  EXPECT_THROW(prism_gz({0, 0, 0, 10, 0, 10}, {0, 0, -1}), Error);
  EXPECT_THROW(prism_gz({0, 10, 0, 10, 5, 5}, {0, 0, -1}), Error);
  EXPECT_THROW(prism_gz({0, 10, 0, 10, 0, 10}, {5, 5, 5}), Error);
  EXPECT_THROW(prism_gz({0, 10, 0, 10, 0, 10}, {50, 50, 3}), Error);
}

TEST(PrismGz, CubeAgainstPointMassQuadrature) {
  const Box cube{-150, 150, -150, 150, 50, 250};
  const double closed = prism_gz(cube, {0, 0, 0});
  const double oracle = point_mass_gz(cube, {0, 0, 0}, 100);  // 10^6 point masses
  EXPECT_GT(closed, 0.0);
  EXPECT_NEAR(closed / oracle, 1.0, 5e-3);
}

TEST(PrismGz, RandomizedQuadratureAgreement) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double x0 = -200 + 400 * U(rng), y0 = -200 + 400 * U(rng), z0 = 20 + 200 * U(rng);
    const Box b{x0, x0 + 20 + 200 * U(rng), y0, y0 + 20 + 200 * U(rng), z0, z0 + 20 + 200 * U(rng)};
    const Point3 s{-100 + 200 * U(rng), -100 + 200 * U(rng), 0.0};
    const double closed = prism_gz(b, s);
    const double oracle = point_mass_gz(b, s, 100);
    EXPECT_NEAR(closed / oracle, 1.0, 5e-3) << "trial " << trial;
  }
}

TEST(PrismGz, MirrorSymmetry) {
  const Box cube{-100, 100, -100, 100, 40, 240};
  const double a = prism_gz(cube, {130, 70, 0});
  EXPECT_NEAR(prism_gz(cube, {-130, 70, 0}) / a, 1.0, 1e-12);
  EXPECT_NEAR(prism_gz(cube, {130, -70, 0}) / a, 1.0, 1e-12);
  EXPECT_NEAR(prism_gz(cube, {70, 130, 0}) / a, 1.0, 1e-12);
}

TEST(PrismGz, StationOnTopPlaneIsFinite) {
  const Box cell{0, 50, 0, 50, 0, 50};
  const double v = prism_gz(cell, {25, 25, 0});
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_GT(v, 0.0);
  EXPECT_TRUE(std::isfinite(prism_gz(cell, {0, 0, 0})));
}

TEST(AssembleKernel, ShapeAndSingleEntry) {
  const Mesh mesh = build_mesh({1500, 1000, 500}, {50, 50, 50});
  const StationSet st = StationSet::above_cells(mesh);
  EXPECT_EQ(st.size(), 600);
  const Matrix G = assemble_kernel(mesh, st);
  EXPECT_EQ(G.rows(), 600);
  EXPECT_EQ(G.cols(), 6000);
  EXPECT_TRUE(G.allFinite());
  EXPECT_GT(G.minCoeff(), 0.0);

  const Mesh one(1, 1, 1, 30, 40, 50, {10, 20, 5});
  const StationSet s1(std::vector<Point3>{{3, 4, 0}});
  const Matrix G1 = assemble_kernel(one, s1);
  ASSERT_EQ(G1.size(), 1);
  EXPECT_EQ(G1(0, 0), prism_gz(one.cell_box(0), s1[0]));
}

TEST(AssembleKernel, MatchesPrismGzBitwise) {
  const Mesh mesh(5, 4, 3, 40, 50, 30, {-10, 7, 0});
  const StationSet st = StationSet::grid(3, 3, -20, 0, 70, 60, -5);
  const Matrix G = assemble_kernel(mesh, st);
  for (Index s = 0; s < st.size(); ++s)
    for (Index c = 0; c < mesh.size(); ++c) EXPECT_EQ(G(s, c), prism_gz(mesh.cell_box(c), st[s]));
}

TEST(AssembleKernel, Linearity) {
  const Mesh mesh(6, 5, 4, 50, 50, 50);
  const Matrix G = assemble_kernel(mesh, StationSet::above_cells(mesh));
  const Vector m1 = gravinv::testing::random_vector(mesh.size(), 1), m2 = gravinv::testing::random_vector(mesh.size(), 2);
  const Vector lhs = forward(G, m1 + m2), rhs = forward(G, m1) + forward(G, m2);
  EXPECT_LE((lhs - rhs).norm(), 1e-12 * lhs.norm());
}

TEST(AssembleKernel, TranslationInvariance) {
  const Mesh a(6, 5, 4, 50, 50, 50);
  const Mesh b(6, 5, 4, 50, 50, 50, {1234.0, -987.0, 0.0});
  const StationSet sa = StationSet::above_cells(a), sb = StationSet::above_cells(b);
  const Matrix Ga = assemble_kernel(a, sa), Gb = assemble_kernel(b, sb);
  EXPECT_LE((Ga - Gb).norm(), 1e-12 * Ga.norm());
}

TEST(AssembleKernel, DecaysWithHorizontalDistance) {
  const Mesh mesh(1, 1, 1, 50, 50, 50, {0, 0, 100});
  std::vector<Point3> pts;
  for (int i = 1; i <= 30; ++i) pts.push_back({25.0 + 50.0 * i, 25.0, 0.0});
  const Matrix G = assemble_kernel(mesh, StationSet(pts));
  for (Index s = 1; s < G.rows(); ++s) EXPECT_LT(G(s, 0), G(s - 1, 0));
}

TEST(AssembleKernel, RejectsStationsBelowTopAndMemoryCap) {
  const Mesh mesh(2, 2, 2, 10, 10, 10, {0, 0, 10});
  EXPECT_THROW(assemble_kernel(mesh, StationSet(std::vector<Point3>{{5, 5, 15}})), Error);
  const Mesh big(100, 100, 10, 1, 1, 1);
  MemoryPolicy tight{1024, false};
  try {
    assemble_kernel(big, StationSet::above_cells(big), tight);
    FAIL() << "expected memory cap rejection";
  } catch (const MemoryCapError& e) {
    EXPECT_EQ(e.required_bytes(), std::size_t{10000} * 100000 * 8);
    EXPECT_NE(std::string(e.what()).find("800000000"), std::string::npos);
  }
}

TEST(DepthWeighting, Properties) {
  const Mesh mesh(2, 2, 6, 50, 50, 50);
  const Vector w = depth_weighting(mesh, 0.8, 25.0);
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j)
      for (Index k = 0; k < 6; ++k) {
        EXPECT_GT(w(mesh.linear(i, j, k)), 0.0);
        EXPECT_EQ(w(mesh.linear(i, j, k)), w(mesh.linear(0, 0, k)));
        if (k > 0) {
          EXPECT_LT(w(mesh.linear(i, j, k)), w(mesh.linear(i, j, k - 1)));
        }
      }
  const Vector w0 = depth_weighting(mesh, 0.8, 0.0);
  // centers at 75 m (k=1) and 275 m (k=5)
  EXPECT_NEAR(w0(mesh.linear(0, 0, 1)) / w0(mesh.linear(0, 0, 5)), 2.8275946049147893, 1e-13);
  EXPECT_THROW(depth_weighting(mesh, 0.0, 1.0), Error);
  EXPECT_THROW(depth_weighting(mesh, 0.8, -1.0), Error);
}

TEST(Forward, ZeroBasisAndMismatch) {
  const Mesh mesh(4, 3, 2, 50, 50, 50);
  const Matrix G = assemble_kernel(mesh, StationSet::above_cells(mesh));
  EXPECT_EQ(forward(G, Vector::Zero(mesh.size())).norm(), 0.0);
  Vector e = Vector::Zero(mesh.size());
  e(7) = 1.0;
  EXPECT_EQ((forward(G, e) - G.col(7)).norm(), 0.0);
  EXPECT_THROW(forward(G, Vector::Zero(3)), Error);
}
