#pragma once

// Synthetic density models, the noise model, and the two reference experiments
// (two cubes over 6000 cells; six bodies over 66000 cells and its half-scale
// variant).

#include "gravinv/forward.hpp"
#include "gravinv/irls.hpp"
#include "gravinv/mesh.hpp"
#include "gravinv/types.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace gravinv {

/// Axis-aligned box with a density contrast (g/cm^3). Several specs may share
/// a body id to build non-box shapes.
struct BodySpec {
  Box box;
  double density = 1.0;
  int body = 0;
};

namespace detail {

inline Index snap_node(double coord, double origin, double cell, Index count, const char* axis) {
  const double pos = (coord - origin) / cell;
  const double node = std::round(pos);
  if (node < 0.0 || node > static_cast<double>(count))
    throw Error(std::string("body: ") + axis + " coordinate " + std::to_string(coord) +
                " m lies outside the mesh");
  return static_cast<Index>(node);
}

}  // namespace detail

/// Half-open cell ranges [lo, hi) covered by a box after snapping its faces to
/// the nearest mesh nodes.
struct CellRange {
  Index i0, i1, j0, j1, k0, k1;
  Index count() const { return (i1 - i0) * (j1 - j0) * (k1 - k0); }
};

inline CellRange snap_box(const Mesh& mesh, const Box& b) {
  const Point3& o = mesh.origin();
  CellRange r{detail::snap_node(b.x_min, o.x, mesh.dx(), mesh.nx(), "x"),
              detail::snap_node(b.x_max, o.x, mesh.dx(), mesh.nx(), "x"),
              detail::snap_node(b.y_min, o.y, mesh.dy(), mesh.ny(), "y"),
              detail::snap_node(b.y_max, o.y, mesh.dy(), mesh.ny(), "y"),
              detail::snap_node(b.z_min, o.z, mesh.dz(), mesh.nz(), "z"),
              detail::snap_node(b.z_max, o.z, mesh.dz(), mesh.nz(), "z")};
  if (r.i1 <= r.i0 || r.j1 <= r.j0 || r.k1 <= r.k0)
    throw Error("body: box is not representable on the mesh (covers no whole cell after snapping)");
  return r;
}

/// Rasterizes bodies over a zero background; later specs overwrite earlier ones.
inline Vector model_from_bodies(const Mesh& mesh, const std::vector<BodySpec>& bodies) {
  Vector model = Vector::Zero(mesh.size());
  for (const auto& body : bodies) {
    const CellRange r = snap_box(mesh, body.box);
    for (Index i = r.i0; i < r.i1; ++i)
      for (Index j = r.j0; j < r.j1; ++j)
        for (Index k = r.k0; k < r.k1; ++k) model(mesh.linear(i, j, k)) = body.density;
  }
  return model;
}

/// Two 300 x 300 x 200 m unit-contrast cubes with tops at 50 m depth, centered
/// at 1/3 and 2/3 of the x extent on the y midline.
inline std::vector<BodySpec> two_cube_bodies(const Mesh& mesh) {
  const Box b = mesh.bounds();
  const double xe = b.x_max - b.x_min;
  const double yc = 0.5 * (b.y_min + b.y_max);
  std::vector<BodySpec> out;
  for (int c = 0; c < 2; ++c) {
    const double xc = b.x_min + xe * (c + 1) / 3.0;
    out.push_back({{xc - 150.0, xc + 150.0, yc - 150.0, yc + 150.0, 50.0, 250.0}, 1.0, c});
  }
  return out;
}

inline Vector make_two_cube_model(const Mesh& mesh) {
  const auto e = mesh.extent();
  if (e[0] < 1200.0 || e[1] < 300.0 || mesh.bounds().z_max < 250.0)
    throw Error("two-cube model: mesh too small to hold two separated 300x300x200 m cubes");
  return model_from_bodies(mesh, two_cube_bodies(mesh));
}

/// Six unit-contrast bodies defined on a 5000 x 2750 m plan; horizontal
/// coordinates scale with the mesh extent, depths are absolute (50-400 m).
inline std::vector<BodySpec> multibody_bodies(const Mesh& mesh) {
  const Box mb = mesh.bounds();
  const double sx = (mb.x_max - mb.x_min) / 5000.0;
  const double sy = (mb.y_max - mb.y_min) / 2750.0;
  auto box = [&](double x0, double x1, double y0, double y1, double z0, double z1) {
    return Box{mb.x_min + x0 * sx, mb.x_min + x1 * sx, mb.y_min + y0 * sy, mb.y_min + y1 * sy, z0, z1};
  };
  return {
      {box(500, 1000, 400, 900, 50, 200), 1.0, 0},  // shallow block
      // stepped body dipping in +x
      {box(1500, 1900, 500, 1000, 50, 150), 1.0, 1},
      {box(1700, 2100, 500, 1000, 150, 250), 1.0, 1},
      {box(1900, 2300, 500, 1000, 250, 350), 1.0, 1},
      {box(2750, 2900, 250, 2250, 50, 350), 1.0, 2},     // thin dyke
      {box(3500, 4250, 1500, 2250, 200, 400), 1.0, 3},   // deep block
      {box(750, 1050, 1750, 2050, 100, 250), 1.0, 4},    // small cube
      {box(4250, 4750, 250, 600, 50, 250), 1.0, 5},      // L-shape, foot
      {box(4250, 4400, 600, 1100, 50, 250), 1.0, 5},     // L-shape, stem
  };
}

inline Vector make_multibody_model(const Mesh& mesh) {
  if (mesh.bounds().z_max < 400.0)
    throw Error("multibody model: mesh must extend to at least 400 m depth");
  return model_from_bodies(mesh, multibody_bodies(mesh));
}

/// eta_i = a * d_i + b * ||d||  (or a * |d_i| + b * ||d|| when `absolute`).
struct NoiseSpec {
  double a = 0.02;
  double b = 0.002;
  std::uint64_t seed = 1;
  bool absolute = false;
};

struct NoisyData {
  Vector d_obs;
  Vector eta;  // standard deviations; Wd = diag(eta)^-1
};

inline Vector noise_std(const Vector& d_exact, const NoiseSpec& spec) {
  detail::require(d_exact.size() >= 1, "add_noise: empty data");
  detail::require(spec.a >= 0.0 && spec.b >= 0.0, "add_noise: a and b must be >= 0");
  detail::require(spec.a > 0.0 || spec.b > 0.0, "add_noise: a and b cannot both be zero");
  const double norm = d_exact.norm();
  Vector eta(d_exact.size());
  for (Index i = 0; i < d_exact.size(); ++i) {
    const double d = spec.absolute ? std::abs(d_exact(i)) : d_exact(i);
    eta(i) = spec.a * d + spec.b * norm;
    if (!(eta(i) > 0.0))
      throw Error("add_noise: standard deviation of datum " + std::to_string(i) + " is " +
                  std::to_string(eta(i)) +
                  " (negative data); enable the absolute-value noise variant");
  }
  return eta;
}

/// Adds zero-mean Gaussian noise with the standard deviations above.
inline NoisyData add_noise(const Vector& d_exact, const NoiseSpec& spec) {
  NoisyData out;
  out.eta = noise_std(d_exact, spec);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  out.d_obs.resize(d_exact.size());
  for (Index i = 0; i < d_exact.size(); ++i) out.d_obs(i) = d_exact(i) + out.eta(i) * normal(rng);
  return out;
}

/// A complete synthetic experiment.
struct ExperimentCase {
  std::string name;
  Mesh mesh;
  StationSet stations;
  Vector model;
  NoiseSpec noise;
  double depth_beta = 0.8;
  std::optional<double> depth_z0 = 0.0;
  InversionConfig inversion;
};

inline ExperimentCase two_cube_case() {
  ExperimentCase c;
  c.name = "two-cube";
  c.mesh = build_mesh({1500.0, 1000.0, 500.0}, {50.0, 50.0, 50.0});
  c.stations = StationSet::above_cells(c.mesh);
  c.model = make_two_cube_model(c.mesh);
  c.noise = {0.02, 0.002, 1, false};
  c.inversion.rho_min = 0.0;
  c.inversion.rho_max = 1.0;
  c.inversion.k_max = 50;
  c.inversion.alpha1_rule = Alpha1Rule::Spectral;
  return c;
}

inline ExperimentCase multibody_case(bool half_scale = false) {
  ExperimentCase c;
  c.name = half_scale ? "multibody-half" : "multibody";
  c.mesh = build_mesh({half_scale ? 2500.0 : 5000.0, 2750.0, 600.0}, {50.0, 50.0, 50.0});
  c.stations = StationSet::above_cells(c.mesh);
  c.model = make_multibody_model(c.mesh);
  c.noise = {0.02, 0.001, 1, false};
  c.inversion.rho_min = 0.0;
  c.inversion.rho_max = 1.0;
  c.inversion.k_max = 50;
  c.inversion.alpha1_rule = Alpha1Rule::Spectral;
  return c;
}

inline ExperimentCase make_case(const std::string& name) {
  if (name == "two-cube") return two_cube_case();
  if (name == "multibody") return multibody_case(false);
  if (name == "multibody-half") return multibody_case(true);
  throw Error("unknown case '" + name + "' (expected two-cube, multibody, multibody-half)");
}

/// Kernel, data and weights of a case, ready to invert.
struct PreparedCase {
  Matrix G;
  Vector d_exact;
  NoisyData data;
  Vector wz;

  /// Zero a-priori model, unit hard-constraint weights, truth attached.
  InversionProblem problem(const Vector& m_exact) const {
    InversionProblem p;
    p.G = &G;
    p.d_obs = data.d_obs;
    p.wd = data.eta.cwiseInverse();
    p.m_apr = Vector::Zero(G.cols());
    p.wh = Vector::Ones(G.cols());
    p.wz = wz;
    p.m_exact = m_exact;
    return p;
  }
};

inline PreparedCase prepare_case(const ExperimentCase& c, double beta, std::optional<double> z0,
                                 const MemoryPolicy& memory = {}) {
  PreparedCase out;
  out.G = assemble_kernel(c.mesh, c.stations, memory);
  out.d_exact = forward(out.G, c.model);
  out.data = add_noise(out.d_exact, c.noise);
  out.wz = depth_weighting(c.mesh, beta, z0 ? *z0 : 0.5 * c.mesh.dz());
  return out;
}

/// Uses the case's own depth weighting.
inline PreparedCase prepare_case(const ExperimentCase& c, const MemoryPolicy& memory = {}) {
  return prepare_case(c, c.depth_beta, c.depth_z0, memory);
}

}  // namespace gravinv
