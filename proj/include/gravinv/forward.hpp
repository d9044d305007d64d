#pragma once

// Forward modelling: closed-form vertical gravity of rectangular prisms, dense
// sensitivity assembly, depth weighting and prediction.

#include "gravinv/mesh.hpp"
#include "gravinv/types.hpp"

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace gravinv {

/// Newton's constant, m^3 kg^-1 s^-2.
inline constexpr double kGravitationalConstant = 6.674e-11;
/// g/cm^3 to kg/m^3.
inline constexpr double kGccToSi = 1000.0;
/// m/s^2 to mGal.
inline constexpr double kSiToMgal = 1.0e5;
/// Combined factor turning the geometric prism sum into mGal per g/cm^3.
inline constexpr double kPrismScale = kGravitationalConstant * kGccToSi * kSiToMgal;

namespace detail {

// One corner term of the eight-corner sum, coordinates relative to the station.
// Zero coordinates take the limit of their term (x ln -> 0, z atan -> 0).
inline double prism_corner_term(double x, double y, double z) {
  const double r = std::sqrt(x * x + y * y + z * z);
  double t = 0.0;
  if (z != 0.0) t += z * std::atan((x * y) / (z * r));
  if (x != 0.0) t -= x * std::log(y + r);
  if (y != 0.0) t -= y * std::log(x + r);
  return t;
}

}  // namespace detail

/// Vertical gravity (mGal) at `station` due to a prism of unit density
/// contrast (1 g/cm^3). The station must not be inside the prism or below
/// its top face; stations on the plane of the top face are admitted.
inline double prism_gz(const Box& prism, const Point3& station) {
  if (!(prism.x_max > prism.x_min && prism.y_max > prism.y_min && prism.z_max > prism.z_min))
    throw Error("prism_gz: degenerate prism (non-positive edge length)");
  if (station.z > prism.z_min)
    throw Error("prism_gz: station at z=" + std::to_string(station.z) +
                " m is inside or below the prism top at z=" + std::to_string(prism.z_min) + " m");

  const double xs[2] = {prism.x_min - station.x, prism.x_max - station.x};
  const double ys[2] = {prism.y_min - station.y, prism.y_max - station.y};
  const double zs[2] = {prism.z_min - station.z, prism.z_max - station.z};

  double sum = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        // (-1)^(i+j+k) with corners numbered from 1
        const double mu = ((i + j + k) % 2 == 0) ? -1.0 : 1.0;
        sum += mu * detail::prism_corner_term(xs[i], ys[j], zs[k]);
      }
  return kPrismScale * sum;
}

/// Memory guard for dense m x n allocations.
struct MemoryPolicy {
  std::size_t cap_bytes = std::size_t{8} << 30;  // 8 GiB
  bool unlocked = false;                         // allow exceeding the cap
};

inline std::size_t dense_bytes(Index rows, Index cols) {
  return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) * sizeof(Scalar);
}

inline void check_memory(Index rows, Index cols, const MemoryPolicy& policy, const char* what) {
  const std::size_t need = dense_bytes(rows, cols);
  if (need > policy.cap_bytes && !policy.unlocked)
    throw MemoryCapError(std::string(what) + ": dense " + std::to_string(rows) + "x" +
                             std::to_string(cols) + " matrix requires " + std::to_string(need) +
                             " bytes, above the configured cap of " +
                             std::to_string(policy.cap_bytes) +
                             " bytes; unlock large allocations explicitly to proceed",
                         need);
}

/// Dense sensitivity matrix G (m x n), G(i, j) = prism_gz(cell j, station i).
///
/// For each station the corner terms are evaluated once on the (nx+1)(ny+1)(nz+1)
/// node lattice and shared between neighbouring cells; every entry is the same
/// signed eight-term sum, in the same order, that prism_gz computes.
inline Matrix assemble_kernel(const Mesh& mesh, const StationSet& stations,
                              const MemoryPolicy& policy = {}) {
  require_stations_above(mesh, stations);
  const Index m = stations.size();
  const Index n = mesh.size();
  check_memory(m, n, policy, "assemble_kernel");

  const Index nx = mesh.nx(), ny = mesh.ny(), nz = mesh.nz();
  const Index sx = nx + 1, sy = ny + 1, sz = nz + 1;
  Matrix G(m, n);
  std::vector<double> term(static_cast<std::size_t>(sx * sy * sz));
  auto at = [&](Index a, Index b, Index c) -> double& {
    return term[static_cast<std::size_t>((a * sy + b) * sz + c)];
  };

  for (Index s = 0; s < m; ++s) {
    const Point3& st = stations[s];
    for (Index a = 0; a < sx; ++a) {
      const double x = mesh.x_node(a) - st.x;
      for (Index b = 0; b < sy; ++b) {
        const double y = mesh.y_node(b) - st.y;
        for (Index c = 0; c < sz; ++c) at(a, b, c) = detail::prism_corner_term(x, y, mesh.z_node(c) - st.z);
      }
    }
    for (Index i = 0; i < nx; ++i)
      for (Index j = 0; j < ny; ++j)
        for (Index k = 0; k < nz; ++k) {
          double sum = 0.0;
          for (int di = 0; di < 2; ++di)
            for (int dj = 0; dj < 2; ++dj)
              for (int dk = 0; dk < 2; ++dk) {
                const double mu = ((di + dj + dk) % 2 == 0) ? -1.0 : 1.0;
                sum += mu * at(i + di, j + dj, k + dk);
              }
          G(s, mesh.linear(i, j, k)) = kPrismScale * sum;
        }
  }
  return G;
}

/// Depth weighting entries (z_center + z0)^(-beta), one per cell.
inline Vector depth_weighting(const Mesh& mesh, double beta, double z0) {
  detail::require(beta > 0.0, "depth_weighting: beta must be > 0");
  detail::require(z0 >= 0.0, "depth_weighting: z0 must be >= 0");
  Vector w(mesh.size());
  for (Index c = 0; c < mesh.size(); ++c) {
    const double depth = mesh.center(c).z + z0;
    if (!(depth > 0.0))
      throw Error("depth_weighting: cell " + std::to_string(c) + " has z_center + z0 = 0");
    w(c) = std::pow(depth, -beta);
  }
  return w;
}

/// Predicted data d = G m.
inline Vector forward(const Matrix& G, const Vector& model) {
  if (G.cols() != model.size())
    throw Error("forward: model has " + std::to_string(model.size()) + " entries, kernel has " +
                std::to_string(G.cols()) + " columns");
  return G * model;
}

}  // namespace gravinv
