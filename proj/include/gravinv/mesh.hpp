#pragma once

#include "gravinv/types.hpp"

#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace gravinv {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;  // positive downward
  bool operator==(const Point3&) const = default;
};

struct CellIndex {
  Index i = 0;
  Index j = 0;
  Index k = 0;
  bool operator==(const CellIndex&) const = default;
};

/// Axis-aligned box, corners in meters, z positive downward.
struct Box {
  double x_min = 0.0, x_max = 0.0;
  double y_min = 0.0, y_max = 0.0;
  double z_min = 0.0, z_max = 0.0;  // z_min is the top face

  double volume() const { return (x_max - x_min) * (y_max - y_min) * (z_max - z_min); }
};

/// Regular grid of rectangular prisms. Cells are numbered with depth fastest:
/// linear = (i * ny + j) * nz + k, where i runs along x, j along y, k along z.
class Mesh {
public:
  Mesh() = default;

  Mesh(Index nx, Index ny, Index nz, double dx, double dy, double dz, Point3 origin = {})
      : nx_(nx), ny_(ny), nz_(nz), dx_(dx), dy_(dy), dz_(dz), origin_(origin) {
    detail::require(nx >= 1 && ny >= 1 && nz >= 1, "mesh: cell counts must be >= 1");
    detail::require(dx > 0.0 && dy > 0.0 && dz > 0.0, "mesh: cell edge lengths must be > 0");
    detail::require(origin.z >= 0.0, "mesh: cell tops must lie at depth >= 0");
  }

  Index nx() const { return nx_; }
  Index ny() const { return ny_; }
  Index nz() const { return nz_; }
  double dx() const { return dx_; }
  double dy() const { return dy_; }
  double dz() const { return dz_; }
  const Point3& origin() const { return origin_; }
  Index size() const { return nx_ * ny_ * nz_; }

  std::array<double, 3> extent() const {
    return {static_cast<double>(nx_) * dx_, static_cast<double>(ny_) * dy_,
            static_cast<double>(nz_) * dz_};
  }

  Index linear(CellIndex c) const { return (c.i * ny_ + c.j) * nz_ + c.k; }
  Index linear(Index i, Index j, Index k) const { return (i * ny_ + j) * nz_ + k; }

  CellIndex cell(Index linear_index) const {
    CellIndex c;
    c.k = linear_index % nz_;
    const Index rest = linear_index / nz_;
    c.j = rest % ny_;
    c.i = rest / ny_;
    return c;
  }

  // Corner coordinate along each axis; node a of axis x is origin.x + a*dx.
  double x_node(Index a) const { return origin_.x + static_cast<double>(a) * dx_; }
  double y_node(Index b) const { return origin_.y + static_cast<double>(b) * dy_; }
  double z_node(Index c) const { return origin_.z + static_cast<double>(c) * dz_; }

  Box cell_box(CellIndex c) const {
    return {x_node(c.i), x_node(c.i + 1), y_node(c.j), y_node(c.j + 1), z_node(c.k), z_node(c.k + 1)};
  }
  Box cell_box(Index linear_index) const { return cell_box(cell(linear_index)); }

  Point3 center(CellIndex c) const {
    return {origin_.x + (static_cast<double>(c.i) + 0.5) * dx_,
            origin_.y + (static_cast<double>(c.j) + 0.5) * dy_,
            origin_.z + (static_cast<double>(c.k) + 0.5) * dz_};
  }
  Point3 center(Index linear_index) const { return center(cell(linear_index)); }

  Box bounds() const {
    return {x_node(0), x_node(nx_), y_node(0), y_node(ny_), z_node(0), z_node(nz_)};
  }

  bool operator==(const Mesh&) const = default;

private:
  Index nx_ = 1, ny_ = 1, nz_ = 1;
  double dx_ = 1.0, dy_ = 1.0, dz_ = 1.0;
  Point3 origin_{};
};

namespace detail {

inline Index cells_along(double extent, double cell, const char* axis) {
  require(extent > 0.0 && cell > 0.0,
          std::string("build_mesh: extent and cell size along ") + axis + " must be > 0");
  const double ratio = extent / cell;
  const double count = std::round(ratio);
  const double remainder = extent - count * cell;
  if (count < 1.0 || std::abs(remainder) > 1e-9 * extent) {
    throw Error(std::string("build_mesh: extent along ") + axis + " (" + std::to_string(extent) +
                " m) is not a multiple of the cell size (" + std::to_string(cell) +
                " m); remainder " + std::to_string(std::fmod(extent, cell)) + " m");
  }
  return static_cast<Index>(count);
}

}  // namespace detail

/// Builds a mesh from axis extents and cell edge lengths (meters).
inline Mesh build_mesh(const std::array<double, 3>& extent, const std::array<double, 3>& cell_size,
                       Point3 origin = {}) {
  const Index nx = detail::cells_along(extent[0], cell_size[0], "x");
  const Index ny = detail::cells_along(extent[1], cell_size[1], "y");
  const Index nz = detail::cells_along(extent[2], cell_size[2], "z");
  return Mesh(nx, ny, nz, cell_size[0], cell_size[1], cell_size[2], origin);
}

/// Observation points; z positive downward, so the surface is z = 0.
class StationSet {
public:
  StationSet() = default;
  explicit StationSet(std::vector<Point3> pts) : points_(std::move(pts)) {
    detail::require(!points_.empty(), "stations: at least one station is required");
  }

  Index size() const { return static_cast<Index>(points_.size()); }
  const Point3& operator[](Index i) const { return points_[static_cast<std::size_t>(i)]; }
  const std::vector<Point3>& points() const { return points_; }

  /// Stations on a regular horizontal grid, y fastest within each x column.
  static StationSet grid(Index nx, Index ny, double x0, double y0, double spacing_x,
                         double spacing_y, double z = 0.0) {
    std::vector<Point3> pts;
    pts.reserve(static_cast<std::size_t>(nx * ny));
    for (Index i = 0; i < nx; ++i)
      for (Index j = 0; j < ny; ++j)
        pts.push_back({x0 + static_cast<double>(i) * spacing_x,
                       y0 + static_cast<double>(j) * spacing_y, z});
    return StationSet(std::move(pts));
  }

  /// One station above every surface cell center of the mesh.
  static StationSet above_cells(const Mesh& mesh, double z = 0.0) {
    return grid(mesh.nx(), mesh.ny(), mesh.origin().x + 0.5 * mesh.dx(),
                mesh.origin().y + 0.5 * mesh.dy(), mesh.dx(), mesh.dy(), z);
  }

private:
  std::vector<Point3> points_;
};

/// Checks that no station lies below the top of the mesh. Stations on the top
/// plane itself are admitted (surface data over a mesh starting at z = 0).
inline void require_stations_above(const Mesh& mesh, const StationSet& stations) {
  const double top = mesh.origin().z;
  for (const auto& p : stations.points()) {
    if (!(p.z <= top))
      throw Error("stations: station at z=" + std::to_string(p.z) +
                  " m lies below the mesh top at z=" + std::to_string(top) + " m");
  }
}

}  // namespace gravinv
