#pragma once

#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include "grdfit/geometry.hpp"
#include "grdfit/local_systems.hpp"

namespace grdfit::testing {

/// Fresh deterministic generator; the salt keeps test cases independent of
/// execution order.
inline Rng make_rng(std::uint64_t salt = 0) { return Rng(0xfeedbeefULL + 0x9e3779b9ULL * salt); }

inline std::array<Point, 3> random_ccw_triangle(Rng& r, double lo = -2.0, double hi = 2.0,
                                                double min_area = 0.2) {
  for (;;) {
    std::array<Point, 3> v;
    for (auto& p : v) p = {r.uniform(lo, hi), r.uniform(lo, hi)};
    if (signed_area(v[0], v[1], v[2]) > min_area) return v;
  }
}

/// Edge geometry for all three edges with reflected virtual neighbors.
inline std::array<EdgeGeom, 3> hull_edge_geoms(const std::array<Point, 3>& v) {
  return {edge_geometry(v, 0, std::nullopt), edge_geometry(v, 1, std::nullopt),
          edge_geometry(v, 2, std::nullopt)};
}

/// Edge geometry against synthetic neighbor triangles (asymmetric thetas).
inline std::array<EdgeGeom, 3> skewed_edge_geoms(const std::array<Point, 3>& v, Rng& r) {
  std::array<EdgeGeom, 3> out;
  for (int i = 0; i < 3; ++i) {
    const int j = detail::CYC_J[i], k = detail::CYC_K[i];
    // mirror the apex across the edge and perturb to break symmetry
    const Point mid{0.5 * (v[j].x + v[k].x), 0.5 * (v[j].y + v[k].y)};
    const Point apex{2.0 * mid.x - v[i].x + r.uniform(-0.3, 0.3),
                     2.0 * mid.y - v[i].y + r.uniform(-0.3, 0.3)};
    // neighbor triangle (v_k, v_j, apex) is CCW from the far side
    out[i] = edge_geometry(v, i, std::array<Point, 3>{v[k], v[j], apex});
  }
  return out;
}

/// Domain location of each of the 19 ordinates (for affine-reproduction tests).
inline Point ordinate_location(const std::array<Point, 3>& v, int net_index) {
  const Point s = detail::centroid(v);
  const auto lerp3 = [](const Point& a, const Point& b) {
    return Point{(2.0 * a.x + b.x) / 3.0, (2.0 * a.y + b.y) / 3.0};
  };
  if (net_index < 3) return v[net_index];
  for (int i = 0; i < 3; ++i) {
    const int j = detail::CYC_J[i], k = detail::CYC_K[i];
    if (net_index == ord::t(i, j)) return lerp3(v[i], v[j]);
    if (net_index == ord::t(i, k)) return lerp3(v[i], v[k]);
    if (net_index == ord::i1(i)) return lerp3(v[i], s);
    if (net_index == ord::i2(i)) return lerp3(s, v[i]);
    if (net_index == ord::c(i))
      return {(v[j].x + v[k].x + s.x) / 3.0, (v[j].y + v[k].y + s.y) / 3.0};
  }
  return s;  // ord::s()
}

struct PlaneFit {
  double a, b, c;
  double operator()(const Point& p) const { return a * p.x + b * p.y + c; }
};

/// Exact local unknowns of an affine surface: vertex gradients plus the
/// directional derivative along each edge's cross line.
inline Eigen::Matrix<double, 9, 1> plane_local_d(const std::array<Point, 3>& v,
                                                 const std::array<EdgeGeom, 3>& eg,
                                                 const PlaneFit& pl) {
  Eigen::Matrix<double, 9, 1> d;
  for (int i = 0; i < 3; ++i) {
    d(2 * i) = pl.a;
    d(2 * i + 1) = pl.b;
  }
  for (int i = 0; i < 3; ++i) {
    const Point c = detail::edge_c_point(v, i);
    const double ux = (c.x - eg[i].x_star) / eg[i].eta;
    const double uy = (c.y - eg[i].y_star) / eg[i].eta;
    d(6 + i) = pl.a * ux + pl.b * uy;
  }
  return d;
}

}  // namespace grdfit::testing
