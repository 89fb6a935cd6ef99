#pragma once

#include <array>

#include "grdfit/bezier.hpp"
#include "grdfit/geometry.hpp"

namespace grdfit {

/// Per-triangle pieces of the global program, all over the 16-vector of
/// unknown-bearing ordinates (net indices 3..18) and the local unknown order
/// d = [dx_V0 dy_V0 dx_V1 dy_V1 dx_V2 dy_V2 de_E0 de_E1 de_E2]:
///   c = R d + f          (C1 structure; vertex ordinates are the data)
///   G c <= h             (axial-monotonicity sufficient conditions)
///   curvature = c'Uc + w'c + constant
struct LocalSystem {
  Eigen::Matrix<double, 16, 9> R;
  Eigen::Matrix<double, 16, 1> f;
  Eigen::Matrix<double, 10, 16> G;
  Eigen::Matrix<double, 10, 1> h;
  Eigen::Matrix<double, 16, 16> U;
  Eigen::Matrix<double, 16, 1> w;
  double constant = 0.0;
};

namespace detail {

struct TriFrame {
  std::array<Point, 3> v;
  Point s;
  std::array<EdgeGeom, 3> eg;
  // theta[a][b]: split ratio associated with vertex pair (a,b) of an edge;
  // theta[a][b] weights the trisection ordinate adjacent to b
  double theta[3][3] = {};

  TriFrame(const std::array<Point, 3>& v_, const std::array<EdgeGeom, 3>& eg_) : v(v_), eg(eg_) {
    s = centroid(v);
    for (int i = 0; i < 3; ++i) {
      const int j = CYC_J[i], k = CYC_K[i];
      theta[k][j] = eg[i].theta_kj;
      theta[j][k] = eg[i].theta_jk;
    }
  }

  Point t(int i, int j) const {
    return {(2.0 * v[i].x + v[j].x) / 3.0, (2.0 * v[i].y + v[j].y) / 3.0};
  }
  Point i1(int i) const { return {(2.0 * v[i].x + s.x) / 3.0, (2.0 * v[i].y + s.y) / 3.0}; }
};

}  // namespace detail

inline void build_Rf(const std::array<Point, 3>& v, const std::array<EdgeGeom, 3>& eg,
                     const std::array<double, 3>& z, Eigen::Matrix<double, 16, 9>& R,
                     Eigen::Matrix<double, 16, 1>& f) {
  using detail::CYC_J;
  using detail::CYC_K;
  detail::TriFrame tf(v, eg);
  R.setZero();
  f.setZero();
  const auto row = [&](int r) { return r - 3; };  // net index -> 16-vector row

  // vertex-plane rows: ordinate = value + gradient dotted with the offset
  const auto set_plane_row = [&](int r, const Point& p, int i) {
    R(row(r), 2 * i) = p.x - v[i].x;
    R(row(r), 2 * i + 1) = p.y - v[i].y;
    f(row(r)) = z[i];
  };
  for (int i = 0; i < 3; ++i) {
    const int j = CYC_J[i], k = CYC_K[i];
    set_plane_row(ord::t(i, j), tf.t(i, j), i);
    set_plane_row(ord::t(i, k), tf.t(i, k), i);
    set_plane_row(ord::i1(i), tf.i1(i), i);
  }

  // mid-edge ordinates: linear blend of the two trisection ordinates at the
  // crossing point plus the cross-boundary derivative times its lever arm
  for (int i = 0; i < 3; ++i) {
    const int j = CYC_J[i], k = CYC_K[i];
    const int r = row(ord::c(i));
    const double tkj = tf.theta[k][j], tjk = tf.theta[j][k];
    R(r, 2 * j) = tkj * (tf.t(j, k).x - v[j].x);
    R(r, 2 * j + 1) = tkj * (tf.t(j, k).y - v[j].y);
    R(r, 2 * k) = tjk * (tf.t(k, j).x - v[k].x);
    R(r, 2 * k + 1) = tjk * (tf.t(k, j).y - v[k].y);
    R(r, 6 + i) = eg[i].eta;
    f(r) = tkj * z[j] + tjk * z[k];
  }

  // inner ring and center
  for (int i = 0; i < 3; ++i) {
    const int j = CYC_J[i], k = CYC_K[i];
    const int r = row(ord::i2(i));
    const double xsj = eg[j].x_star, ysj = eg[j].y_star;
    const double xsk = eg[k].x_star, ysk = eg[k].y_star;
    R(r, 2 * i) = ((tf.i1(i).x - v[i].x) + (tf.t(k, i).x - xsj) + (tf.t(j, i).x - xsk)) / 3.0;
    R(r, 2 * i + 1) = ((tf.i1(i).y - v[i].y) + (tf.t(k, i).y - ysj) + (tf.t(j, i).y - ysk)) / 3.0;
    R(r, 2 * j) = (tf.t(i, j).x - xsk) / 3.0;
    R(r, 2 * j + 1) = (tf.t(i, j).y - ysk) / 3.0;
    R(r, 6 + k) = eg[k].eta / 3.0;
    R(r, 2 * k) = (tf.t(i, k).x - xsj) / 3.0;
    R(r, 2 * k + 1) = (tf.t(i, k).y - ysj) / 3.0;
    R(r, 6 + j) = eg[j].eta / 3.0;
    f(r) = (z[i] + (tf.theta[k][i] * z[i] + tf.theta[i][k] * z[k]) +
            (tf.theta[i][j] * z[j] + tf.theta[j][i] * z[i])) /
           3.0;
  }
  {
    const int r = row(ord::s());
    for (int i = 0; i < 3; ++i) {
      const int j = CYC_J[i], k = CYC_K[i];
      const double xsj = eg[j].x_star, ysj = eg[j].y_star;
      const double xsk = eg[k].x_star, ysk = eg[k].y_star;
      R(r, 2 * i) =
          ((tf.i1(i).x - v[i].x) + 2.0 * (tf.t(k, i).x - xsj) + 2.0 * (tf.t(j, i).x - xsk)) / 9.0;
      R(r, 2 * i + 1) =
          ((tf.i1(i).y - v[i].y) + 2.0 * (tf.t(k, i).y - ysj) + 2.0 * (tf.t(j, i).y - ysk)) / 9.0;
      R(r, 6 + i) = 2.0 * eg[i].eta / 9.0;
      f(r) += (1.0 + 2.0 * tf.theta[j][i] + 2.0 * tf.theta[k][i]) * z[i] / 9.0;
    }
  }
}

/// Monotonicity rows, ordered: three vertex-fan rows (hard), three inner-ring
/// rows (slack-bearing), one center row (hard), three mid-edge rows
/// (slack-bearing). h is nonzero only on the first three.
inline void build_Gh(const std::array<Point, 3>& v, const std::array<double, 3>& z,
                     Eigen::Matrix<double, 10, 16>& G, Eigen::Matrix<double, 10, 1>& h) {
  using detail::CYC_J;
  using detail::CYC_K;
  G.setZero();
  h.setZero();
  const Point s = detail::centroid(v);
  const auto col = [&](int r) { return r - 3; };
  for (int i = 0; i < 3; ++i) {
    const int j = CYC_J[i], k = CYC_K[i];
    G(i, col(ord::t(i, j))) = v[i].y - v[k].y;
    G(i, col(ord::t(i, k))) = v[j].y - v[i].y;
    h(i) = (v[j].y - v[k].y) * z[i];
  }
  for (int i = 0; i < 3; ++i) {
    const int j = CYC_J[i], k = CYC_K[i];
    G(3 + i, col(ord::i1(i))) = v[k].y - v[j].y;
    G(3 + i, col(ord::c(k))) = v[i].y - v[k].y;
    G(3 + i, col(ord::c(j))) = v[j].y - v[i].y;
  }
  G(6, col(ord::i2(0))) = v[2].y - v[1].y;
  G(6, col(ord::i2(1))) = v[0].y - v[2].y;
  G(6, col(ord::i2(2))) = v[1].y - v[0].y;
  for (int i = 0; i < 3; ++i) {
    const int j = CYC_J[i], k = CYC_K[i];
    G(7 + i, col(ord::t(i, j))) = s.y - v[j].y;
    G(7 + i, col(ord::t(j, i))) = v[i].y - s.y;
    G(7 + i, col(ord::c(k))) = v[j].y - v[i].y;
  }
}

/// Edge-curvature quadratic: second-derivative integrals of the boundary
/// Bézier curves, outer edges at half weight (each is shared by two
/// triangles), the three spokes to the center at full weight.
inline void build_Uw(const std::array<Point, 3>& v, const std::array<double, 3>& z,
                     Eigen::Matrix<double, 16, 16>& U, Eigen::Matrix<double, 16, 1>& w,
                     double& constant) {
  using detail::CYC_J;
  using detail::CYC_K;
  U.setZero();
  w.setZero();
  constant = 0.0;
  const Point s = detail::centroid(v);
  const auto col = [&](int r) { return r - 3; };
  for (int i = 0; i < 3; ++i) {
    const int j = CYC_J[i], k = CYC_K[i];
    const double len = std::hypot(v[j].x - v[k].x, v[j].y - v[k].y);
    const double L3 = len * len * len;
    const int a = col(ord::t(j, k)), b = col(ord::t(k, j));
    U(a, a) += 18.0 / L3;
    U(b, b) += 18.0 / L3;
    U(a, b) += -9.0 / L3;
    U(b, a) += -9.0 / L3;
    w(a) += -18.0 * z[j] / L3;
    w(b) += -18.0 * z[k] / L3;
    constant += 6.0 * (z[j] * z[j] + z[k] * z[k] + z[j] * z[k]) / L3;
  }
  for (int i = 0; i < 3; ++i) {
    const double len = std::hypot(s.x - v[i].x, s.y - v[i].y);
    const double L3 = len * len * len;
    const int a = col(ord::i1(i)), b = col(ord::i2(i)), sc = col(ord::s());
    U(a, a) += 36.0 / L3;
    U(b, b) += 36.0 / L3;
    U(sc, sc) += 12.0 / L3;
    U(a, b) += -18.0 / L3;
    U(b, a) += -18.0 / L3;
    U(b, sc) += -18.0 / L3;
    U(sc, b) += -18.0 / L3;
    w(a) += -36.0 * z[i] / L3;
    w(sc) += 12.0 * z[i] / L3;
    constant += 12.0 * z[i] * z[i] / L3;
  }
}

/// Slack scatter blocks: rows 4-6 and 8-10 of the monotonicity system carry
/// one slack each; the vertex-fan and center rows stay hard.
inline void build_robust_blocks(Eigen::Matrix<double, 10, 6>& J1, Eigen::Matrix<double, 6, 6>& J2) {
  J1.setZero();
  J1.block<3, 3>(3, 0) = Eigen::Matrix3d::Identity();
  J1.block<3, 3>(7, 3) = Eigen::Matrix3d::Identity();
  J2 = Eigen::Matrix<double, 6, 6>::Identity();
}

inline LocalSystem build_local_system(const std::array<Point, 3>& v,
                                      const std::array<EdgeGeom, 3>& eg,
                                      const std::array<double, 3>& z) {
  LocalSystem ls;
  build_Rf(v, eg, z, ls.R, ls.f);
  build_Gh(v, z, ls.G, ls.h);
  build_Uw(v, z, ls.U, ls.w, ls.constant);
  return ls;
}

}  // namespace grdfit
