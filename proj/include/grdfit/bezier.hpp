#pragma once

#include <array>

#include "grdfit/geometry.hpp"

namespace grdfit {

/// The 19 Bézier ordinates of one macrotriangle. Layout: the three vertex
/// values first (fixed to the data), then the 16 unknown-bearing ordinates in
/// the canonical order used by the per-triangle constraint matrices:
/// [T01 T02 I01 T12 T10 I11 T20 T21 I21 C0 C1 C2 I02 I12 I22 S].
using ControlNet = std::array<double, 19>;

namespace ord {
inline constexpr int v(int i) { return i; }
inline constexpr int t(int i, int j) { return 3 + 3 * i + (j == (i + 1) % 3 ? 0 : 1); }
inline constexpr int i1(int i) { return 5 + 3 * i; }
inline constexpr int c(int k) { return 12 + k; }
inline constexpr int i2(int i) { return 15 + i; }
inline constexpr int s() { return 18; }
}  // namespace ord

/// Cubic patch over one microtriangle, multi-index order
/// [b300 b210 b201 b030 b120 b021 b003 b102 b012 b111] with barycentric
/// (alpha, beta, gamma) on (V_i, V_j, S).
struct MicroPatch {
  std::array<double, 10> c{};
};

inline MicroPatch micro_patch(const ControlNet& n, int m) {
  const int i = m, j = (m + 1) % 3, k = (m + 2) % 3;
  return {{n[ord::v(i)], n[ord::t(i, j)], n[ord::i1(i)], n[ord::v(j)], n[ord::t(j, i)],
           n[ord::i1(j)], n[ord::s()], n[ord::i2(i)], n[ord::i2(j)], n[ord::c(k)]}};
}

inline double eval_patch(const MicroPatch& p, const Bary& b) {
  const double a = b.a, be = b.b, g = b.g;
  return p.c[0] * a * a * a + 3.0 * p.c[1] * a * a * be + 3.0 * p.c[2] * a * a * g +
         p.c[3] * be * be * be + 3.0 * p.c[4] * a * be * be + 3.0 * p.c[5] * be * be * g +
         p.c[6] * g * g * g + 3.0 * p.c[7] * a * g * g + 3.0 * p.c[8] * be * g * g +
         6.0 * p.c[9] * a * be * g;
}

/// Independent evaluation oracle: repeated barycentric averaging of the
/// control tetrahedron of coefficients. Kept free of the monomial form above.
inline double eval_patch_decasteljau(const MicroPatch& p, const Bary& b) {
  // level-3 control values indexed by (i,j) with k = level - i - j
  double c3[4][4] = {};
  c3[3][0] = p.c[0];  // 300
  c3[2][1] = p.c[1];  // 210
  c3[2][0] = p.c[2];  // 201
  c3[0][3] = p.c[3];  // 030
  c3[1][2] = p.c[4];  // 120
  c3[0][2] = p.c[5];  // 021
  c3[0][0] = p.c[6];  // 003
  c3[1][0] = p.c[7];  // 102
  c3[0][1] = p.c[8];  // 012
  c3[1][1] = p.c[9];  // 111
  double cur[4][4];
  for (int r = 0; r < 4; ++r)
    for (int cgi = 0; cgi < 4; ++cgi) cur[r][cgi] = c3[r][cgi];
  for (int lvl = 3; lvl >= 1; --lvl) {
    double nxt[4][4] = {};
    for (int i = 0; i + 1 <= lvl; ++i)
      for (int j = 0; i + j + 1 <= lvl; ++j)
        nxt[i][j] = b.a * cur[i + 1][j] + b.b * cur[i][j + 1] + b.g * cur[i][j];
    for (int r = 0; r < 4; ++r)
      for (int cgi = 0; cgi < 4; ++cgi) cur[r][cgi] = nxt[r][cgi];
  }
  return cur[0][0];
}

/// d(patch)/dx at barycentric b inside the microtriangle with vertices mv.
/// Quadratic form in (alpha,beta,gamma): each bracket combines three ordinates
/// with the y-differences of the micro vertices, scaled by 3/(2A) or 6/(2A).
inline double ddx_patch(const MicroPatch& p, const std::array<Point, 3>& mv, const Bary& b) {
  const double yi = mv[0].y, yj = mv[1].y, ys = mv[2].y;
  const double twoA = 2.0 * signed_area(mv[0], mv[1], mv[2]);
  const double qaa = 3.0 * (p.c[0] * (yj - ys) + p.c[1] * (ys - yi) + p.c[2] * (yi - yj)) / twoA;
  const double qbb = 3.0 * (p.c[4] * (yj - ys) + p.c[3] * (ys - yi) + p.c[5] * (yi - yj)) / twoA;
  const double qgg = 3.0 * (p.c[7] * (yj - ys) + p.c[8] * (ys - yi) + p.c[6] * (yi - yj)) / twoA;
  const double qab = 6.0 * (p.c[1] * (yj - ys) + p.c[4] * (ys - yi) + p.c[9] * (yi - yj)) / twoA;
  const double qag = 6.0 * (p.c[2] * (yj - ys) + p.c[9] * (ys - yi) + p.c[7] * (yi - yj)) / twoA;
  const double qbg = 6.0 * (p.c[9] * (yj - ys) + p.c[5] * (ys - yi) + p.c[8] * (yi - yj)) / twoA;
  return qaa * b.a * b.a + qbb * b.b * b.b + qgg * b.g * b.g + qab * b.a * b.b +
         qag * b.a * b.g + qbg * b.b * b.g;
}

/// Directional derivative along unit (ux, uy): chain rule through the
/// barycentric gradients of the microtriangle.
inline double ddir_patch(const MicroPatch& p, const std::array<Point, 3>& mv, const Bary& b,
                         double ux, double uy) {
  const double a = b.a, be = b.b, g = b.g;
  const double dza = 3.0 * p.c[0] * a * a + 6.0 * p.c[1] * a * be + 6.0 * p.c[2] * a * g +
                     3.0 * p.c[4] * be * be + 3.0 * p.c[7] * g * g + 6.0 * p.c[9] * be * g;
  const double dzb = 3.0 * p.c[1] * a * a + 6.0 * p.c[4] * a * be + 6.0 * p.c[9] * a * g +
                     3.0 * p.c[3] * be * be + 3.0 * p.c[8] * g * g + 6.0 * p.c[5] * be * g;
  const double dzg = 3.0 * p.c[2] * a * a + 6.0 * p.c[9] * a * be + 6.0 * p.c[7] * a * g +
                     3.0 * p.c[5] * be * be + 3.0 * p.c[6] * g * g + 6.0 * p.c[8] * be * g;
  const double twoA = 2.0 * signed_area(mv[0], mv[1], mv[2]);
  const double gax = (mv[1].y - mv[2].y) / twoA, gay = (mv[2].x - mv[1].x) / twoA;
  const double gbx = (mv[2].y - mv[0].y) / twoA, gby = (mv[0].x - mv[2].x) / twoA;
  const double ggx = (mv[0].y - mv[1].y) / twoA, ggy = (mv[1].x - mv[0].x) / twoA;
  return dza * (gax * ux + gay * uy) + dzb * (gbx * ux + gby * uy) + dzg * (ggx * ux + ggy * uy);
}

namespace detail {
// lowest-index micro containing p; callers guarantee p is inside the macro
inline int containing_micro(const std::array<Point, 3>& v, const Point& p, Bary& out) {
  for (int m = 0; m < 3; ++m) {
    const auto mv = micro_vertices(v, m);
    const Bary b = barycentric(mv[0], mv[1], mv[2], p);
    if (b.min() >= -1e-10) {
      out = b;
      return m;
    }
  }
  throw OutsideConvexHull("point not inside the macrotriangle");
}
}  // namespace detail

inline double eval_net(const ControlNet& n, const std::array<Point, 3>& v, const Point& p) {
  Bary b;
  const int m = detail::containing_micro(v, p, b);
  return eval_patch(micro_patch(n, m), b);
}

inline double ddx_net(const ControlNet& n, const std::array<Point, 3>& v, const Point& p) {
  Bary b;
  const int m = detail::containing_micro(v, p, b);
  return ddx_patch(micro_patch(n, m), micro_vertices(v, m), b);
}

inline double ddir_net(const ControlNet& n, const std::array<Point, 3>& v, const Point& p,
                       double ux, double uy) {
  Bary b;
  const int m = detail::containing_micro(v, p, b);
  return ddir_patch(micro_patch(n, m), micro_vertices(v, m), b, ux, uy);
}

}  // namespace grdfit
