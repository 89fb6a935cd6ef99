#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "grdfit/common.hpp"

namespace grdfit {

struct Site {
  double x = 0.0, y = 0.0;
  int id = -1;
};

struct Point {
  double x = 0.0, y = 0.0;
};

inline double signed_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

struct Bary {
  double a = 0.0, b = 0.0, g = 0.0;
  double min() const { return std::min(a, std::min(b, g)); }
};

/// Signed-area-ratio coordinates of p in (v0,v1,v2). Differences are taken
/// from p so that a query at a vertex yields an exact (1,0,0) permutation.
inline Bary barycentric(const Point& v0, const Point& v1, const Point& v2, const Point& p,
                        double degenerate_tol = 0.0) {
  const double a0 = (v1.x - p.x) * (v2.y - p.y) - (v2.x - p.x) * (v1.y - p.y);
  const double a1 = (v2.x - p.x) * (v0.y - p.y) - (v0.x - p.x) * (v2.y - p.y);
  const double a2 = (v0.x - p.x) * (v1.y - p.y) - (v1.x - p.x) * (v0.y - p.y);
  const double den = a0 + a1 + a2;  // equals 2*area(v0,v1,v2)
  if (degenerate_tol > 0.0 && std::abs(den) < degenerate_tol)
    throw DegenerateTriangle("triangle area below tolerance");
  Bary b;
  b.a = a0 / den;
  b.b = a1 / den;
  b.g = 1.0 - b.a - b.b;
  return b;
}

/// Affine quantities of one macrotriangle edge E_i (connecting V_j, V_k):
/// the intersection of the line through the two adjacent interior control
/// points with the edge, the distance from it to this triangle's control
/// point, and the barycentric split ratios of the middle trisection segment.
struct EdgeGeom {
  double x_star = 0.0, y_star = 0.0;
  double eta = 0.0;
  double theta_kj = 0.5;  // weight of the trisection point adjacent to V_j
  double theta_jk = 0.5;  // weight of the trisection point adjacent to V_k
};

namespace detail {

// cyclic successor pairs of {0,1,2}
constexpr int CYC_J[3] = {1, 2, 0};
constexpr int CYC_K[3] = {2, 0, 1};

inline Point centroid(const std::array<Point, 3>& v) {
  return {(v[0].x + v[1].x + v[2].x) / 3.0, (v[0].y + v[1].y + v[2].y) / 3.0};
}

// C point of edge i: centroid of the microtriangle (V_j, V_k, S)
inline Point edge_c_point(const std::array<Point, 3>& v, int i) {
  const Point s = centroid(v);
  const int j = CYC_J[i], k = CYC_K[i];
  return {(v[j].x + v[k].x + s.x) / 3.0, (v[j].y + v[k].y + s.y) / 3.0};
}

}  // namespace detail

/// Edge geometry for edge E_i of the CCW triangle v, given the neighboring
/// triangle's vertices (or nothing for a hull edge, in which case the virtual
/// neighbor control point is the reflection of this triangle's across the
/// edge midpoint). x* may fall outside the edge segment; that is legal.
inline EdgeGeom edge_geometry(const std::array<Point, 3>& v, int i,
                              const std::optional<std::array<Point, 3>>& neighbor) {
  const int j = detail::CYC_J[i], k = detail::CYC_K[i];
  const Point c = detail::edge_c_point(v, i);
  Point cb;
  if (neighbor) {
    const Point sn = detail::centroid(*neighbor);
    cb = {(v[j].x + v[k].x + sn.x) / 3.0, (v[j].y + v[k].y + sn.y) / 3.0};
  } else {
    cb = {v[j].x + v[k].x - c.x, v[j].y + v[k].y - c.y};  // 2*mid - c
  }

  const double exj = v[k].x - v[j].x, eyj = v[k].y - v[j].y;
  const double den = (cb.x - c.x) * eyj - (cb.y - c.y) * exj;
  const double scale = std::max({std::abs(exj), std::abs(eyj), std::abs(cb.x - c.x), std::abs(cb.y - c.y), 1e-300});
  if (std::abs(den) < 1e-14 * scale * scale)
    throw ParallelLines("edge direction parallel to the cross-derivative line");

  EdgeGeom g;
  const double cross_v = v[j].x * v[k].y - v[k].x * v[j].y;
  const double cross_c = c.x * cb.y - cb.x * c.y;
  g.x_star = ((cb.x - c.x) * cross_v - exj * cross_c) / den;
  g.y_star = ((cb.y - c.y) * cross_v - eyj * cross_c) / den;
  g.eta = std::hypot(c.x - g.x_star, c.y - g.y_star);

  const Point t_jk{(2.0 * v[j].x + v[k].x) / 3.0, (2.0 * v[j].y + v[k].y) / 3.0};
  const Point t_kj{(2.0 * v[k].x + v[j].x) / 3.0, (2.0 * v[k].y + v[j].y) / 3.0};
  const double dx = t_kj.x - t_jk.x;
  if (std::abs(dx) > 1e-12 * std::max({std::abs(t_kj.x), std::abs(t_jk.x), 1.0})) {
    g.theta_kj = (t_kj.x - g.x_star) / dx;
  } else {
    g.theta_kj = (t_kj.y - g.y_star) / (t_kj.y - t_jk.y);
  }
  g.theta_jk = 1.0 - g.theta_kj;
  return g;
}

struct Edge {
  int a = -1, b = -1;     // canonical endpoints, a < b
  int tri[2] = {-1, -1};  // incident triangles in discovery order
  bool interior() const { return tri[1] >= 0; }
};

struct MacroTriangle {
  std::array<int, 3> v{};          // CCW site ids
  Point s{};                       // centroid
  std::array<EdgeGeom, 3> edge{};  // E_i opposite v[i]
  std::array<int, 3> edge_id{};
  std::array<double, 3> edge_sign{};  // +1 for the first triangle on the edge
};

/// Vertices of microtriangle m (0..2) of a macrotriangle: (V_m, V_{m+1}, S).
inline std::array<Point, 3> micro_vertices(const std::array<Point, 3>& v, int m) {
  return {v[m], v[(m + 1) % 3], detail::centroid(v)};
}

class Triangulation {
 public:
  const std::vector<Site>& sites() const { return sites_; }
  const std::vector<MacroTriangle>& triangles() const { return tris_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<int>& hull() const { return hull_; }

  Point site_point(int id) const { return {sites_[id].x, sites_[id].y}; }
  std::array<Point, 3> triangle_points(int t) const {
    const auto& tr = tris_[t];
    return {site_point(tr.v[0]), site_point(tr.v[1]), site_point(tr.v[2])};
  }
  double bbox_diag() const { return bbox_diag_; }

  friend Triangulation triangulate(std::vector<Site> in);
  friend Triangulation assemble_triangulation(std::vector<Site> sites,
                                              const std::vector<std::array<int, 3>>& tris);

 private:
  // shared tail of construction: orientation checks, centroids, edge table,
  // per-edge geometry, hull walk
  void build_from_raw(std::vector<std::array<int, 3>> raw, bool canonicalize);

  std::vector<Site> sites_;
  std::vector<MacroTriangle> tris_;
  std::vector<Edge> edges_;
  std::vector<int> hull_;
  double bbox_diag_ = 1.0;
};

struct LocateResult {
  int macro = -1;
  int micro = -1;
  Bary bary;  // in the microtriangle
};

namespace detail {

// long-double orientation and in-circumcircle predicates; adequate for the
// sizes and normalized coordinates this library works at
inline long double orient2d(const Point& a, const Point& b, const Point& c) {
  const long double abx = static_cast<long double>(b.x) - a.x;
  const long double aby = static_cast<long double>(b.y) - a.y;
  const long double acx = static_cast<long double>(c.x) - a.x;
  const long double acy = static_cast<long double>(c.y) - a.y;
  return abx * acy - acx * aby;
}

inline long double incircle(const Point& a, const Point& b, const Point& c, const Point& d) {
  const long double adx = static_cast<long double>(a.x) - d.x;
  const long double ady = static_cast<long double>(a.y) - d.y;
  const long double bdx = static_cast<long double>(b.x) - d.x;
  const long double bdy = static_cast<long double>(b.y) - d.y;
  const long double cdx = static_cast<long double>(c.x) - d.x;
  const long double cdy = static_cast<long double>(c.y) - d.y;
  const long double ad2 = adx * adx + ady * ady;
  const long double bd2 = bdx * bdx + bdy * bdy;
  const long double cd2 = cdx * cdx + cdy * cdy;
  return adx * (bdy * cd2 - cdy * bd2) - ady * (bdx * cd2 - cdx * bd2) + ad2 * (bdx * cdy - cdx * bdy);
}

struct WorkTri {
  int v[3];    // CCW
  int adj[3];  // neighbor across edge opposite v[i], -1 if none
  bool alive = true;
};

class DelaunayBuilder {
 public:
  DelaunayBuilder(const std::vector<Point>& pts, double diag)
      : p_(pts), eps_(1e-12 * diag * diag), eps_ic_(1e-12 * diag * diag * diag * diag) {}

  void run() {
    // three far virtual vertices enclosing everything
    double cx = 0, cy = 0;
    for (const auto& q : p_) {
      cx += q.x;
      cy += q.y;
    }
    cx /= p_.size();
    cy /= p_.size();
    double r = 1.0;
    for (const auto& q : p_) r = std::max(r, std::hypot(q.x - cx, q.y - cy));
    r *= 1e4;
    const int n = static_cast<int>(p_.size());
    p_.push_back({cx - 2.0 * r, cy - r});
    p_.push_back({cx + 2.0 * r, cy - r});
    p_.push_back({cx, cy + 2.0 * r});
    tris_.push_back({{n, n + 1, n + 2}, {-1, -1, -1}, true});
    for (int q = 0; q < n; ++q) insert(q);
  }

  std::vector<std::array<int, 3>> real_triangles() const {
    const int n = static_cast<int>(p_.size()) - 3;
    std::vector<std::array<int, 3>> out;
    for (const auto& t : tris_) {
      if (!t.alive) continue;
      if (t.v[0] >= n || t.v[1] >= n || t.v[2] >= n) continue;
      out.push_back({t.v[0], t.v[1], t.v[2]});
    }
    return out;
  }

 private:
  void insert(int q) {
    int t = find_containing(q);
    // on-edge test: split across the edge whose opposite bary vanishes
    int on_edge = -1;
    for (int i = 0; i < 3; ++i) {
      const long double o = orient2d(p_[tris_[t].v[CYC_J[i]]], p_[tris_[t].v[CYC_K[i]]], p_[q]);
      if (std::abs(static_cast<double>(o)) <= eps_) on_edge = i;
    }
    if (on_edge < 0)
      split_interior(t, q);
    else
      split_edge(t, on_edge, q);
  }

  int find_containing(int q) {
    for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
      if (!tris_[t].alive) continue;
      bool in = true;
      for (int i = 0; i < 3 && in; ++i) {
        if (orient2d(p_[tris_[t].v[CYC_J[i]]], p_[tris_[t].v[CYC_K[i]]], p_[q]) < -eps_) in = false;
      }
      if (in) return t;
    }
    throw Error("internal: insertion point not located");
  }

  int adj_slot(int t, int nb) const {
    for (int i = 0; i < 3; ++i)
      if (tris_[t].adj[i] == nb) return i;
    throw Error("internal: broken adjacency");
  }

  void split_interior(int t, int q) {
    const WorkTri old = tris_[t];
    tris_[t].alive = false;
    const int t0 = add({{old.v[0], old.v[1], q}, {-1, -1, -1}, true});
    const int t1 = add({{old.v[1], old.v[2], q}, {-1, -1, -1}, true});
    const int t2 = add({{old.v[2], old.v[0], q}, {-1, -1, -1}, true});
    link(t0, 2, old.adj[2]);
    link(t1, 2, old.adj[0]);
    link(t2, 2, old.adj[1]);
    tie(t0, 0, t1, 1);
    tie(t1, 0, t2, 1);
    tie(t2, 0, t0, 1);
    relink_outer(old.adj[2], t, t0);
    relink_outer(old.adj[0], t, t1);
    relink_outer(old.adj[1], t, t2);
    legalize(t0, 2, q);
    legalize(t1, 2, q);
    legalize(t2, 2, q);
  }

  void split_edge(int t, int i, int q) {
    const int nb = tris_[t].adj[i];
    const WorkTri old = tris_[t];
    const int a = old.v[i], b = old.v[CYC_J[i]], c = old.v[CYC_K[i]];
    tris_[t].alive = false;
    // edge (b,c) carries q; split t into (a,b,q) and (a,q,c)
    const int t0 = add({{a, b, q}, {-1, -1, -1}, true});
    const int t1 = add({{a, q, c}, {-1, -1, -1}, true});
    tie(t0, 1, t1, 2);  // share edge (a,q)
    link(t0, 0, -1);    // filled below (towards nb side)
    link(t1, 0, -1);
    link(t0, 2, old.adj[CYC_K[i]]);
    relink_outer(old.adj[CYC_K[i]], t, t0);
    link(t1, 1, old.adj[CYC_J[i]]);
    relink_outer(old.adj[CYC_J[i]], t, t1);
    if (nb >= 0) {
      const WorkTri oldn = tris_[nb];
      const int s = adj_slot(nb, t);
      const int d = oldn.v[s];  // vertex opposite the shared edge
      tris_[nb].alive = false;
      // neighbor (d, c, b) seen CCW from its side; split into (d,c,q),(d,q,b)
      const int n0 = add({{d, oldn.v[CYC_J[s]], q}, {-1, -1, -1}, true});
      const int n1 = add({{d, q, oldn.v[CYC_K[s]]}, {-1, -1, -1}, true});
      tie(n0, 1, n1, 2);
      link(n0, 2, oldn.adj[CYC_K[s]]);
      relink_outer(oldn.adj[CYC_K[s]], nb, n0);
      link(n1, 1, oldn.adj[CYC_J[s]]);
      relink_outer(oldn.adj[CYC_J[s]], nb, n1);
      // stitch the four around q; oldn.v[CYC_J[s]] == c, oldn.v[CYC_K[s]] == b
      tie(t0, 0, n1, 0);
      tie(t1, 0, n0, 0);
      legalize(t0, 2, q);
      legalize(t1, 1, q);
      legalize(n0, 2, q);
      legalize(n1, 1, q);
    } else {
      legalize(t0, 2, q);
      legalize(t1, 1, q);
    }
  }

  int add(const WorkTri& wt) {
    tris_.push_back(wt);
    return static_cast<int>(tris_.size()) - 1;
  }
  void link(int t, int slot, int nb) { tris_[t].adj[slot] = nb; }
  void tie(int t1, int s1, int t2, int s2) {
    tris_[t1].adj[s1] = t2;
    tris_[t2].adj[s2] = t1;
  }
  void relink_outer(int outer, int from, int to) {
    if (outer < 0) return;
    tris_[outer].adj[adj_slot(outer, from)] = to;
  }

  // s is the slot holding q in t; the suspect edge is the one opposite q.
  // Flips it if the far vertex of the neighbor invades the circumcircle.
  void legalize(int t, int s, int q) {
    const int nb = tris_[t].adj[s];
    if (nb < 0) return;
    const int sn = adj_slot(nb, t);
    const int d = tris_[nb].v[sn];
    const auto& wt = tris_[t];
    if (incircle(p_[wt.v[0]], p_[wt.v[1]], p_[wt.v[2]], p_[d]) <= eps_ic_) return;
    // flip: t=(q,B,C) with shared edge (B,C); nb=(d,C,B) from the far side
    const int B = wt.v[CYC_J[s]], C = wt.v[CYC_K[s]];
    const int adjQB = wt.adj[CYC_K[s]], adjCQ = wt.adj[CYC_J[s]];
    const int adjBD = tris_[nb].adj[CYC_J[sn]], adjDC = tris_[nb].adj[CYC_K[sn]];
    tris_[t] = {{q, B, d}, {-1, -1, -1}, true};
    tris_[nb] = {{q, d, C}, {-1, -1, -1}, true};
    tie(t, 1, nb, 2);  // shared new edge (q,d)
    link(t, 2, adjQB);
    relink_outer(adjQB, t, t);
    link(t, 0, adjBD);
    relink_outer(adjBD, nb, t);
    link(nb, 1, adjCQ);
    relink_outer(adjCQ, t, nb);
    link(nb, 0, adjDC);
    relink_outer(adjDC, nb, nb);
    // edges now opposite q in the two halves may have become illegal
    legalize(t, 0, q);
    legalize(nb, 0, q);
  }

  std::vector<Point> p_;
  std::vector<WorkTri> tris_;
  double eps_;
  double eps_ic_;

 public:
  const std::vector<Point>& points() const { return p_; }
};

}  // namespace detail

/// Delaunay triangulation of the sites, CCW triangles, shared-edge geometry
/// attached. Requires >= 3 distinct, not-all-collinear sites.
inline Triangulation triangulate(std::vector<Site> in) {
  if (in.size() < 3) throw CollinearInput("need at least 3 sites");
  Triangulation tr;
  tr.sites_ = std::move(in);
  const auto& sites = tr.sites_;

  double xlo = sites[0].x, xhi = sites[0].x, ylo = sites[0].y, yhi = sites[0].y;
  for (const auto& s : sites) {
    xlo = std::min(xlo, s.x);
    xhi = std::max(xhi, s.x);
    ylo = std::min(ylo, s.y);
    yhi = std::max(yhi, s.y);
  }
  const double diag = std::max(std::hypot(xhi - xlo, yhi - ylo), 1e-30);
  tr.bbox_diag_ = diag;

  for (size_t i = 0; i < sites.size(); ++i)
    for (size_t j = i + 1; j < sites.size(); ++j)
      if (std::hypot(sites[i].x - sites[j].x, sites[i].y - sites[j].y) <= 1e-12 * diag)
        throw DuplicateSite("sites " + std::to_string(i) + " and " + std::to_string(j) + " coincide");

  // collinearity: farthest pair spans the data; all others must leave the line
  std::vector<Point> pts(sites.size());
  for (size_t i = 0; i < sites.size(); ++i) pts[i] = {sites[i].x, sites[i].y};
  {
    size_t a = 0, b = 1;
    double best = -1.0;
    for (size_t i = 0; i < pts.size(); ++i)
      for (size_t j = i + 1; j < pts.size(); ++j) {
        const double d2 = std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y);
        if (d2 > best) {
          best = d2;
          a = i;
          b = j;
        }
      }
    double dev = 0.0;
    for (size_t i = 0; i < pts.size(); ++i)
      dev = std::max(dev, std::abs(2.0 * signed_area(pts[a], pts[b], pts[i])) / best);
    if (dev <= 1e-9 * diag)
      throw CollinearInput(
          "all sites are collinear in the mapped plane (typically fewer than 2 distinct resolutions)");
  }

  detail::DelaunayBuilder bld(pts, diag);
  bld.run();
  auto raw = bld.real_triangles();
  if (raw.empty()) throw CollinearInput("triangulation produced no triangles");
  tr.build_from_raw(std::move(raw), /*canonicalize=*/true);
  return tr;
}

/// Rebuild the full structure from stored sites and CCW triangle vertex ids
/// (used when loading fitted models; triangle order is preserved).
inline Triangulation assemble_triangulation(std::vector<Site> sites,
                                            const std::vector<std::array<int, 3>>& tris) {
  Triangulation tr;
  tr.sites_ = std::move(sites);
  if (tr.sites_.empty() || tris.empty()) throw CorruptDocument("empty triangulation");
  double xlo = tr.sites_[0].x, xhi = tr.sites_[0].x, ylo = tr.sites_[0].y, yhi = tr.sites_[0].y;
  for (const auto& s : tr.sites_) {
    xlo = std::min(xlo, s.x);
    xhi = std::max(xhi, s.x);
    ylo = std::min(ylo, s.y);
    yhi = std::max(yhi, s.y);
  }
  tr.bbox_diag_ = std::max(std::hypot(xhi - xlo, yhi - ylo), 1e-30);
  for (const auto& t : tris)
    for (int i = 0; i < 3; ++i)
      if (t[i] < 0 || t[i] >= static_cast<int>(tr.sites_.size()))
        throw CorruptDocument("triangle references a missing site");
  tr.build_from_raw(tris, /*canonicalize=*/false);
  return tr;
}

inline void Triangulation::build_from_raw(std::vector<std::array<int, 3>> raw, bool canonicalize) {
  const double diag = bbox_diag_;
  const auto pt = [&](int id) { return Point{sites_[id].x, sites_[id].y}; };

  tris_.clear();
  edges_.clear();
  hull_.clear();
  for (auto& t : raw) {
    const double a2 = 2.0 * signed_area(pt(t[0]), pt(t[1]), pt(t[2]));
    if (std::abs(a2) < 1e-12 * diag * diag) throw DegenerateTriangle("near-zero-area triangle in mesh");
    MacroTriangle mt;
    if (a2 > 0.0)
      mt.v = t;
    else if (canonicalize)
      mt.v = {t[0], t[2], t[1]};
    else
      throw CorruptDocument("stored triangle is not counter-clockwise");
    tris_.push_back(mt);
  }
  if (canonicalize)
    std::sort(tris_.begin(), tris_.end(),
              [](const MacroTriangle& l, const MacroTriangle& r) { return l.v < r.v; });

  // edge table
  std::vector<std::pair<std::pair<int, int>, int>> keyed;
  for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
    auto& mt = tris_[t];
    const auto p3 = std::array<Point, 3>{pt(mt.v[0]), pt(mt.v[1]), pt(mt.v[2])};
    mt.s = detail::centroid(p3);
    for (int i = 0; i < 3; ++i) {
      const int a = mt.v[detail::CYC_J[i]], b = mt.v[detail::CYC_K[i]];
      keyed.push_back({{std::min(a, b), std::max(a, b)}, t});
    }
  }
  std::sort(keyed.begin(), keyed.end());
  for (size_t i = 0; i < keyed.size();) {
    Edge e;
    e.a = keyed[i].first.first;
    e.b = keyed[i].first.second;
    e.tri[0] = keyed[i].second;
    size_t j = i + 1;
    if (j < keyed.size() && keyed[j].first == keyed[i].first) {
      e.tri[1] = keyed[j].second;
      ++j;
      if (j < keyed.size() && keyed[j].first == keyed[i].first)
        throw Error("internal: edge with more than two incident triangles");
    }
    edges_.push_back(e);
    i = j;
  }

  auto edge_lookup = [&](int a, int b) {
    const std::pair<int, int> key{std::min(a, b), std::max(a, b)};
    const auto it = std::lower_bound(edges_.begin(), edges_.end(), key,
                                     [](const Edge& e, const std::pair<int, int>& k) {
                                       return std::pair<int, int>{e.a, e.b} < k;
                                     });
    return static_cast<int>(it - edges_.begin());
  };

  for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
    auto& mt = tris_[t];
    for (int i = 0; i < 3; ++i) {
      const int eid = edge_lookup(mt.v[detail::CYC_J[i]], mt.v[detail::CYC_K[i]]);
      mt.edge_id[i] = eid;
      mt.edge_sign[i] = (edges_[eid].tri[0] == t) ? 1.0 : -1.0;
    }
  }

  // shared edge geometry: computed once from the first incident triangle's
  // frame so both sides see bit-identical x*, y* and swapped thetas
  for (size_t eid = 0; eid < edges_.size(); ++eid) {
    const Edge& e = edges_[eid];
    const int t0 = e.tri[0];
    const auto& mt0 = tris_[t0];
    int i0 = -1;
    for (int i = 0; i < 3; ++i)
      if (mt0.edge_id[i] == static_cast<int>(eid)) i0 = i;
    std::optional<std::array<Point, 3>> nb;
    if (e.interior()) nb = triangle_points(e.tri[1]);
    EdgeGeom g0 = edge_geometry(triangle_points(t0), i0, nb);
    tris_[t0].edge[i0] = g0;
    if (e.interior()) {
      const int t1 = e.tri[1];
      auto& mt1 = tris_[t1];
      int i1 = -1;
      for (int i = 0; i < 3; ++i)
        if (mt1.edge_id[i] == static_cast<int>(eid)) i1 = i;
      EdgeGeom g1 = g0;
      // the second triangle traverses the edge in the opposite direction
      std::swap(g1.theta_kj, g1.theta_jk);
      const Point c1 = detail::edge_c_point(triangle_points(t1), i1);
      g1.eta = std::hypot(c1.x - g0.x_star, c1.y - g0.y_star);
      mt1.edge[i1] = g1;
    }
  }

  // hull: boundary edges oriented as traversed by their triangle (CCW walk)
  std::vector<std::pair<int, int>> bnd;
  for (const auto& e : edges_) {
    if (e.interior()) continue;
    const auto& mt = tris_[e.tri[0]];
    for (int i = 0; i < 3; ++i) {
      const int a = mt.v[detail::CYC_J[i]], b = mt.v[detail::CYC_K[i]];
      if (std::min(a, b) == e.a && std::max(a, b) == e.b) {
        bnd.push_back({a, b});
        break;
      }
    }
  }
  if (!bnd.empty()) {
    std::vector<int> next(sites_.size(), -1);
    for (auto& [a, b] : bnd) next[a] = b;
    int start = bnd[0].first;
    for (auto& [a, b] : bnd) start = std::min(start, a);
    int cur = start;
    do {
      hull_.push_back(cur);
      cur = next[cur];
    } while (cur != start && cur >= 0 && hull_.size() <= bnd.size());
  }
}

/// Containing macro/micro triangle of p with deterministic lowest-index
/// tie-break on shared edges. Throws OutsideConvexHull beyond the hull
/// (closed: boundary points are inside).
inline LocateResult locate(const Triangulation& tr, double px, double py) {
  const Point p{px, py};
  const double tol = 1e-10;
  for (int t = 0; t < static_cast<int>(tr.triangles().size()); ++t) {
    const auto v = tr.triangle_points(t);
    const Bary mb = barycentric(v[0], v[1], v[2], p);
    if (mb.min() < -tol) continue;
    for (int m = 0; m < 3; ++m) {
      const auto mv = micro_vertices(v, m);
      const Bary b = barycentric(mv[0], mv[1], mv[2], p);
      if (b.min() >= -tol) return {t, m, b};
    }
  }
  throw OutsideConvexHull("query point outside the data hull; extrapolation is not supported");
}

}  // namespace grdfit
