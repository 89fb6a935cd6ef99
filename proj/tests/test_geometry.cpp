#include "test_helpers.hpp"

using namespace grdfit;
using grdfit::testing::make_rng;

namespace {

// brute-force empty-circumcircle test for an interior edge's two triangles
bool delaunay_certificate(const Triangulation& tr) {
  const auto& sites = tr.sites();
  for (const auto& e : tr.edges()) {
    if (!e.interior()) continue;
    for (const int t : {e.tri[0], e.tri[1]}) {
      const auto v = tr.triangle_points(t);
      for (const auto& s : sites) {
        const auto& mt = tr.triangles()[t];
        if (s.id == mt.v[0] || s.id == mt.v[1] || s.id == mt.v[2]) continue;
        const long double inc = detail::incircle(v[0], v[1], v[2], {s.x, s.y});
        const double scale = tr.bbox_diag();
        if (inc > 1e-9 * scale * scale * scale * scale) return false;
      }
    }
  }
  return true;
}

}  // namespace

TEST_CASE("single triangle") {
  const auto tr = triangulate({{0, 0, 0}, {1, 0, 1}, {0, 1, 2}});
  REQUIRE(tr.triangles().size() == 1);
  REQUIRE(tr.edges().size() == 3);
  int interior = 0;
  for (const auto& e : tr.edges()) interior += e.interior();
  CHECK(interior == 0);
  CHECK(tr.hull().size() == 3);
  const auto v = tr.triangle_points(0);
  CHECK(signed_area(v[0], v[1], v[2]) > 0);
}

TEST_CASE("unit square splits into two triangles sharing one interior edge") {
  const auto tr = triangulate({{0, 0, 0}, {1, 0, 1}, {0, 1, 2}, {1, 1, 3}});
  REQUIRE(tr.triangles().size() == 2);
  int interior = 0;
  for (const auto& e : tr.edges()) interior += e.interior();
  CHECK(interior == 1);
  CHECK(tr.hull().size() == 4);
}

TEST_CASE("degenerate inputs are rejected") {
  CHECK_THROWS_AS(triangulate({{0, 0, 0}, {1, 0, 1}}), CollinearInput);
  CHECK_THROWS_AS(triangulate({{0, 0, 0}, {1, 0, 1}, {2, 0, 2}, {3, 0, 3}}), CollinearInput);
  CHECK_THROWS_AS(triangulate({{0, 0, 0}, {0, 0, 1}, {0, 1, 2}}), DuplicateSite);
}

TEST_CASE("random sites give a Delaunay triangulation (brute-force certificate)") {
  Rng r = make_rng(1);
  for (const int n : {10, 30, 60}) {
    std::vector<Site> sites;
    for (int i = 0; i < n; ++i) sites.push_back({r.uniform(), r.uniform(), i});
    const auto tr = triangulate(sites);
    CHECK(delaunay_certificate(tr));
    // triangles cover the hull: total area equals hull area (shoelace)
    double tri_area = 0;
    for (size_t t = 0; t < tr.triangles().size(); ++t) {
      const auto v = tr.triangle_points(t);
      tri_area += signed_area(v[0], v[1], v[2]);
    }
    double hull_area = 0;
    const auto& h = tr.hull();
    for (size_t i = 0; i < h.size(); ++i) {
      const Point a = tr.site_point(h[i]), b = tr.site_point(h[(i + 1) % h.size()]);
      hull_area += 0.5 * (a.x * b.y - b.x * a.y);
    }
    CHECK(tri_area == Catch::Approx(hull_area).epsilon(1e-9));
  }
}

TEST_CASE("grid sites (cocircular ties) triangulate cleanly") {
  std::vector<Site> sites;
  int id = 0;
  for (int r = 0; r < 5; ++r)
    for (int b = 0; b < 8; ++b) sites.push_back({b * 0.35, r * 1.2, id++});
  const auto tr = triangulate(sites);
  CHECK(tr.triangles().size() == 2 * 4 * 7);  // full rectangle triangulated
  CHECK(delaunay_certificate(tr));
  // every interior edge with two incident triangles, all CCW
  for (size_t t = 0; t < tr.triangles().size(); ++t) {
    const auto v = tr.triangle_points(t);
    CHECK(signed_area(v[0], v[1], v[2]) > 0);
  }
}

TEST_CASE("barycentric coordinates") {
  const Point v0{0, 0}, v1{1, 0}, v2{0, 1};
  SECTION("vertex and centroid") {
    const Bary bv = barycentric(v0, v1, v2, v0);
    CHECK(bv.a == 1.0);
    CHECK(bv.b == 0.0);
    CHECK(bv.g == 0.0);
    const Bary bc = barycentric(v0, v1, v2, {1.0 / 3, 1.0 / 3});
    CHECK(bc.a == Catch::Approx(1.0 / 3).margin(1e-14));
    CHECK(bc.b == Catch::Approx(1.0 / 3).margin(1e-14));
  }
  SECTION("hand-computed interior point") {
    const Bary b = barycentric(v0, v1, v2, {0.5, 0.25});
    CHECK(b.a == Catch::Approx(0.25).margin(1e-14));
    CHECK(b.b == Catch::Approx(0.5).margin(1e-14));
    CHECK(b.g == Catch::Approx(0.25).margin(1e-14));
  }
  SECTION("partition of unity over random points and triangles") {
    Rng r = make_rng(2);
    for (int trial = 0; trial < 100; ++trial) {
      const auto v = testing::random_ccw_triangle(r);
      for (int q = 0; q < 100; ++q) {
        const Point p{r.uniform(-2, 2), r.uniform(-2, 2)};
        const Bary b = barycentric(v[0], v[1], v[2], p);
        CHECK(std::abs(b.a + b.b + b.g - 1.0) < 1e-12);
      }
    }
  }
  SECTION("degenerate triangle detected") {
    CHECK_THROWS_AS(barycentric({0, 0}, {1, 0}, {2, 0}, {0.5, 0.1}, 1e-12), DegenerateTriangle);
  }
}

TEST_CASE("microtriangle split") {
  SECTION("areas partition the macrotriangle") {
    Rng r = make_rng(3);
    for (int trial = 0; trial < 50; ++trial) {
      const auto v = testing::random_ccw_triangle(r);
      const double total = signed_area(v[0], v[1], v[2]);
      double sum = 0;
      for (int m = 0; m < 3; ++m) {
        const auto mv = micro_vertices(v, m);
        const double a = signed_area(mv[0], mv[1], mv[2]);
        CHECK(a > 0);
        sum += a;
      }
      CHECK(sum == Catch::Approx(total).epsilon(1e-12));
    }
  }
  SECTION("worked example") {
    const std::array<Point, 3> v{{{0, 0}, {3, 0}, {0, 3}}};
    const auto mv = micro_vertices(v, 0);
    CHECK(mv[2].x == Catch::Approx(1.0));
    CHECK(mv[2].y == Catch::Approx(1.0));
    CHECK(signed_area(mv[0], mv[1], mv[2]) == Catch::Approx(1.5));
  }
}

TEST_CASE("edge geometry") {
  SECTION("closed-form intersection, frozen example") {
    // V_j=(0,0), V_k=(4,0), C=(2,1), neighbor C=(1,-1): the line crosses the
    // edge at (1.5, 0); trisection points at 4/3 and 8/3
    const std::array<Point, 3> tri{{{0, 0}, {4, 0}, {2, 3}}};  // apex arbitrary
    // construct a neighbor whose C point is exactly (1,-1):
    // C_nb = (Vj + Vk + S_nb)/3 = (1,-1) => S_nb = (-1,-3)
    // S_nb = (Vj + Vk + apex)/3 => apex = 3*S_nb - Vj - Vk = (-7,-9)
    const std::array<Point, 3> nb{{{4, 0}, {0, 0}, {-7, -9}}};
    // make this triangle's own C point equal (2,1): S = (2,3) + ... instead,
    // verify through the raw formula by overriding the apex so that
    // C = (V0+V1+S)/3 = (2,1) => S = (2,3) => apex = (2,9)
    const std::array<Point, 3> tri2{{{0, 0}, {4, 0}, {2, 9}}};
    const EdgeGeom g = edge_geometry(tri2, 2, nb);
    CHECK(g.x_star == Catch::Approx(1.5).margin(1e-12));
    CHECK(g.y_star == Catch::Approx(0.0).margin(1e-12));
    CHECK(g.eta == Catch::Approx(std::sqrt(1.25)).margin(1e-12));
    // weights are the linear-interpolation coefficients at x* on [T_jk, T_kj]
    CHECK(g.theta_kj == Catch::Approx(7.0 / 8).margin(1e-12));
    CHECK(g.theta_jk == Catch::Approx(1.0 / 8).margin(1e-12));
    // interpolation identity: x* = theta_kj * x_Tjk + theta_jk * x_Tkj
    CHECK(g.theta_kj * (4.0 / 3) + g.theta_jk * (8.0 / 3) == Catch::Approx(1.5).margin(1e-12));
  }
  SECTION("reflected virtual neighbor gives the symmetric split") {
    Rng r = make_rng(4);
    for (int trial = 0; trial < 50; ++trial) {
      const auto v = testing::random_ccw_triangle(r);
      for (int i = 0; i < 3; ++i) {
        const EdgeGeom g = edge_geometry(v, i, std::nullopt);
        CHECK(g.theta_kj == Catch::Approx(0.5).margin(1e-9));
        CHECK(g.theta_jk == Catch::Approx(0.5).margin(1e-9));
        CHECK(g.eta > 0);
      }
    }
  }
  SECTION("theta pair always sums to one") {
    Rng r = make_rng(5);
    for (int trial = 0; trial < 200; ++trial) {
      const auto v = testing::random_ccw_triangle(r);
      const auto eg = testing::skewed_edge_geoms(v, r);
      for (int i = 0; i < 3; ++i) CHECK(eg[i].theta_kj + eg[i].theta_jk == Catch::Approx(1.0).margin(1e-12));
    }
  }
  SECTION("parallel cross line rejected") {
    const std::array<Point, 3> v{{{0, 0}, {4, 0}, {2, 3}}};
    // a (geometrically invalid) neighbor on the same side of the edge puts
    // both interior control points at the same height: C-Cbar runs parallel
    const std::array<Point, 3> nb{{{4, 0}, {0, 0}, {6, 3}}};
    CHECK_THROWS_AS(edge_geometry(v, 2, nb), ParallelLines);
  }
  SECTION("interior edges agree from both sides") {
    Rng r = make_rng(6);
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<Site> sites;
      for (int i = 0; i < 25; ++i) sites.push_back({r.uniform(), r.uniform(), i});
      const auto tr = triangulate(sites);
      for (const auto& e : tr.edges()) {
        if (!e.interior()) continue;
        for (int side = 0; side < 2; ++side) {
          const int t = e.tri[side], o = e.tri[1 - side];
          const auto& mt = tr.triangles()[t];
          for (int i = 0; i < 3; ++i) {
            if (mt.edge_id[i] != static_cast<int>(&e - tr.edges().data())) continue;
            const EdgeGeom g = edge_geometry(tr.triangle_points(t), i, tr.triangle_points(o));
            CHECK(g.x_star == Catch::Approx(mt.edge[i].x_star).margin(1e-9));
            CHECK(g.y_star == Catch::Approx(mt.edge[i].y_star).margin(1e-9));
            CHECK(g.eta == Catch::Approx(mt.edge[i].eta).margin(1e-9));
          }
        }
      }
    }
  }
}

TEST_CASE("locate") {
  Rng r = make_rng(7);
  std::vector<Site> sites;
  for (int i = 0; i < 40; ++i) sites.push_back({r.uniform(), r.uniform(), i});
  const auto tr = triangulate(sites);

  SECTION("at a site: incident triangle with a unit barycentric coordinate") {
    for (const auto& s : sites) {
      const LocateResult lr = locate(tr, s.x, s.y);
      const auto& mt = tr.triangles()[lr.macro];
      CHECK((mt.v[0] == s.id || mt.v[1] == s.id || mt.v[2] == s.id));
      const double mx = std::max({lr.bary.a, lr.bary.b, lr.bary.g});
      CHECK(mx == Catch::Approx(1.0).margin(1e-9));
    }
  }
  SECTION("macro centroid resolves to micro 0 deterministically") {
    const auto v = tr.triangle_points(7);
    const Point s = detail::centroid(v);
    const LocateResult lr = locate(tr, s.x, s.y);
    CHECK(lr.micro == 0);
    CHECK(lr.bary.g == Catch::Approx(1.0).margin(1e-9));
  }
  SECTION("outside the hull throws") {
    CHECK_THROWS_AS(locate(tr, 5.0, 5.0), OutsideConvexHull);
    CHECK_THROWS_AS(locate(tr, -3.0, 0.5), OutsideConvexHull);
  }
  SECTION("returned triangle really contains the point") {
    for (int q = 0; q < 10000; ++q) {
      const Point p{r.uniform(0.2, 0.8), r.uniform(0.2, 0.8)};
      LocateResult lr;
      try {
        lr = locate(tr, p.x, p.y);
      } catch (const OutsideConvexHull&) {
        continue;
      }
      const auto v = tr.triangle_points(lr.macro);
      const Bary mb = barycentric(v[0], v[1], v[2], p);
      CHECK(mb.min() >= -1e-10);
    }
  }
}

TEST_CASE("triangulation rebuild from stored parts preserves structure") {
  Rng r = make_rng(8);
  std::vector<Site> sites;
  for (int i = 0; i < 20; ++i) sites.push_back({r.uniform(), r.uniform(), i});
  const auto tr = triangulate(sites);
  std::vector<std::array<int, 3>> ids;
  for (const auto& t : tr.triangles()) ids.push_back(t.v);
  const auto tr2 = assemble_triangulation(tr.sites(), ids);
  REQUIRE(tr2.triangles().size() == tr.triangles().size());
  for (size_t t = 0; t < ids.size(); ++t) {
    CHECK(tr2.triangles()[t].v == tr.triangles()[t].v);
    for (int i = 0; i < 3; ++i) {
      CHECK(tr2.triangles()[t].edge[i].x_star == tr.triangles()[t].edge[i].x_star);
      CHECK(tr2.triangles()[t].edge[i].eta == tr.triangles()[t].edge[i].eta);
    }
  }
  // swapped orientation is rejected
  ids[0] = {ids[0][0], ids[0][2], ids[0][1]};
  CHECK_THROWS_AS(assemble_triangulation(tr.sites(), ids), CorruptDocument);
}
