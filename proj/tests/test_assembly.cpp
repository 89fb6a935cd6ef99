#include <sstream>

#include "test_helpers.hpp"

#include "grdfit/assembly.hpp"
#include "grdfit/qp.hpp"

using namespace grdfit;
using grdfit::testing::make_rng;

namespace {

Triangulation random_mesh(Rng& r, int n) {
  std::vector<Site> sites;
  for (int i = 0; i < n; ++i) sites.push_back({r.uniform(), r.uniform(), i});
  return triangulate(sites);
}

}  // namespace

TEST_CASE("variable counting") {
  SECTION("single triangle: 6 + 3 + 6") {
    const auto tr = triangulate({{0, 0, 0}, {1, 0, 1}, {0, 1, 2}});
    Vec z(3);
    z << 1, 2, 3;
    const auto qp = assemble_global(tr, z);
    CHECK(qp.q.size() == 15);
    CHECK(qp.A_in.rows() == 16);  // 10 tagged rows + 6 sign rows
  }
  SECTION("two triangles sharing one edge: 8 + 5 + 12") {
    const auto tr = triangulate({{0, 0, 0}, {1, 0, 1}, {0, 1, 2}, {1, 1, 3}});
    Vec z(4);
    z << 1, 2, 3, 4;
    const auto qp = assemble_global(tr, z);
    CHECK(qp.q.size() == 25);
    // the shared edge variable appears with opposite signs in the two triangles
    int shared = -1;
    for (size_t e = 0; e < tr.edges().size(); ++e)
      if (tr.edges()[e].interior()) shared = static_cast<int>(e);
    REQUIRE(shared >= 0);
    double s0 = 0, s1 = 0;
    for (int t = 0; t < 2; ++t) {
      const auto& mt = tr.triangles()[t];
      for (int i = 0; i < 3; ++i)
        if (mt.edge_id[i] == shared) (t == 0 ? s0 : s1) = mt.edge_sign[i];
    }
    CHECK(s0 * s1 == -1.0);
  }
}

TEST_CASE("constant data: zero unknowns are optimal") {
  Rng r = make_rng(1);
  const auto tr = random_mesh(r, 12);
  const Vec z = Vec::Constant(12, 70.0);
  const auto qp = assemble_global(tr, z);
  // gradient vanishes on the derivative block
  CHECK(qp.q.head(qp.layout.d_size()).cwiseAbs().maxCoeff() < 1e-8);
  // v = 0 is feasible
  const Vec resid = qp.A_in * Vec::Zero(qp.q.size()) - qp.b_in;
  CHECK(resid.maxCoeff() < 1e-10);
  // and KKT-stationary for the solver
  const auto sol = solve(qp);
  CHECK(sol.status == QPStatus::Solved);
  CHECK(sol.v.cwiseAbs().maxCoeff() < 1e-8);
  // v = 0 passes the stationarity test directly: multipliers lambda on the
  // slack-sign rows cancel the slack gradient, everything else vanishes
  Vec y0 = Vec::Zero(qp.A_in.rows());
  for (Eigen::Index row = 0; row < qp.A_in.rows(); ++row)
    if (qp.tags[row].kind == RowTag::Kind::SlackSign) y0[row] = 1e-4;
  const auto kkt0 = kkt_residuals(qp, Vec::Zero(qp.q.size()), y0);
  CHECK(kkt0.primal <= 1e-8);
  CHECK(kkt0.dual <= 1e-8);
  CHECK(sol.objective == Catch::Approx(qp.constant).margin(1e-8));
  CHECK(std::abs(qp.constant) < 1e-6);  // zero curvature energy (up to cancellation)
}

TEST_CASE("assembled quadratic term is positive semidefinite") {
  Rng r = make_rng(2);
  for (const int n : {8, 20, 35}) {
    const auto tr = random_mesh(r, n);
    Vec z(n);
    for (int i = 0; i < n; ++i) z[i] = r.uniform(0, 100);
    const auto qp = assemble_global(tr, z);
    const Mat P = Mat(qp.P);
    CHECK((P - P.transpose()).cwiseAbs().maxCoeff() < 1e-14 * P.cwiseAbs().maxCoeff());
    const Eigen::SelfAdjointEigenSolver<Mat> es(P);
    CHECK(es.eigenvalues().minCoeff() >= -1e-8 * std::max(1.0, es.eigenvalues().maxCoeff()));
  }
}

TEST_CASE("affine data: a zero-objective feasible point exists and is found") {
  Rng r = make_rng(3);
  const auto tr = random_mesh(r, 15);
  const testing::PlaneFit pl{2.0, 0.7, 10.0};
  Vec z(15);
  for (int i = 0; i < 15; ++i) z[i] = pl(tr.site_point(i));
  const auto qp = assemble_global(tr, z);

  // construct the exact unknown vector analytically
  Vec v = Vec::Zero(qp.q.size());
  for (int i = 0; i < qp.layout.n_vertices; ++i) {
    v[qp.layout.dx(i)] = pl.a;
    v[qp.layout.dy(i)] = pl.b;
  }
  for (int e = 0; e < qp.layout.n_edges; ++e) {
    const Edge& ed = tr.edges()[e];
    const int t = ed.tri[0];
    const auto& mt = tr.triangles()[t];
    for (int i = 0; i < 3; ++i) {
      if (mt.edge_id[i] != e) continue;
      const auto eg = mt.edge[i];
      const Point c = detail::edge_c_point(tr.triangle_points(t), i);
      const double ux = (c.x - eg.x_star) / eg.eta, uy = (c.y - eg.y_star) / eg.eta;
      v[qp.layout.edge_var(e)] = mt.edge_sign[i] * (pl.a * ux + pl.b * uy);
    }
  }
  const double obj_at_plane = 0.5 * v.dot(qp.P * v) + qp.q.dot(v) + qp.constant;
  CHECK(obj_at_plane == Catch::Approx(0.0).margin(1e-7));
  CHECK((qp.A_in * v - qp.b_in).maxCoeff() < 1e-9);

  const auto sol = solve(qp);
  CHECK(sol.status == QPStatus::Solved);
  CHECK(sol.objective <= 1e-8);
}

TEST_CASE("eliminated edge variables match explicit matching rows") {
  Rng r = make_rng(4);
  for (int trial = 0; trial < 3; ++trial) {
    const int n = 6 + 2 * trial;
    const auto tr = random_mesh(r, n);
    if (tr.triangles().size() > 10) continue;
    Vec z(n);
    for (int i = 0; i < n; ++i) {
      const Point p = tr.site_point(i);
      z[i] = 30 + 25 * p.x + 8 * p.y * p.y;  // rising in x, curved in y
    }
    AssemblyOptions a1;
    const auto qp1 = assemble_global(tr, z, a1);
    AssemblyOptions a2;
    a2.explicit_edge_vars = true;
    const auto qp2 = assemble_global(tr, z, a2);
    REQUIRE(qp2.A_eq.rows() > 0);

    const auto s1 = solve(qp1);
    const auto s2 = solve(qp2);
    REQUIRE(s1.status == QPStatus::Solved);
    REQUIRE(s2.status == QPStatus::Solved);

    // compare fitted ordinates triangle by triangle
    for (int t = 0; t < static_cast<int>(tr.triangles().size()); ++t) {
      const auto& mt = tr.triangles()[t];
      const auto v3 = tr.triangle_points(t);
      const std::array<double, 3> zt{z[mt.v[0]], z[mt.v[1]], z[mt.v[2]]};
      Eigen::Matrix<double, 16, 9> R;
      Eigen::Matrix<double, 16, 1> f;
      build_Rf(v3, mt.edge, zt, R, f);
      const auto d1 = grdfit::detail::gather_local_d(qp1.layout, mt, t, s1.v);
      const auto d2 = grdfit::detail::gather_local_d(qp2.layout, mt, t, s2.v);
      const Eigen::Matrix<double, 16, 1> c1 = R * d1 + f;
      const Eigen::Matrix<double, 16, 1> c2 = R * d2 + f;
      CHECK((c1 - c2).cwiseAbs().maxCoeff() < 1e-5);
    }
  }
}

TEST_CASE("hard rows never carry slack, soft rows do") {
  const auto tr = triangulate({{0, 0, 0}, {1, 0, 1}, {0, 1, 2}, {1, 1, 3}});
  Vec z(4);
  z << 1, 2, 3, 4;
  const auto qp = assemble_global(tr, z);
  const Mat A = Mat(qp.A_in);
  for (Eigen::Index row = 0; row < A.rows(); ++row) {
    const RowTag& tag = qp.tags[row];
    const double slack_part =
        A.row(row).tail(qp.q.size() - qp.layout.d_size()).cwiseAbs().sum();
    if (tag.kind == RowTag::Kind::VertexFan || tag.kind == RowTag::Kind::Center)
      CHECK(slack_part == 0.0);
    if (tag.kind == RowTag::Kind::InnerRing || tag.kind == RowTag::Kind::MidEdge)
      CHECK(slack_part == 1.0);
  }
  // slack objective weight
  for (int t = 0; t < 2; ++t)
    for (int s = 0; s < 6; ++s) CHECK(qp.q[qp.layout.slack(t, s)] == -1e-4);
}

TEST_CASE("debug dump is parseable and complete") {
  const auto tr = triangulate({{0, 0, 0}, {1, 0, 1}, {0, 1, 2}});
  Vec z(3);
  z << 5, 6, 7;
  const auto qp = assemble_global(tr, z);
  std::ostringstream os;
  dump_program(qp, os);
  const std::string text = os.str();
  CHECK(text.find("P 15 15") != std::string::npos);
  CHECK(text.find("A_in 16 15") != std::string::npos);
  CHECK(text.find("tri0:vertex_fan[0]") != std::string::npos);
  CHECK(text.find("tri0:slack_sign[5]") != std::string::npos);
}
