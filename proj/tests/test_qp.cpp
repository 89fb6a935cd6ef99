#include <cstring>

#include "test_helpers.hpp"

#include "grdfit/qp.hpp"

using namespace grdfit;
using grdfit::testing::make_rng;

namespace {

QuadraticProgram make_qp(const Mat& P, const Vec& q, const Mat& A, const Vec& b) {
  QuadraticProgram qp;
  qp.P = P.sparseView();
  qp.q = q;
  qp.A_in = A.sparseView();
  qp.b_in = b;
  qp.A_eq = SpMat(0, q.size());
  qp.b_eq = Vec(0);
  return qp;
}

/// Exhaustive active-set oracle for small strictly convex programs: solve the
/// equality-KKT system of every constraint subset, keep the KKT-valid result.
struct OracleResult {
  Vec x;
  bool found = false;
};

OracleResult active_set_oracle(const Mat& P, const Vec& q, const Mat& A, const Vec& b) {
  const int n = static_cast<int>(q.size());
  const int m = static_cast<int>(b.size());
  OracleResult best;
  double best_obj = 1e300;
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    std::vector<int> act;
    for (int i = 0; i < m; ++i)
      if (mask & (1u << i)) act.push_back(i);
    const int k = static_cast<int>(act.size());
    if (k > n) continue;
    Mat K(n + k, n + k);
    K.setZero();
    K.topLeftCorner(n, n) = P;
    for (int a = 0; a < k; ++a) {
      K.block(n + a, 0, 1, n) = A.row(act[a]);
      K.block(0, n + a, n, 1) = A.row(act[a]).transpose();
    }
    Vec rhs(n + k);
    rhs.head(n) = -q;
    for (int a = 0; a < k; ++a) rhs[n + a] = b[act[a]];
    const Eigen::FullPivLU<Mat> lu(K);
    if (!lu.isInvertible()) continue;
    const Vec sol = lu.solve(rhs);
    const Vec x = sol.head(n);
    const Vec mu = sol.tail(k);
    if (mu.size() && mu.minCoeff() < -1e-9) continue;
    if (((A * x - b).array() > 1e-9).any()) continue;
    const double obj = 0.5 * x.dot(P * x) + q.dot(x);
    if (obj < best_obj) {
      best_obj = obj;
      best.x = x;
      best.found = true;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("textbook scalar problem") {
  // min 0.5 v^2 subject to v >= 1
  Mat P(1, 1), A(1, 1);
  P << 1;
  A << -1;
  Vec q(1), b(1);
  q << 0;
  b << -1;
  const auto qp = make_qp(P, q, A, b);
  const auto sol = solve(qp);
  REQUIRE(sol.status == QPStatus::Solved);
  CHECK(sol.v[0] == Catch::Approx(1.0).margin(1e-8));
  const auto res = kkt_residuals(qp, sol.v, sol.y);
  CHECK(res.primal <= 1e-8);
  CHECK(res.dual <= 1e-8);
  CHECK(res.complementarity <= 1e-6);
}

TEST_CASE("unconstrained minimum") {
  Rng r = make_rng(1);
  Mat M(5, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) M(i, j) = r.uniform(-1, 1);
  const Mat P = M.transpose() * M + Mat::Identity(5, 5);
  Vec q(5);
  for (int i = 0; i < 5; ++i) q[i] = r.uniform(-2, 2);
  const auto qp = make_qp(P, q, Mat(0, 5), Vec(0));
  const auto sol = solve(qp);
  REQUIRE(sol.status == QPStatus::Solved);
  const Vec expect = P.ldlt().solve(-q);
  CHECK((sol.v - expect).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("kkt residual definitions") {
  Mat P(2, 2);
  P << 1, 0, 0, 1;
  Vec q = Vec::Zero(2);
  Mat A(2, 2);
  A << 1, 0, 0, 1;
  Vec b(2);
  b << -1, -2;
  const auto qp = make_qp(P, q, A, b);
  SECTION("violation at the origin is the worst margin") {
    const auto res = kkt_residuals(qp, Vec::Zero(2), Vec());
    CHECK(res.primal == Catch::Approx(2.0));
    CHECK(res.dual == 0.0);
  }
  SECTION("random points match a direct recomputation") {
    Rng r = make_rng(2);
    for (int t = 0; t < 20; ++t) {
      Vec v(2), y(2);
      v << r.uniform(-3, 3), r.uniform(-3, 3);
      y << r.uniform(0, 2), r.uniform(0, 2);
      const auto res = kkt_residuals(qp, v, y);
      const Vec s = A * v - b;
      CHECK(res.primal == Catch::Approx(std::max(0.0, s.maxCoeff())));
      CHECK(res.dual == Catch::Approx((P * v + q + A.transpose() * y).cwiseAbs().maxCoeff()));
      CHECK(res.complementarity == Catch::Approx((y.cwiseProduct(s)).cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("random programs match the exhaustive active-set oracle") {
  Rng r = make_rng(3);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(r.below(7));   // up to 8
    const int m = 1 + static_cast<int>(r.below(12));  // up to 12
    Mat M(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) M(i, j) = r.uniform(-1, 1);
    const Mat P = M.transpose() * M + 0.1 * Mat::Identity(n, n);
    Vec q(n);
    for (int i = 0; i < n; ++i) q[i] = r.uniform(-1, 1);
    Mat A(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) A(i, j) = r.uniform(-1, 1);
    // keep a random interior point feasible so the problem is well posed
    Vec x0(n);
    for (int i = 0; i < n; ++i) x0[i] = r.uniform(-1, 1);
    const Vec b = A * x0 + Vec::Constant(m, 0.25);

    const auto oracle = active_set_oracle(P, q, A, b);
    if (!oracle.found) continue;
    ++checked;
    const auto sol = solve(make_qp(P, q, A, b));
    REQUIRE(sol.status == QPStatus::Solved);
    CHECK((sol.v - oracle.x).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(sol.primal_residual <= 1e-8);
    CHECK(sol.dual_residual <= 1e-8);
  }
  CHECK(checked >= 190);  // nearly all random programs have an oracle optimum
}

TEST_CASE("determinism: identical inputs give identical runs") {
  Rng r = make_rng(4);
  const int n = 6, m = 8;
  Mat M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = r.uniform(-1, 1);
  const Mat P = M.transpose() * M + 0.2 * Mat::Identity(n, n);
  Vec q(n);
  for (int i = 0; i < n; ++i) q[i] = r.uniform(-1, 1);
  Mat A(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = r.uniform(-1, 1);
  const Vec b = Vec::Constant(m, 1.0);
  const auto qp = make_qp(P, q, A, b);
  const auto s1 = solve(qp);
  const auto s2 = solve(qp);
  CHECK(s1.iterations == s2.iterations);
  CHECK(memcmp(s1.v.data(), s2.v.data(), sizeof(double) * n) == 0);
}

TEST_CASE("infeasible program is certified") {
  // x <= 0 and -x <= -1 cannot both hold
  Mat P(1, 1);
  P << 1;
  Vec q(1);
  q << 0;
  Mat A(2, 1);
  A << 1, -1;
  Vec b(2);
  b << 0, -1;
  const auto sol = solve(make_qp(P, q, A, b));
  CHECK(sol.status == QPStatus::Infeasible);
  CHECK(sol.message.find("worst row") != std::string::npos);
}

TEST_CASE("unbounded program is detected") {
  // zero curvature along x[0], objective pushes it down, no constraint stops it
  Mat P = Mat::Zero(2, 2);
  P(1, 1) = 1.0;
  Vec q(2);
  q << 1, 0;  // pushes x0 toward -inf
  Mat A(1, 2);
  A << 1, 0;  // caps x0 from above only
  Vec b(1);
  b << 1;
  const auto sol = solve(make_qp(P, q, A, b));
  CHECK(sol.status == QPStatus::Unbounded);
}

TEST_CASE("equality rows are honored") {
  // min ||v||^2 with v0 + v1 = 1
  QuadraticProgram qp;
  Mat P = Mat::Identity(2, 2);
  qp.P = P.sparseView();
  qp.q = Vec::Zero(2);
  qp.A_in = SpMat(0, 2);
  qp.b_in = Vec(0);
  Mat E(1, 2);
  E << 1, 1;
  qp.A_eq = E.sparseView();
  qp.b_eq = Vec::Constant(1, 1.0);
  const auto sol = solve(qp);
  REQUIRE(sol.status == QPStatus::Solved);
  CHECK(sol.v[0] == Catch::Approx(0.5).margin(1e-7));
  CHECK(sol.v[1] == Catch::Approx(0.5).margin(1e-7));
}

TEST_CASE("warm start is accepted") {
  Mat P = Mat::Identity(3, 3);
  Vec q(3);
  q << -1, -2, -3;
  const auto qp = make_qp(P, q, Mat(0, 3), Vec(0));
  QPSettings st;
  st.x0 = Vec::Constant(3, 0.5);
  const auto sol = solve(qp, st);
  REQUIRE(sol.status == QPStatus::Solved);
  CHECK(sol.v[2] == Catch::Approx(3.0).margin(1e-7));
}
