#pragma once

#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "grdfit/local_systems.hpp"

namespace grdfit {

/// Global variable order: per-vertex (dx, dy) pairs, then one variable per
/// undirected edge (or three per triangle in the explicit testing mode), then
/// six slacks per triangle. Interior edges are shared with opposite signs by
/// their two triangles, which realizes the cross-boundary matching without
/// equality rows.
struct UnknownLayout {
  int n_vertices = 0, n_edges = 0, n_triangles = 0;
  bool with_slacks = true;
  bool explicit_edge_vars = false;

  int dx(int v) const { return 2 * v; }
  int dy(int v) const { return 2 * v + 1; }
  int edge_var(int e) const { return 2 * n_vertices + e; }
  int tri_edge_var(int t, int i) const { return 2 * n_vertices + 3 * t + i; }
  int d_size() const { return 2 * n_vertices + (explicit_edge_vars ? 3 * n_triangles : n_edges); }
  int slack(int t, int s) const { return d_size() + 6 * t + s; }
  int size() const { return d_size() + (with_slacks ? 6 * n_triangles : 0); }
};

struct RowTag {
  enum class Kind { VertexFan, InnerRing, Center, MidEdge, SlackSign };
  int triangle = -1;
  Kind kind = Kind::VertexFan;
  int sub = 0;  // vertex / slack index within the triangle

  bool hard() const { return kind == Kind::VertexFan || kind == Kind::Center; }
  std::string str() const {
    static const char* names[] = {"vertex_fan", "inner_ring", "center", "mid_edge", "slack_sign"};
    return "tri" + std::to_string(triangle) + ":" + names[static_cast<int>(kind)] + "[" +
           std::to_string(sub) + "]";
  }
};

struct QuadraticProgram {
  SpMat P;   // objective 0.5 v'Pv + q'v + constant
  Vec q;
  SpMat A_in;  // A_in v <= b_in
  Vec b_in;
  SpMat A_eq;  // A_eq v == b_eq (only in the explicit edge-variable mode)
  Vec b_eq;
  double constant = 0.0;
  std::vector<RowTag> tags;  // one per inequality row
  UnknownLayout layout;
};

struct AssemblyOptions {
  double lambda = 1e-4;
  bool monotone = true;        // emit the monotonicity rows
  bool slacks = true;          // hinge-relax the soft rows
  bool explicit_edge_vars = false;  // equality rows instead of sign sharing
};

namespace detail {

/// Per-triangle unknown vector gathered back out of the global solution.
inline Eigen::Matrix<double, 9, 1> gather_local_d(const UnknownLayout& L, const MacroTriangle& mt,
                                                  int t, const Vec& v) {
  Eigen::Matrix<double, 9, 1> d;
  for (int i = 0; i < 3; ++i) {
    d(2 * i) = v[L.dx(mt.v[i])];
    d(2 * i + 1) = v[L.dy(mt.v[i])];
    d(6 + i) = L.explicit_edge_vars ? v[L.tri_edge_var(t, i)]
                                    : mt.edge_sign[i] * v[L.edge_var(mt.edge_id[i])];
  }
  return d;
}

}  // namespace detail

/// Scatter the per-triangle systems into one convex QP over the shared
/// unknowns. z holds one value per site, in site order.
inline QuadraticProgram assemble_global(const Triangulation& tr, const Vec& z,
                                        const AssemblyOptions& opt = {}) {
  using detail::CYC_J;
  using detail::CYC_K;
  if (z.size() != static_cast<Eigen::Index>(tr.sites().size()))
    throw SingularAssembly("need exactly one value per site");

  QuadraticProgram qp;
  qp.layout.n_vertices = static_cast<int>(tr.sites().size());
  qp.layout.n_edges = static_cast<int>(tr.edges().size());
  qp.layout.n_triangles = static_cast<int>(tr.triangles().size());
  qp.layout.with_slacks = opt.monotone && opt.slacks;
  qp.layout.explicit_edge_vars = opt.explicit_edge_vars;
  const UnknownLayout& L = qp.layout;
  const int n = L.size();

  std::vector<Triplet> pt, at, et;
  qp.q = Vec::Zero(n);
  std::vector<double> b_rows;
  std::vector<double> beq_rows;
  int arow = 0, erow = 0;

  for (int t = 0; t < L.n_triangles; ++t) {
    const auto& mt = tr.triangles()[t];
    const auto v = tr.triangle_points(t);
    const std::array<double, 3> zt{z[mt.v[0]], z[mt.v[1]], z[mt.v[2]]};
    const LocalSystem ls = build_local_system(v, mt.edge, zt);

    // local column -> (global column, sign)
    std::array<int, 9> col{};
    std::array<double, 9> sgn{};
    for (int i = 0; i < 3; ++i) {
      col[2 * i] = L.dx(mt.v[i]);
      col[2 * i + 1] = L.dy(mt.v[i]);
      sgn[2 * i] = sgn[2 * i + 1] = 1.0;
      if (opt.explicit_edge_vars) {
        col[6 + i] = L.tri_edge_var(t, i);
        sgn[6 + i] = 1.0;
      } else {
        col[6 + i] = L.edge_var(mt.edge_id[i]);
        sgn[6 + i] = mt.edge_sign[i];
      }
    }

    const Eigen::Matrix<double, 9, 9> M = ls.R.transpose() * (ls.U + ls.U.transpose()) * ls.R;
    const Eigen::Matrix<double, 9, 1> ql =
        ls.R.transpose() * ((ls.U + ls.U.transpose()) * ls.f + ls.w);
    for (int r = 0; r < 9; ++r) {
      qp.q[col[r]] += sgn[r] * ql(r);
      for (int c = 0; c < 9; ++c)
        if (M(r, c) != 0.0) pt.emplace_back(col[r], col[c], sgn[r] * sgn[c] * M(r, c));
    }
    qp.constant += (ls.f.transpose() * ls.U * ls.f).value() + ls.w.dot(ls.f) + ls.constant;

    if (opt.monotone) {
      const Eigen::Matrix<double, 10, 9> GR = ls.G * ls.R;
      const Eigen::Matrix<double, 10, 1> rhs = ls.h - ls.G * ls.f;
      Eigen::Matrix<double, 10, 6> J1;
      Eigen::Matrix<double, 6, 6> J2;
      build_robust_blocks(J1, J2);
      for (int r = 0; r < 10; ++r) {
        for (int c = 0; c < 9; ++c)
          if (GR(r, c) != 0.0) at.emplace_back(arow, col[c], sgn[c] * GR(r, c));
        if (L.with_slacks)
          for (int s = 0; s < 6; ++s)
            if (J1(r, s) != 0.0) at.emplace_back(arow, L.slack(t, s), J1(r, s));
        b_rows.push_back(rhs(r));
        RowTag tag;
        tag.triangle = t;
        if (r < 3) {
          tag.kind = RowTag::Kind::VertexFan;
          tag.sub = r;
        } else if (r < 6) {
          tag.kind = RowTag::Kind::InnerRing;
          tag.sub = r - 3;
        } else if (r == 6) {
          tag.kind = RowTag::Kind::Center;
          tag.sub = 0;
        } else {
          tag.kind = RowTag::Kind::MidEdge;
          tag.sub = r - 7;
        }
        qp.tags.push_back(tag);
        ++arow;
      }
      if (L.with_slacks) {
        for (int s = 0; s < 6; ++s) {
          at.emplace_back(arow, L.slack(t, s), 1.0);  // xi <= 0
          b_rows.push_back(0.0);
          qp.tags.push_back({t, RowTag::Kind::SlackSign, s});
          ++arow;
          qp.q[L.slack(t, s)] += -opt.lambda;
        }
      }
    }
  }

  if (opt.explicit_edge_vars) {
    // one matching row per interior edge
    for (int e = 0; e < L.n_edges; ++e) {
      const Edge& ed = tr.edges()[e];
      if (!ed.interior()) continue;
      int slots[2] = {-1, -1};
      for (int s = 0; s < 2; ++s) {
        const auto& mt = tr.triangles()[ed.tri[s]];
        for (int i = 0; i < 3; ++i)
          if (mt.edge_id[i] == e) slots[s] = i;
      }
      et.emplace_back(erow, L.tri_edge_var(ed.tri[0], slots[0]), 1.0);
      et.emplace_back(erow, L.tri_edge_var(ed.tri[1], slots[1]), 1.0);
      beq_rows.push_back(0.0);
      ++erow;
    }
  }

  qp.P = SpMat(n, n);
  qp.P.setFromTriplets(pt.begin(), pt.end());
  qp.A_in = SpMat(arow, n);
  qp.A_in.setFromTriplets(at.begin(), at.end());
  qp.b_in = Eigen::Map<Vec>(b_rows.data(), static_cast<Eigen::Index>(b_rows.size()));
  qp.A_eq = SpMat(erow, n);
  qp.A_eq.setFromTriplets(et.begin(), et.end());
  qp.b_eq = Eigen::Map<Vec>(beq_rows.data(), static_cast<Eigen::Index>(beq_rows.size()));
  return qp;
}

/// Plain-text dump (one row per line, space-separated, 17 significant digits)
/// for diffing against external computations.
inline void dump_program(const QuadraticProgram& qp, std::ostream& os) {
  const auto mat = [&](const char* name, const SpMat& m) {
    os << name << " " << m.rows() << " " << m.cols() << "\n";
    const Mat d = Mat(m);
    for (Eigen::Index r = 0; r < d.rows(); ++r) {
      for (Eigen::Index c = 0; c < d.cols(); ++c) os << (c ? " " : "") << d(r, c);
      os << "\n";
    }
  };
  const auto vec = [&](const char* name, const Vec& v) {
    os << name << " " << v.size() << "\n";
    for (Eigen::Index i = 0; i < v.size(); ++i) os << (i ? " " : "") << v[i];
    os << "\n";
  };
  os << std::setprecision(17);
  mat("P", qp.P);
  vec("q", qp.q);
  mat("A_in", qp.A_in);
  vec("b_in", qp.b_in);
  mat("A_eq", qp.A_eq);
  vec("b_eq", qp.b_eq);
  os << "constant " << qp.constant << "\n";
  os << "row_tags " << qp.tags.size() << "\n";
  for (size_t i = 0; i < qp.tags.size(); ++i) os << (i ? " " : "") << qp.tags[i].str();
  os << "\n";
}

}  // namespace grdfit
