#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/SparseCholesky>

#include "grdfit/assembly.hpp"

namespace grdfit {

enum class QPStatus { Solved, MaxIterations, Infeasible, Unbounded };

inline const char* to_string(QPStatus s) {
  switch (s) {
    case QPStatus::Solved: return "solved";
    case QPStatus::MaxIterations: return "max_iterations";
    case QPStatus::Infeasible: return "infeasible";
    case QPStatus::Unbounded: return "unbounded";
  }
  return "?";
}

struct QPSettings {
  double tol_primal = 1e-8;
  double tol_dual = 1e-8;
  long max_iter = 1000000;
  double sigma = 1e-6;
  double alpha = 1.6;
  double rho0 = 0.1;
  int check_every = 25;
  bool polish = true;
  bool adaptive_rho = true;
  Vec x0;  // optional initial iterate
};

struct QPSolution {
  Vec v;       // primal
  Vec y;       // multipliers for [A_in; A_eq]
  QPStatus status = QPStatus::MaxIterations;
  double objective = 0.0;  // 0.5 v'Pv + q'v + constant
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  long iterations = 0;
  bool polished = false;
  std::string message;
};

struct KKTResiduals {
  double primal = 0.0;
  double dual = 0.0;
  double complementarity = 0.0;
};

/// Stationarity/feasibility/complementarity of (v, y) for the program.
/// y may be empty (treated as zero multipliers).
inline KKTResiduals kkt_residuals(const QuadraticProgram& qp, const Vec& v, const Vec& y_in = Vec()) {
  const Eigen::Index mi = qp.A_in.rows(), me = qp.A_eq.rows();
  Vec y = y_in;
  if (y.size() == 0) y = Vec::Zero(mi + me);
  KKTResiduals r;
  Vec grad = qp.P * v + qp.q;
  if (mi) grad += qp.A_in.transpose() * y.head(mi);
  if (me) grad += qp.A_eq.transpose() * y.tail(me);
  r.dual = grad.size() ? grad.cwiseAbs().maxCoeff() : 0.0;
  if (mi) {
    const Vec s = qp.A_in * v - qp.b_in;
    r.primal = std::max(0.0, s.maxCoeff());
    r.complementarity = (y.head(mi).cwiseProduct(s)).cwiseAbs().maxCoeff();
  }
  if (me) {
    const Vec s = qp.A_eq * v - qp.b_eq;
    r.primal = std::max(r.primal, s.cwiseAbs().maxCoeff());
  }
  return r;
}

namespace detail {

struct StackedConstraints {
  SpMat A;      // [A_in; A_eq]
  Vec lo, hi;   // row bounds; inequalities have lo = -inf
  Eigen::Index m_in = 0;
};

inline StackedConstraints stack_constraints(const QuadraticProgram& qp) {
  StackedConstraints s;
  s.m_in = qp.A_in.rows();
  const Eigen::Index m = qp.A_in.rows() + qp.A_eq.rows();
  const Eigen::Index n = qp.q.size();
  std::vector<Triplet> tp;
  for (int k = 0; k < qp.A_in.outerSize(); ++k)
    for (SpMat::InnerIterator it(qp.A_in, k); it; ++it)
      tp.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  for (int k = 0; k < qp.A_eq.outerSize(); ++k)
    for (SpMat::InnerIterator it(qp.A_eq, k); it; ++it)
      tp.emplace_back(static_cast<int>(it.row() + s.m_in), static_cast<int>(it.col()), it.value());
  s.A = SpMat(m, n);
  s.A.setFromTriplets(tp.begin(), tp.end());
  s.lo = Vec::Constant(m, -std::numeric_limits<double>::infinity());
  s.hi = Vec(m);
  s.hi.head(s.m_in) = qp.b_in;
  if (qp.A_eq.rows()) {
    s.lo.tail(qp.A_eq.rows()) = qp.b_eq;
    s.hi.tail(qp.A_eq.rows()) = qp.b_eq;
  }
  return s;
}

// modified Ruiz equilibration of [[P, A'],[A, 0]] plus cost scaling
struct Scaling {
  Vec D, E;
  double c = 1.0;
};

inline Scaling ruiz(SpMat& P, Vec& q, SpMat& A, Vec& lo, Vec& hi) {
  const Eigen::Index n = q.size(), m = A.rows();
  Scaling sc;
  sc.D = Vec::Ones(n);
  sc.E = Vec::Ones(m);
  for (int pass = 0; pass < 10; ++pass) {
    Vec dn = Vec::Zero(n), em = Vec::Zero(m);
    for (int k = 0; k < P.outerSize(); ++k)
      for (SpMat::InnerIterator it(P, k); it; ++it) {
        dn[it.col()] = std::max(dn[it.col()], std::abs(it.value()));
      }
    for (int k = 0; k < A.outerSize(); ++k)
      for (SpMat::InnerIterator it(A, k); it; ++it) {
        dn[it.col()] = std::max(dn[it.col()], std::abs(it.value()));
        em[it.row()] = std::max(em[it.row()], std::abs(it.value()));
      }
    for (Eigen::Index i = 0; i < n; ++i) dn[i] = dn[i] > 1e-12 ? 1.0 / std::sqrt(dn[i]) : 1.0;
    for (Eigen::Index i = 0; i < m; ++i) em[i] = em[i] > 1e-12 ? 1.0 / std::sqrt(em[i]) : 1.0;
    // P <- Dn P Dn, A <- Em A Dn, q <- Dn q
    for (int k = 0; k < P.outerSize(); ++k)
      for (SpMat::InnerIterator it(P, k); it; ++it) it.valueRef() *= dn[it.row()] * dn[it.col()];
    for (int k = 0; k < A.outerSize(); ++k)
      for (SpMat::InnerIterator it(A, k); it; ++it) it.valueRef() *= em[it.row()] * dn[it.col()];
    q = q.cwiseProduct(dn);
    for (Eigen::Index i = 0; i < m; ++i) {
      if (std::isfinite(lo[i])) lo[i] *= em[i];
      hi[i] *= em[i];
    }
    sc.D = sc.D.cwiseProduct(dn);
    sc.E = sc.E.cwiseProduct(em);
  }
  // cost normalization
  double pnorm = 0.0;
  for (int k = 0; k < P.outerSize(); ++k)
    for (SpMat::InnerIterator it(P, k); it; ++it) pnorm = std::max(pnorm, std::abs(it.value()));
  const double qn = q.size() ? q.cwiseAbs().maxCoeff() : 0.0;
  const double denom = std::max(1e-12, std::max(pnorm, qn));
  sc.c = 1.0 / denom;
  P *= sc.c;
  q *= sc.c;
  return sc;
}

}  // namespace detail

/// Convex-QP solver: operator splitting (ADMM) with diagonal equilibration,
/// over-relaxation, adaptive step size, infeasibility certificates and an
/// active-set polish step that refines converged iterates to the requested
/// KKT tolerances. Deterministic for fixed inputs and settings.
inline QPSolution solve(const QuadraticProgram& qp, const QPSettings& st = {}) {
  const Eigen::Index n = qp.q.size();
  QPSolution sol;
  sol.v = Vec::Zero(n);

  detail::StackedConstraints C = detail::stack_constraints(qp);
  const Eigen::Index m = C.A.rows();
  sol.y = Vec::Zero(m);

  const auto unscaled_residuals = [&](const Vec& x, const Vec& y, double& rp, double& rd) {
    const Vec ax = C.A * x;
    rp = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      rp = std::max(rp, ax[i] - C.hi[i]);
      if (std::isfinite(C.lo[i])) rp = std::max(rp, C.lo[i] - ax[i]);
    }
    rp = std::max(rp, 0.0);
    const Vec g = qp.P * x + qp.q + C.A.transpose() * y;
    rd = g.size() ? g.cwiseAbs().maxCoeff() : 0.0;
  };

  const auto finish = [&](Vec x, Vec y, QPStatus status, long iters, bool polished) {
    sol.v = std::move(x);
    sol.y = std::move(y);
    sol.status = status;
    sol.iterations = iters;
    sol.polished = polished;
    unscaled_residuals(sol.v, sol.y, sol.primal_residual, sol.dual_residual);
    sol.objective = 0.5 * sol.v.dot(qp.P * sol.v) + qp.q.dot(sol.v) + qp.constant;
    if (status == QPStatus::Infeasible && m > 0) {
      // localize: report the most violated tagged rows at the last iterate
      const Vec viol = (C.A * sol.v - C.hi).cwiseMax(0.0);
      Eigen::Index worst = 0;
      viol.maxCoeff(&worst);
      std::ostringstream os;
      os << "infeasible; worst row ";
      os << (worst < static_cast<Eigen::Index>(qp.tags.size()) ? qp.tags[worst].str()
                                                               : std::to_string(worst));
      sol.message = os.str();
    }
    return sol;
  };

  // unconstrained case: a regularized direct solve with refinement
  if (m == 0) {
    SpMat Preg = qp.P;
    double pmax = 1e-12;
    for (int k = 0; k < Preg.outerSize(); ++k)
      for (SpMat::InnerIterator it(Preg, k); it; ++it) pmax = std::max(pmax, std::abs(it.value()));
    const double delta = 1e-12 * pmax;
    SpMat I(n, n);
    I.setIdentity();
    Preg = Preg + delta * I;
    Eigen::SimplicialLDLT<SpMat> ldlt(Preg);
    if (ldlt.info() != Eigen::Success) return finish(Vec::Zero(n), Vec(), QPStatus::Unbounded, 0, false);
    Vec x = ldlt.solve(-qp.q);
    for (int r = 0; r < 3; ++r) x += ldlt.solve(-(qp.P * x + qp.q));
    double rp, rd;
    unscaled_residuals(x, Vec::Zero(0), rp, rd);
    const QPStatus stt = rd <= st.tol_dual ? QPStatus::Solved : QPStatus::MaxIterations;
    return finish(std::move(x), Vec::Zero(0), stt, 1, false);
  }

  // scaled copies
  SpMat Pb = qp.P;
  Vec qb = qp.q;
  SpMat Ab = C.A;
  Vec lob = C.lo, hib = C.hi;
  const detail::Scaling sc = detail::ruiz(Pb, qb, Ab, lob, hib);

  Vec rho = Vec::Constant(m, st.rho0);
  for (Eigen::Index i = C.m_in; i < m; ++i) rho[i] = st.rho0 * 1e3;  // stiff equalities

  const auto factor_kkt = [&](const Vec& rhov) {
    std::vector<Triplet> tp;
    for (int k = 0; k < Pb.outerSize(); ++k)
      for (SpMat::InnerIterator it(Pb, k); it; ++it)
        tp.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    for (Eigen::Index i = 0; i < n; ++i) tp.emplace_back(static_cast<int>(i), static_cast<int>(i), st.sigma);
    for (int k = 0; k < Ab.outerSize(); ++k)
      for (SpMat::InnerIterator it(Ab, k); it; ++it) {
        tp.emplace_back(static_cast<int>(n + it.row()), static_cast<int>(it.col()), it.value());
        tp.emplace_back(static_cast<int>(it.col()), static_cast<int>(n + it.row()), it.value());
      }
    for (Eigen::Index i = 0; i < m; ++i)
      tp.emplace_back(static_cast<int>(n + i), static_cast<int>(n + i), -1.0 / rhov[i]);
    SpMat K(n + m, n + m);
    K.setFromTriplets(tp.begin(), tp.end());
    return K;
  };

  Eigen::SimplicialLDLT<SpMat> kkt;
  kkt.compute(factor_kkt(rho));
  if (kkt.info() != Eigen::Success)
    return finish(Vec::Zero(n), Vec::Zero(m), QPStatus::MaxIterations, 0, false);

  Vec x = st.x0.size() == n ? Vec(sc.D.cwiseInverse().cwiseProduct(st.x0)) : Vec::Zero(n);
  Vec z = Ab * x, y = Vec::Zero(m);
  Vec rhs(n + m), xz(n + m);
  long last_rho_update = 0;

  const Eigen::SparseMatrix<double, Eigen::RowMajor> Arow = C.A;

  const auto polish_try = [&](QPSolution& out) -> bool {
    // active rows: at (or beyond) their bound, or carrying a multiplier
    const Vec ax = C.A * out.v;
    std::vector<int> act;
    for (Eigen::Index i = 0; i < m; ++i) {
      const bool eq = std::isfinite(C.lo[i]);
      const double gap = C.hi[i] - ax[i];
      if (eq || gap < 1e-7 * std::max(1.0, std::abs(C.hi[i])) || out.y[i] > 1e-9) act.push_back(static_cast<int>(i));
    }
    if (act.empty()) return false;

    Vec xp, yp;
    // equality-KKT solve on the active set; rows whose multipliers come out
    // clearly negative are pruned and the solve repeated
    for (int pass = 0; pass < 12; ++pass) {
      const Eigen::Index ma = static_cast<Eigen::Index>(act.size());
      if (ma == 0) return false;
      std::vector<Triplet> ta;
      for (Eigen::Index a = 0; a < ma; ++a)
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(Arow, act[a]); it; ++it)
          ta.emplace_back(static_cast<int>(a), static_cast<int>(it.col()), it.value());
      SpMat Aact(ma, n);
      Aact.setFromTriplets(ta.begin(), ta.end());
      Vec bact(ma);
      for (Eigen::Index a = 0; a < ma; ++a) bact[a] = C.hi[act[a]];

      std::vector<Triplet> tp;
      for (int k = 0; k < qp.P.outerSize(); ++k)
        for (SpMat::InnerIterator it(qp.P, k); it; ++it)
          tp.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
      const double delta = 1e-9;
      for (Eigen::Index i = 0; i < n; ++i)
        tp.emplace_back(static_cast<int>(i), static_cast<int>(i), delta);
      for (int k = 0; k < Aact.outerSize(); ++k)
        for (SpMat::InnerIterator it(Aact, k); it; ++it) {
          tp.emplace_back(static_cast<int>(n + it.row()), static_cast<int>(it.col()), it.value());
          tp.emplace_back(static_cast<int>(it.col()), static_cast<int>(n + it.row()), it.value());
        }
      for (Eigen::Index a = 0; a < ma; ++a)
        tp.emplace_back(static_cast<int>(n + a), static_cast<int>(n + a), -delta);
      SpMat K(n + ma, n + ma);
      K.setFromTriplets(tp.begin(), tp.end());
      Eigen::SimplicialLDLT<SpMat> f(K);
      if (f.info() != Eigen::Success) return false;
      Vec rhs2(n + ma), sol2;
      rhs2.head(n) = -qp.q;
      rhs2.tail(ma) = bact;
      sol2 = f.solve(rhs2);
      // iterative refinement against the unregularized KKT
      for (int r = 0; r < 3; ++r) {
        Vec resid(n + ma);
        const Vec xa = sol2.head(n);
        const Vec ya = sol2.tail(ma);
        resid.head(n) = -qp.q - qp.P * xa - Aact.transpose() * ya;
        resid.tail(ma) = bact - Aact * xa;
        sol2 += f.solve(resid);
      }
      xp = sol2.head(n);
      yp = Vec::Zero(m);
      std::vector<int> keep;
      bool pruned = false;
      for (Eigen::Index a = 0; a < ma; ++a) {
        const int row = act[a];
        double val = sol2[n + a];
        if (!std::isfinite(C.lo[row]) && val < 0.0) {
          if (val < -1e-7 && pass + 1 < 12) {
            pruned = true;
            continue;  // wrong guess: this row is not active at the optimum
          }
          val = 0.0;  // residual test below rejects any harmful clip
        }
        yp[row] = val;
        keep.push_back(row);
      }
      if (!pruned) break;
      act = std::move(keep);
    }

    double rp, rd;
    unscaled_residuals(xp, yp, rp, rd);
    if (rp <= std::max(out.primal_residual, st.tol_primal) &&
        rd <= std::max(out.dual_residual, st.tol_dual)) {
      out.v = std::move(xp);
      out.y = std::move(yp);
      out.primal_residual = rp;
      out.dual_residual = rd;
      out.polished = true;
      return rp <= st.tol_primal && rd <= st.tol_dual;
    }
    return false;
  };

  double rp = 0.0, rd = 0.0;
  for (long it = 1; it <= st.max_iter; ++it) {
    rhs.head(n) = st.sigma * x - qb;
    rhs.tail(m) = z - y.cwiseQuotient(rho);
    xz = kkt.solve(rhs);
    const Vec xt = xz.head(n);
    const Vec zt = z + (xz.tail(m) - y).cwiseQuotient(rho);
    const Vec x_prev = x, y_prev = y;
    x = st.alpha * xt + (1.0 - st.alpha) * x;
    const Vec zr = st.alpha * zt + (1.0 - st.alpha) * z + y.cwiseQuotient(rho);
    z = zr.cwiseMax(lob).cwiseMin(hib);
    y = rho.cwiseProduct(zr - z);

    if (it % st.check_every == 0 || it == st.max_iter) {
      // unscale
      const Vec xu = sc.D.cwiseProduct(x);
      const Vec yu = sc.E.cwiseProduct(y) / sc.c;
      unscaled_residuals(xu, yu, rp, rd);
      const bool within = rp <= st.tol_primal && rd <= st.tol_dual;
      // refine before returning: the splitting iterates satisfy the
      // residual test long before weakly determined directions settle
      if (st.polish && (within || (rp <= 1e3 * st.tol_primal && rd <= 1e3 * st.tol_dual))) {
        QPSolution cand;
        cand.v = xu;
        cand.y = yu;
        cand.primal_residual = rp;
        cand.dual_residual = rd;
        if (polish_try(cand))
          return finish(cand.v, cand.y, QPStatus::Solved, it, true);
      }
      if (within) return finish(xu, yu, QPStatus::Solved, it, false);

      // infeasibility certificates on the scaled deltas
      const Vec dy = y - y_prev;
      const double dyn = dy.size() ? dy.cwiseAbs().maxCoeff() : 0.0;
      if (dyn > 1e-14) {
        const double atd = (Ab.transpose() * dy).cwiseAbs().maxCoeff();
        double support = 0.0;
        bool valid = true;
        for (Eigen::Index i = 0; i < m; ++i) {
          if (dy[i] > 0)
            support += hib[i] * dy[i];
          else if (std::isfinite(lob[i]))
            support += lob[i] * dy[i];
          else if (dy[i] < -1e-10 * dyn)
            valid = false;  // no certificate through an unbounded side
        }
        if (valid && atd <= 1e-10 * dyn && support <= -1e-10 * dyn)
          return finish(sc.D.cwiseProduct(x), sc.E.cwiseProduct(y) / sc.c, QPStatus::Infeasible, it, false);
      }
      const Vec dx = x - x_prev;
      const double dxn = dx.size() ? dx.cwiseAbs().maxCoeff() : 0.0;
      if (dxn > 1e-14) {
        const double pdx = (Pb * dx).cwiseAbs().maxCoeff();
        const double qdx = qb.dot(dx);
        const Vec adx = Ab * dx;
        bool cone_ok = true;
        for (Eigen::Index i = 0; i < m; ++i) {
          if (adx[i] > 1e-10 * dxn) cone_ok = false;                                // hi side blocks
          if (std::isfinite(lob[i]) && std::abs(adx[i]) > 1e-10 * dxn) cone_ok = false;  // equality
        }
        if (cone_ok && pdx <= 1e-10 * dxn && qdx <= -1e-10 * dxn)
          return finish(sc.D.cwiseProduct(x), sc.E.cwiseProduct(y) / sc.c, QPStatus::Unbounded, it, false);
      }

      // adaptive step size
      if (st.adaptive_rho && it - last_rho_update >= 10L * st.check_every && rp > 0 && rd > 0) {
        const double ratio = std::sqrt(rp / std::max(rd, 1e-16));
        if (ratio > 5.0 || ratio < 0.2) {
          const double f = std::clamp(ratio, 1e-3, 1e3);
          rho *= f;
          for (Eigen::Index i = 0; i < m; ++i) rho[i] = std::clamp(rho[i], 1e-6, 1e6);
          kkt.compute(factor_kkt(rho));
          last_rho_update = it;
        }
      }
    }
  }

  const Vec xu = sc.D.cwiseProduct(x);
  const Vec yu = sc.E.cwiseProduct(y) / sc.c;
  QPSolution best;
  best.v = xu;
  best.y = yu;
  unscaled_residuals(xu, yu, best.primal_residual, best.dual_residual);
  if (st.polish) polish_try(best);
  const bool ok = best.primal_residual <= st.tol_primal && best.dual_residual <= st.tol_dual;
  return finish(best.v, best.y, ok ? QPStatus::Solved : QPStatus::MaxIterations, st.max_iter,
                best.polished);
}

}  // namespace grdfit
