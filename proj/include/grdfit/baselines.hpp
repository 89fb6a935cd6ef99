#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "grdfit/sampler.hpp"
#include "grdfit/surface.hpp"

namespace grdfit {

enum class ModelKind { Reciprocal, Logarithmic, MonotoneHermite, PlainCT, Ramct };

inline const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Reciprocal: return "reciprocal";
    case ModelKind::Logarithmic: return "logarithmic";
    case ModelKind::MonotoneHermite: return "pchip";
    case ModelKind::PlainCT: return "ct";
    case ModelKind::Ramct: return "ramct";
  }
  return "?";
}

inline ModelKind model_kind_from(const std::string& s) {
  if (s == "reciprocal") return ModelKind::Reciprocal;
  if (s == "logarithmic") return ModelKind::Logarithmic;
  if (s == "pchip") return ModelKind::MonotoneHermite;
  if (s == "ct") return ModelKind::PlainCT;
  if (s == "ramct") return ModelKind::Ramct;
  throw ParseError("unknown model kind '" + s + "'");
}

namespace detail {

// shape-preserving cubic Hermite slopes (Fritsch-Carlson weighting)
inline std::vector<double> pchip_slopes(const std::vector<double>& x, const std::vector<double>& z) {
  const size_t n = x.size();
  std::vector<double> m(n, 0.0);
  if (n == 2) {
    m[0] = m[1] = (z[1] - z[0]) / (x[1] - x[0]);
    return m;
  }
  std::vector<double> h(n - 1), d(n - 1);
  for (size_t i = 0; i + 1 < n; ++i) {
    h[i] = x[i + 1] - x[i];
    d[i] = (z[i + 1] - z[i]) / h[i];
  }
  for (size_t i = 1; i + 1 < n; ++i) {
    if (d[i - 1] == 0.0 || d[i] == 0.0 || (d[i - 1] > 0) != (d[i] > 0)) {
      m[i] = 0.0;
    } else {
      const double w1 = 2.0 * h[i] + h[i - 1], w2 = h[i] + 2.0 * h[i - 1];
      m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
    }
  }
  const auto sgn = [](double v) { return v > 0 ? 1 : v < 0 ? -1 : 0; };
  const auto endpoint = [&](double h0, double h1, double d0, double d1) {
    double m0 = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (sgn(m0) != sgn(d0))
      m0 = 0.0;
    else if (sgn(d0) != sgn(d1) && std::abs(m0) > 3.0 * std::abs(d0))
      m0 = 3.0 * d0;
    return m0;
  };
  m[0] = endpoint(h[0], h[1], d[0], d[1]);
  m[n - 1] = endpoint(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
  return m;
}

inline double hermite_eval(double x0, double x1, double z0, double z1, double m0, double m1,
                           double x) {
  const double h = x1 - x0, t = (x - x0) / h, t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * z0 + (t3 - 2 * t2 + t) * h * m0 + (-2 * t3 + 3 * t2) * z1 +
         (t3 - t2) * h * m1;
}

}  // namespace detail

/// Reference estimators of the benchmark: two per-resolution regressions, a
/// per-resolution monotone interpolant, and the unconstrained spline.
class BaselineModel {
 public:
  ModelKind kind = ModelKind::Logarithmic;

  struct Curve {
    std::vector<double> x, z, slope;  // interpolation knots (pchip)
    double a = 0, b = 0, c = 0;       // regression parameters
  };
  std::map<std::pair<int, int>, Curve> curves;  // 1-D kinds, keyed by resolution
  std::optional<GRDSurface> spline;             // PlainCT / Ramct

  double evaluate(double bitrate_kbps, int width, int height) const {
    if (spline) return spline->evaluate(bitrate_kbps, width, height);
    const auto it = curves.find({width, height});
    if (it == curves.end())
      throw NoCoverage("no curve fitted at " + std::to_string(width) + "x" +
                       std::to_string(height) + "; per-resolution models cannot interpolate "
                       "across resolutions");
    const Curve& c = it->second;
    switch (kind) {
      case ModelKind::Reciprocal:
        return c.a - c.b / (bitrate_kbps + c.c);
      case ModelKind::Logarithmic:
        return c.a * std::log(bitrate_kbps) + c.b;
      default: {
        if (bitrate_kbps < c.x.front() - 1e-9 || bitrate_kbps > c.x.back() + 1e-9)
          throw NoCoverage("bitrate outside the fitted range");
        size_t i = 1;
        while (i + 1 < c.x.size() && bitrate_kbps > c.x[i]) ++i;
        return detail::hermite_eval(c.x[i - 1], c.x[i], c.z[i - 1], c.z[i], c.slope[i - 1],
                                    c.slope[i], bitrate_kbps);
      }
    }
  }
};

/// Least-squares / shape-preserving fits of the reference estimators.
/// 1-D kinds fit one curve per resolution present in the samples.
inline BaselineModel fit_baseline(ModelKind kind, const std::vector<SamplePoint>& samples,
                                  const FitOptions& opt = {}) {
  BaselineModel model;
  model.kind = kind;
  if (kind == ModelKind::PlainCT || kind == ModelKind::Ramct) {
    FitOptions o = opt;
    o.monotone = kind == ModelKind::Ramct;
    model.spline = fit_surface(samples, o);
    return model;
  }

  std::map<std::pair<int, int>, std::vector<std::pair<double, double>>> per_res;
  for (const auto& s : samples) per_res[{s.width, s.height}].push_back({s.bitrate_kbps, s.z});

  for (auto& [res, rows] : per_res) {
    std::sort(rows.begin(), rows.end());
    for (size_t i = 1; i < rows.size(); ++i)
      if (rows[i].first == rows[i - 1].first) throw DuplicateSite("repeated bitrate sample");
    BaselineModel::Curve curve;
    const size_t n = rows.size();
    const std::string where =
        " at " + std::to_string(res.first) + "x" + std::to_string(res.second);

    if (kind == ModelKind::Logarithmic) {
      if (n < 2) throw InsufficientSamples("logarithmic regression needs 2 samples" + where);
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      for (const auto& [x, z] : rows) {
        const double lx = std::log(x);
        sx += lx;
        sy += z;
        sxx += lx * lx;
        sxy += lx * z;
      }
      const double den = n * sxx - sx * sx;
      if (std::abs(den) < 1e-12) throw InsufficientSamples("degenerate bitrate spread" + where);
      curve.a = (n * sxy - sx * sy) / den;
      curve.b = (sy - curve.a * sx) / n;
    } else if (kind == ModelKind::Reciprocal) {
      if (n < 3) throw InsufficientSamples("reciprocal regression needs 3 samples" + where);
      // z = a - b/(x + c): damped Gauss-Newton on c with (a, b) linear inside
      double c = rows[n / 2].first;
      const double c_floor = -rows.front().first + 1.0;
      double a = 0, b = 0, best_err = 1e300;
      const auto solve_ab = [&](double cc, double& aa, double& bb) {
        double s1 = 0, su = 0, suu = 0, sz = 0, suz = 0;
        for (const auto& [x, z] : rows) {
          const double u = 1.0 / (x + cc);
          s1 += 1;
          su += u;
          suu += u * u;
          sz += z;
          suz += u * z;
        }
        const double den = s1 * suu - su * su;
        if (std::abs(den) < 1e-300) return false;
        bb = -(s1 * suz - su * sz) / den;
        aa = (sz + bb * su) / s1;
        return true;
      };
      const auto sse = [&](double aa, double bb, double cc) {
        double e = 0;
        for (const auto& [x, z] : rows) {
          const double r = aa - bb / (x + cc) - z;
          e += r * r;
        }
        return e;
      };
      solve_ab(c, a, b);
      best_err = sse(a, b, c);
      double damp = 1.0;
      for (int it = 0; it < 200; ++it) {
        // d(residual)/dc = b / (x+c)^2
        double g = 0, hss = 0;
        for (const auto& [x, z] : rows) {
          const double u = 1.0 / (x + c);
          const double r = a - b * u - z;
          const double jc = b * u * u;
          g += r * jc;
          hss += jc * jc;
        }
        if (hss < 1e-300) break;
        double step = -g / (hss + damp * hss);
        double c_new = std::max(c + step, c_floor);
        double a_new = a, b_new = b;
        if (!solve_ab(c_new, a_new, b_new)) break;
        const double err = sse(a_new, b_new, c_new);
        if (err < best_err - 1e-15) {
          c = c_new;
          a = a_new;
          b = b_new;
          best_err = err;
          damp = std::max(damp * 0.5, 1e-6);
        } else {
          damp *= 4.0;
          if (damp > 1e12) break;
        }
      }
      curve.a = a;
      curve.b = b;
      curve.c = c;
    } else {  // MonotoneHermite
      if (n < 2) throw InsufficientSamples("interpolation needs 2 samples" + where);
      for (const auto& [x, z] : rows) {
        curve.x.push_back(x);
        curve.z.push_back(z);
      }
      curve.slope = detail::pchip_slopes(curve.x, curve.z);
    }
    model.curves.emplace(res, std::move(curve));
  }
  return model;
}

// ---------------------------------------------------------------------------
// benchmark
// ---------------------------------------------------------------------------

struct BenchOptions {
  std::vector<int> counts;
  std::vector<ModelKind> kinds{ModelKind::Reciprocal, ModelKind::Logarithmic,
                               ModelKind::MonotoneHermite, ModelKind::PlainCT, ModelKind::Ramct};
  bool random_sampler = true;
  bool uncertainty_sampler = true;
  int random_reps = 50;
  std::uint64_t seed = 1;
  FitOptions fit;
};

struct BenchCell {
  double mse = 0.0, linf = 0.0;
  bool na = true;
};

struct BenchReport {
  std::vector<int> counts;
  std::vector<std::string> columns;            // "<kind>/<rs|us>"
  std::vector<std::vector<BenchCell>> mse;     // [count][column] medians
  std::vector<std::vector<BenchCell>> linf;

  std::string to_table(bool linf_table = false) const {
    std::ostringstream os;
    os << "samples";
    for (const auto& c : columns) os << "\t" << c;
    os << "\n";
    const auto& cells = linf_table ? linf : mse;
    for (size_t r = 0; r < counts.size(); ++r) {
      os << counts[r];
      for (size_t c = 0; c < columns.size(); ++c) {
        os << "\t";
        if (cells[r][c].na)
          os << "N.A.";
        else
          os << std::setprecision(6) << (linf_table ? cells[r][c].linf : cells[r][c].mse);
      }
      os << "\n";
    }
    return os.str();
  }
};

namespace detail {

inline double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// seed-set indices: min and max bitrate of every resolution
inline std::vector<int> seed_indices(const GridSpec& g) {
  std::vector<int> out;
  const int nb = static_cast<int>(g.bitrates_kbps.size());
  for (int r = 0; r < static_cast<int>(g.resolutions.size()); ++r) {
    out.push_back(g.index(r, 0));
    if (nb > 1) out.push_back(g.index(r, nb - 1));
  }
  return out;
}

inline std::vector<SamplePoint> pick_samples(const GridSpec& g, const Vec& truth,
                                             const std::vector<int>& idx,
                                             const std::string& device) {
  std::vector<SamplePoint> out;
  for (const int i : idx) {
    const auto [r, b] = g.split(i);
    out.push_back({device, g.bitrates_kbps[b], g.resolutions[r].width, g.resolutions[r].height,
                   truth[i]});
  }
  return out;
}

struct PairErr {
  double mse = 0, linf = 0;
  bool ok = false;
};

inline PairErr eval_errors(ModelKind kind, const std::vector<SamplePoint>& samples,
                           const GridSpec& g, const Vec& truth, const FitOptions& fo) {
  PairErr pe;
  try {
    const BaselineModel m = fit_baseline(kind, samples, fo);
    double se = 0, li = 0;
    for (int r = 0; r < static_cast<int>(g.resolutions.size()); ++r)
      for (int b = 0; b < static_cast<int>(g.bitrates_kbps.size()); ++b) {
        const double zhat = m.evaluate(g.bitrates_kbps[b], g.resolutions[r].width,
                                       g.resolutions[r].height);
        const double e = zhat - truth[g.index(r, b)];
        se += e * e;
        li = std::max(li, std::abs(e));
      }
    pe.mse = se / g.size();
    pe.linf = li;
    pe.ok = true;
  } catch (const InsufficientSamples&) {
  } catch (const NoCoverage&) {
  }
  return pe;
}

}  // namespace detail

/// Median accuracy of every (model, sampler, sample-count) cell over the test
/// set, mirroring the benchmark protocol: seeds at min/max bitrate per
/// resolution, random sampling repeated and the per-pair median taken, the
/// uncertainty order shared by all surfaces. Cells that cannot be fitted are
/// reported as unavailable rather than aborting.
inline BenchReport benchmark(const GridSurfaceSet& test, const CovariancePrior& prior,
                             const BenchOptions& opt) {
  test.validate();
  if (prior.grid != test.grid) throw GridMismatch("prior and test corpus use different grids");
  BenchReport rep;
  rep.counts = opt.counts;

  const std::vector<int> seeds = detail::seed_indices(test.grid);
  const int N = test.grid.size();

  // one value-independent probe order per device
  std::vector<std::vector<int>> us_order(test.devices.size());
  if (opt.uncertainty_sampler) {
    for (size_t d = 0; d < test.devices.size(); ++d) {
      CovariancePrior p1;
      p1.grid = prior.grid;
      p1.devices = {prior.devices[d]};
      p1.sigma = {prior.sigma[d]};
      us_order[d] = plan(p1, 0.0, N).order;
    }
  }

  std::vector<std::pair<ModelKind, bool>> cols;  // (kind, is_random)
  for (const ModelKind k : opt.kinds) {
    if (opt.random_sampler) cols.push_back({k, true});
    if (opt.uncertainty_sampler) cols.push_back({k, false});
  }
  for (const auto& [k, rs] : cols)
    rep.columns.push_back(std::string(to_string(k)) + (rs ? "/rs" : "/us"));

  rep.mse.assign(opt.counts.size(), std::vector<BenchCell>(cols.size()));
  rep.linf.assign(opt.counts.size(), std::vector<BenchCell>(cols.size()));

  for (size_t ci = 0; ci < opt.counts.size(); ++ci) {
    const int count = std::min(opt.counts[ci], N);
    for (size_t col = 0; col < cols.size(); ++col) {
      const auto [kind, random] = cols[col];
      std::vector<double> mses, linfs;
      bool any_na = false;
      for (int m = 0; m < test.count(); ++m) {
        for (size_t d = 0; d < test.devices.size(); ++d) {
          const Vec& truth = test.values[m][d];
          std::vector<double> rep_mse, rep_linf;
          const int reps = random ? opt.random_reps : 1;
          bool pair_ok = true;
          for (int rp = 0; rp < reps; ++rp) {
            std::vector<int> idx = seeds;
            if (random) {
              std::uint64_t s = opt.seed;
              s = s * 6364136223846793005ULL + static_cast<std::uint64_t>(m + 1);
              s = s * 6364136223846793005ULL + static_cast<std::uint64_t>(d + 1);
              s = s * 6364136223846793005ULL + static_cast<std::uint64_t>(rp + 1);
              Rng rng(s);
              std::vector<int> rest;
              for (int i = 0; i < N; ++i)
                if (std::find(seeds.begin(), seeds.end(), i) == seeds.end()) rest.push_back(i);
              for (size_t i = rest.size(); i > 1; --i)
                std::swap(rest[i - 1], rest[rng.below(i)]);
              for (int i = 0; static_cast<int>(idx.size()) < count && i < static_cast<int>(rest.size()); ++i)
                idx.push_back(rest[i]);
            } else {
              for (const int i : us_order[d]) {
                if (static_cast<int>(idx.size()) >= count) break;
                if (std::find(idx.begin(), idx.end(), i) == idx.end()) idx.push_back(i);
              }
            }
            if (static_cast<int>(idx.size()) > count) idx.resize(count);
            const auto samples = detail::pick_samples(test.grid, truth, idx, test.devices[d]);
            const detail::PairErr pe = detail::eval_errors(kind, samples, test.grid, truth, opt.fit);
            if (!pe.ok) {
              pair_ok = false;
              break;
            }
            rep_mse.push_back(pe.mse);
            rep_linf.push_back(pe.linf);
          }
          if (!pair_ok) {
            any_na = true;
          } else {
            mses.push_back(detail::median(rep_mse));
            linfs.push_back(detail::median(rep_linf));
          }
        }
        if (any_na) break;
      }
      BenchCell cm, cl;
      if (!any_na && !mses.empty()) {
        cm.na = cl.na = false;
        cm.mse = detail::median(mses);
        cl.linf = detail::median(linfs);
      }
      rep.mse[ci][col] = cm;
      rep.linf[ci][col] = cl;
    }
  }
  return rep;
}

}  // namespace grdfit
