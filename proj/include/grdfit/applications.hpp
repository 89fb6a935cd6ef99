#pragma once

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "grdfit/sampler.hpp"
#include "grdfit/surface.hpp"

namespace grdfit {

/// Standard ladder of display resolutions used by the gain integrals and as
/// the default search set for ladder generation.
inline const std::vector<Resolution>& standard_resolutions() {
  static const std::vector<Resolution> r{{320, 240},  {384, 288},  {512, 384},
                                         {640, 360},  {720, 480},  {960, 540},
                                         {1280, 720}, {1600, 900}, {1920, 1080}};
  return r;
}

struct RDCurve {
  Resolution resolution;
  std::string device;
  std::vector<std::pair<double, double>> points;  // (bitrate kbps, quality), ascending
  std::vector<std::string> warnings;
};

/// Dense rate-quality curve at one resolution by surface evaluation.
/// Query points outside the hull are trimmed with a warning.
inline RDCurve rd_curve(const GRDModel& model, const std::string& device, Resolution res,
                        double lo_kbps, double hi_kbps, int steps) {
  if (steps < 1 || lo_kbps <= 0 || hi_kbps <= lo_kbps) throw RangeError("bad bitrate range");
  const GRDSurface& surf = model.surface(device);
  RDCurve out;
  out.resolution = res;
  out.device = device;
  int outside = 0;
  for (int i = 0; i <= steps; ++i) {
    const double b = lo_kbps + (hi_kbps - lo_kbps) * i / steps;
    try {
      out.points.push_back({b, surf.evaluate(b, res.width, res.height)});
    } catch (const OutsideConvexHull&) {
      ++outside;
    }
  }
  if (out.points.empty())
    throw EmptyCurve("resolution " + std::to_string(res.width) + "x" + std::to_string(res.height) +
                     " lies outside the fitted hull for the whole bitrate range");
  if (outside)
    out.warnings.push_back(std::to_string(outside) + " query points outside the hull were trimmed");
  return out;
}

/// Bitrate achieving the target quality at one resolution by bisection along
/// the (monotone) rate-quality curve. Returns the bracket's low end when the
/// quality there already meets the target; empty when the target is
/// unreachable at the bracket's high end. Converges in
/// log2(bracket / 1 kbps) + 2 iterations or fewer.
inline std::optional<double> dichotomous_search(const GRDSurface& surf, Resolution res,
                                                double target, double lo_kbps, double hi_kbps,
                                                double tol_quality = 0.01,
                                                double tol_bitrate = 1.0) {
  double flo = surf.evaluate(lo_kbps, res.width, res.height);
  if (flo >= target) return lo_kbps;
  const double fhi = surf.evaluate(hi_kbps, res.width, res.height);
  if (fhi < target) return std::nullopt;
  double lo = lo_kbps, hi = hi_kbps;
  while (hi - lo > tol_bitrate) {
    const double mid = 0.5 * (lo + hi);
    const double f = surf.evaluate(mid, res.width, res.height);
    if (std::abs(f - target) <= tol_quality) return mid;
    if (f < target)
      lo = mid;
    else
      hi = mid;
  }
  return hi;  // the feasible end of the final bracket
}

struct LadderRung {
  double target = 0.0;
  Resolution resolution;
  double bitrate_kbps = 0.0;
  double achieved = 0.0;
  bool reachable = true;
};

struct BitrateLadder {
  std::vector<LadderRung> rungs;

  std::string to_table() const {
    std::ostringstream os;
    os << "target\twidth\theight\tbitrate_kbps\tachieved\tstatus\n";
    os << std::setprecision(17);
    for (const auto& r : rungs) {
      os << r.target << "\t" << r.resolution.width << "\t" << r.resolution.height << "\t";
      if (r.reachable)
        os << r.bitrate_kbps << "\t" << r.achieved << "\tok\n";
      else
        os << "-\t-\tunreachable\n";
    }
    return os.str();
  }
};

/// Minimal-bitrate representation per ascending target quality: if the lowest
/// bitrate already meets the target, the best resolution there is chosen;
/// otherwise the target is matched per resolution and the cheapest resolution
/// wins.
inline BitrateLadder build_ladder(const GRDModel& model, const std::string& device,
                                  const std::vector<double>& targets,
                                  const std::vector<Resolution>& resolutions, double lo_kbps,
                                  double hi_kbps) {
  if (resolutions.empty()) throw RangeError("need at least one resolution");
  for (size_t i = 1; i < targets.size(); ++i)
    if (targets[i] <= targets[i - 1]) throw RangeError("targets must be strictly ascending");
  const GRDSurface& surf = model.surface(device);
  BitrateLadder ladder;
  for (const double target : targets) {
    LadderRung rung;
    rung.target = target;
    // lowest-bitrate case: representation (x_L, argmax_y f(x_L, y))
    double best_lo = -1e300;
    Resolution best_lo_res = resolutions.front();
    for (const auto& r : resolutions) {
      const double f = surf.evaluate(lo_kbps, r.width, r.height);
      if (f > best_lo) {
        best_lo = f;
        best_lo_res = r;
      }
    }
    if (best_lo >= target) {
      rung.resolution = best_lo_res;
      rung.bitrate_kbps = lo_kbps;
      rung.achieved = best_lo;
      ladder.rungs.push_back(rung);
      continue;
    }
    bool found = false;
    for (const auto& r : resolutions) {
      const auto b = dichotomous_search(surf, r, target, lo_kbps, hi_kbps);
      if (!b) continue;
      if (!found || *b < rung.bitrate_kbps) {
        rung.resolution = r;
        rung.bitrate_kbps = *b;
        rung.achieved = surf.evaluate(*b, r.width, r.height);
        found = true;
      }
    }
    rung.reachable = found;
    ladder.rungs.push_back(rung);
  }
  return ladder;
}

struct GainOptions {
  double lo_kbps = 500.0;
  double hi_kbps = 4000.0;
  int steps = 100;
  std::vector<Resolution> resolutions = standard_resolutions();
  std::map<std::string, double> device_weights;  // empty: uniform over shared devices
};

struct GainReport {
  double q_gain = 0.0;
  double r_gain = 0.0;
  // per device, per resolution contributions
  struct Entry {
    std::string device;
    Resolution resolution;
    double value = 0.0;
    bool skipped = false;
    std::string note;
  };
  std::vector<Entry> q_breakdown;
  std::vector<Entry> r_breakdown;
  std::vector<std::string> notes;

  std::string to_text() const {
    std::ostringstream os;
    os << std::setprecision(10);
    os << "q_gain\t" << q_gain << "\n";
    os << "r_gain\t" << r_gain << "\n";
    for (const auto& e : q_breakdown)
      os << "q\t" << e.device << "\t" << e.resolution.width << "x" << e.resolution.height << "\t"
         << (e.skipped ? "skipped" : std::to_string(e.value)) << "\n";
    for (const auto& e : r_breakdown)
      os << "r\t" << e.device << "\t" << e.resolution.width << "x" << e.resolution.height << "\t"
         << (e.skipped ? "skipped" : std::to_string(e.value)) << "\n";
    for (const auto& n : notes) os << "# " << n << "\n";
    return os.str();
  }
};

namespace detail {

inline std::vector<std::pair<std::string, double>> resolve_weights(const GRDModel& a,
                                                                   const GRDModel& b,
                                                                   const GainOptions& opt) {
  std::vector<std::pair<std::string, double>> out;
  if (!opt.device_weights.empty()) {
    double sum = 0.0;
    for (const auto& [dev, w] : opt.device_weights) {
      if (!a.surfaces.count(dev) || !b.surfaces.count(dev))
        throw UnknownDevice("weighted device '" + dev + "' missing from a model");
      if (w < 0) throw RangeError("negative device weight");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw RangeError("device weights must sum to 1");
    for (const auto& [dev, w] : opt.device_weights) out.push_back({dev, w});
    return out;
  }
  for (const auto& [dev, s] : a.surfaces)
    if (b.surfaces.count(dev)) out.push_back({dev, 0.0});
  if (out.empty()) throw UnknownDevice("the two models share no device");
  for (auto& [dev, w] : out) w = 1.0 / static_cast<double>(out.size());
  return out;
}

// trapezoid weights over the mapped resolution axis (log2 pixels); a single
// resolution degenerates to weight 1
inline std::vector<double> resolution_weights(const std::vector<Resolution>& rs) {
  const size_t n = rs.size();
  std::vector<double> w(n, 1.0);
  if (n == 1) return w;
  std::vector<double> y(n);
  for (size_t i = 0; i < n; ++i) y[i] = std::log2(static_cast<double>(rs[i].pixels()));
  for (size_t i = 0; i < n; ++i) {
    const double left = i ? y[i] - y[i - 1] : 0.0;
    const double right = i + 1 < n ? y[i + 1] - y[i] : 0.0;
    w[i] = 0.5 * (left + right);
  }
  return w;
}

inline double trapz(const std::vector<double>& x, const std::vector<double>& f) {
  double s = 0.0;
  for (size_t i = 1; i < x.size(); ++i) s += 0.5 * (f[i] + f[i - 1]) * (x[i] - x[i - 1]);
  return s;
}

}  // namespace detail

/// Expected quality difference of model B over model A: the z difference
/// integrated in log10 bitrate and mapped resolution, normalized by the
/// integration area, averaged over devices with weights p.
inline double q_gain(const GRDModel& a, const GRDModel& b, const GainOptions& opt = {},
                     GainReport* report = nullptr) {
  if (opt.steps < 1 || opt.resolutions.empty() || opt.lo_kbps <= 0 || opt.hi_kbps <= opt.lo_kbps)
    throw RangeError("bad gain options");
  const auto weights = detail::resolve_weights(a, b, opt);
  const auto rw = detail::resolution_weights(opt.resolutions);
  const double rw_sum = std::accumulate(rw.begin(), rw.end(), 0.0);

  std::vector<std::string> uncovered;
  double total = 0.0;
  for (const auto& [device, p] : weights) {
    const GRDSurface& sa = a.surface(device);
    const GRDSurface& sb = b.surface(device);
    double dev_val = 0.0;
    for (size_t r = 0; r < opt.resolutions.size(); ++r) {
      const Resolution res = opt.resolutions[r];
      std::vector<double> xs(opt.steps + 1), diff(opt.steps + 1);
      for (int i = 0; i <= opt.steps; ++i) {
        const double lx =
            std::log10(opt.lo_kbps) + (std::log10(opt.hi_kbps) - std::log10(opt.lo_kbps)) * i / opt.steps;
        const double bk = std::pow(10.0, lx);
        xs[i] = lx;
        try {
          diff[i] = sb.evaluate(bk, res.width, res.height) - sa.evaluate(bk, res.width, res.height);
        } catch (const OutsideConvexHull&) {
          uncovered.push_back(device + " " + std::to_string(res.width) + "x" +
                              std::to_string(res.height) + " @ " + std::to_string(bk) + " kbps");
          diff[i] = 0.0;
        }
      }
      const double span = xs.back() - xs.front();
      const double val = detail::trapz(xs, diff) / span;
      dev_val += rw[r] * val;
      if (report) report->q_breakdown.push_back({device, res, val, false, ""});
    }
    dev_val /= rw_sum;
    total += p * dev_val;
  }
  if (!uncovered.empty()) {
    std::string msg = "gain window not covered by both models:";
    for (size_t i = 0; i < std::min<size_t>(uncovered.size(), 5); ++i) msg += " [" + uncovered[i] + "]";
    if (uncovered.size() > 5) msg += " (+" + std::to_string(uncovered.size() - 5) + " more)";
    throw CoverageError(msg);
  }
  if (report) report->q_gain = total;
  return total;
}

/// Expected bitrate change of model B against model A: both rate-quality
/// curves are inverted on a shared quality grid per resolution, the log10
/// bitrate gap is integrated and normalized by the quality span, then
/// averaged over resolutions (mapped-axis trapezoid weights) and devices.
/// Positive means B needs more bitrate; -0.25 means a 25% saving.
inline double r_gain(const GRDModel& a, const GRDModel& b, const GainOptions& opt = {},
                     GainReport* report = nullptr) {
  if (opt.steps < 1 || opt.resolutions.empty() || opt.lo_kbps <= 0 || opt.hi_kbps <= opt.lo_kbps)
    throw RangeError("bad gain options");
  const auto weights = detail::resolve_weights(a, b, opt);
  const auto rw = detail::resolution_weights(opt.resolutions);

  double mean_exponent = 0.0;
  for (const auto& [device, p] : weights) {
    const GRDSurface& sa = a.surface(device);
    const GRDSurface& sb = b.surface(device);
    double dev_exp = 0.0, dev_wsum = 0.0;
    for (size_t r = 0; r < opt.resolutions.size(); ++r) {
      const Resolution res = opt.resolutions[r];
      const double za_lo = sa.evaluate(opt.lo_kbps, res.width, res.height);
      const double zb_lo = sb.evaluate(opt.lo_kbps, res.width, res.height);
      const double za_hi = sa.evaluate(opt.hi_kbps, res.width, res.height);
      const double zb_hi = sb.evaluate(opt.hi_kbps, res.width, res.height);
      const double z_lo = std::max(za_lo, zb_lo);
      const double z_hi = std::min(za_hi, zb_hi);
      if (z_hi <= z_lo) {
        if (report)
          report->r_breakdown.push_back(
              {device, res, 0.0, true, "empty effective quality interval"});
        continue;
      }
      std::vector<double> zs(opt.steps + 1), gap(opt.steps + 1);
      bool ok = true;
      for (int i = 0; i <= opt.steps; ++i) {
        const double z = z_lo + (z_hi - z_lo) * i / opt.steps;
        const auto xa = dichotomous_search(sa, res, z, opt.lo_kbps, opt.hi_kbps, 1e-6, 1e-3);
        const auto xb = dichotomous_search(sb, res, z, opt.lo_kbps, opt.hi_kbps, 1e-6, 1e-3);
        if (!xa || !xb) {
          ok = false;
          break;
        }
        zs[i] = z;
        gap[i] = std::log10(*xb) - std::log10(*xa);
      }
      if (!ok) {
        if (report)
          report->r_breakdown.push_back({device, res, 0.0, true, "curve inversion failed"});
        continue;
      }
      const double e = detail::trapz(zs, gap) / (z_hi - z_lo);
      dev_exp += rw[r] * e;
      dev_wsum += rw[r];
      if (report) report->r_breakdown.push_back({device, res, e, false, ""});
    }
    if (dev_wsum <= 0.0)
      throw CoverageError("no resolution offered a usable quality interval for device '" + device +
                          "'");
    mean_exponent += p * (dev_exp / dev_wsum);
  }
  const double rg = std::pow(10.0, mean_exponent) - 1.0;
  if (report) report->r_gain = rg;
  return rg;
}

}  // namespace grdfit
