#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "grdfit/coordmap.hpp"
#include "grdfit/qp.hpp"

namespace grdfit {

/// One quality measurement of an encoded representation on one device.
struct SamplePoint {
  std::string device;
  double bitrate_kbps = 0.0;
  int width = 0, height = 0;
  double z = 0.0;
};

struct FitOptions {
  double lambda = 1e-4;
  double tol_primal = 1e-8;
  double tol_dual = 1e-8;
  long max_iter = 1000000;
  CoordinateMap map{};
  bool monotone = true;  // false fits the plain (unconstrained) spline
  bool slacks = true;
  double z_min = 0.0, z_max = 100.0;
};

struct FitReport {
  QPStatus status = QPStatus::MaxIterations;
  double objective = 0.0;  // curvature + slack penalty (+ dropped constant re-added)
  double curvature = 0.0;  // curvature part alone
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double slack_l1 = 0.0;
  long iterations = 0;
  std::vector<std::string> warnings;
  std::vector<RowTag> row_tags;  // per-row activity for diagnostics
  Vec row_margin;                // b - A v at the solution
};

enum class GradientUnits { Mapped, PerKbpsPixel };

struct Gradient {
  double dzdx = 0.0;  // bitrate direction
  double dzdy = 0.0;  // resolution direction
};

/// A fitted per-device spline surface: triangulation in the standardized
/// frame, one control net per triangle, and the solved unknowns.
class GRDSurface {
 public:
  GRDSurface() = default;
  GRDSurface(CoordinateMap map, Normalization norm, Triangulation tri,
             std::vector<ControlNet> nets, Vec d, Vec xi, FitReport report)
      : map_(map),
        norm_(norm),
        tri_(std::move(tri)),
        nets_(std::move(nets)),
        d_(std::move(d)),
        xi_(std::move(xi)),
        report_(std::move(report)) {}

  double evaluate(double bitrate_kbps, int width, int height) const {
    const Point p = to_frame(bitrate_kbps, width, height);
    const LocateResult lr = locate(tri_, p.x, p.y);
    return eval_patch(micro_patch(nets_[lr.macro], lr.micro), lr.bary);
  }

  Gradient gradient(double bitrate_kbps, int width, int height,
                    GradientUnits units = GradientUnits::Mapped) const {
    const Point p = to_frame(bitrate_kbps, width, height);
    const LocateResult lr = locate(tri_, p.x, p.y);
    const auto v = tri_.triangle_points(lr.macro);
    const auto mv = micro_vertices(v, lr.micro);
    const MicroPatch pc = micro_patch(nets_[lr.macro], lr.micro);
    Gradient g;
    g.dzdx = ddir_patch(pc, mv, lr.bary, 1.0, 0.0) / norm_.x_scale;
    g.dzdy = ddir_patch(pc, mv, lr.bary, 0.0, 1.0) / norm_.y_scale;
    if (units == GradientUnits::PerKbpsPixel) {
      g.dzdx *= map_.dx_dbitrate(bitrate_kbps);
      g.dzdy *= map_.dy_dpixels(width, height);
    }
    return g;
  }

  /// Directional derivative in mapped coordinates along (ux, uy).
  double directional(double x_mapped, double y_mapped, double ux, double uy) const {
    const Point p{norm_.nx(x_mapped), norm_.ny(y_mapped)};
    const LocateResult lr = locate(tri_, p.x, p.y);
    const auto mv = micro_vertices(tri_.triangle_points(lr.macro), lr.micro);
    const MicroPatch pc = micro_patch(nets_[lr.macro], lr.micro);
    // unit direction in the standardized frame, derivative back in mapped units
    const double fx = ux / norm_.x_scale, fy = uy / norm_.y_scale;
    return ddir_patch(pc, mv, lr.bary, fx, fy);
  }

  /// Value at mapped (pre-normalization) coordinates.
  double evaluate_mapped(double x_mapped, double y_mapped) const {
    const Point p{norm_.nx(x_mapped), norm_.ny(y_mapped)};
    const LocateResult lr = locate(tri_, p.x, p.y);
    return eval_patch(micro_patch(nets_[lr.macro], lr.micro), lr.bary);
  }

  const CoordinateMap& map() const { return map_; }
  const Normalization& normalization() const { return norm_; }
  const Triangulation& triangulation() const { return tri_; }
  const std::vector<ControlNet>& nets() const { return nets_; }
  const Vec& d() const { return d_; }
  const Vec& xi() const { return xi_; }
  const FitReport& report() const { return report_; }

 private:
  Point to_frame(double bitrate_kbps, int width, int height) const {
    return {norm_.nx(map_.x(bitrate_kbps)), norm_.ny(map_.y(width, height))};
  }

  CoordinateMap map_{};
  Normalization norm_{};
  Triangulation tri_;
  std::vector<ControlNet> nets_;
  Vec d_, xi_;
  FitReport report_;
};

/// Device-keyed collection of surfaces plus provenance.
struct GRDModel {
  std::map<std::string, GRDSurface> surfaces;
  std::map<std::string, std::string> metadata;  // source/codec/metric/settings

  const GRDSurface& surface(const std::string& device) const {
    const auto it = surfaces.find(device);
    if (it == surfaces.end()) throw UnknownDevice("no surface for device '" + device + "'");
    return it->second;
  }
  double evaluate(const std::string& device, double bitrate_kbps, int w, int h) const {
    return surface(device).evaluate(bitrate_kbps, w, h);
  }
  Gradient gradient(const std::string& device, double bitrate_kbps, int w, int h,
                    GradientUnits units = GradientUnits::Mapped) const {
    return surface(device).gradient(bitrate_kbps, w, h, units);
  }
};

/// Fit one device's samples. The mapped coordinates are standardized to the
/// unit box before triangulation so the result is invariant under per-axis
/// affine rescaling of the inputs.
inline GRDSurface fit_surface(const std::vector<SamplePoint>& samples, const FitOptions& opt = {}) {
  if (samples.size() < 3) throw CollinearInput("need at least 3 samples per device");
  std::set<std::pair<int, int>> resolutions;
  std::set<std::tuple<double, int, int>> keys;
  for (const auto& s : samples) {
    if (s.z < opt.z_min || s.z > opt.z_max)
      throw QualityOutOfRange("quality " + std::to_string(s.z) + " outside [" +
                              std::to_string(opt.z_min) + ", " + std::to_string(opt.z_max) + "]");
    resolutions.insert({s.width, s.height});
    if (!keys.insert({s.bitrate_kbps, s.width, s.height}).second)
      throw DuplicateSite("repeated (bitrate, resolution) sample");
  }
  if (resolutions.size() < 2)
    throw CollinearInput(
        "all sites are collinear in the mapped plane: fewer than 2 distinct resolutions");

  std::vector<std::pair<double, double>> mapped(samples.size());
  for (size_t i = 0; i < samples.size(); ++i)
    mapped[i] = {opt.map.x(samples[i].bitrate_kbps), opt.map.y(samples[i].width, samples[i].height)};
  const Normalization norm = Normalization::fit(mapped.begin(), mapped.end());

  std::vector<Site> sites(samples.size());
  Vec z(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    sites[i] = {norm.nx(mapped[i].first), norm.ny(mapped[i].second), static_cast<int>(i)};
    z[static_cast<Eigen::Index>(i)] = samples[i].z;
  }

  FitReport report;
  // hull guard: each resolution should span the global bitrate range
  {
    double lo = samples[0].bitrate_kbps, hi = samples[0].bitrate_kbps;
    for (const auto& s : samples) {
      lo = std::min(lo, s.bitrate_kbps);
      hi = std::max(hi, s.bitrate_kbps);
    }
    for (const auto& r : resolutions) {
      double rlo = 1e300, rhi = -1e300;
      for (const auto& s : samples)
        if (s.width == r.first && s.height == r.second) {
          rlo = std::min(rlo, s.bitrate_kbps);
          rhi = std::max(rhi, s.bitrate_kbps);
        }
      if (rlo > lo || rhi < hi)
        report.warnings.push_back("resolution " + std::to_string(r.first) + "x" +
                                  std::to_string(r.second) +
                                  " does not span the global bitrate range; the hull will be "
                                  "clipped there");
    }
  }

  Triangulation tri = triangulate(sites);

  AssemblyOptions ao;
  ao.lambda = opt.lambda;
  ao.monotone = opt.monotone;
  ao.slacks = opt.monotone && opt.slacks;
  const QuadraticProgram qp = assemble_global(tri, z, ao);

  QPSettings qs;
  qs.tol_primal = opt.tol_primal;
  qs.tol_dual = opt.tol_dual;
  qs.max_iter = opt.max_iter;
  const QPSolution qsol = solve(qp, qs);
  if (qsol.status == QPStatus::Infeasible || qsol.status == QPStatus::Unbounded)
    throw Error("surface fit failed: " + std::string(to_string(qsol.status)) +
                (qsol.message.empty() ? "" : " (" + qsol.message + ")"));
  if (qsol.status == QPStatus::MaxIterations)
    report.warnings.push_back("solver stopped at the iteration cap; residuals " +
                              std::to_string(qsol.primal_residual) + "/" +
                              std::to_string(qsol.dual_residual));

  report.status = qsol.status;
  report.objective = qsol.objective;
  report.primal_residual = qsol.primal_residual;
  report.dual_residual = qsol.dual_residual;
  report.iterations = qsol.iterations;
  report.row_tags = qp.tags;
  if (qp.A_in.rows()) report.row_margin = qp.b_in - qp.A_in * qsol.v;

  const int T = static_cast<int>(tri.triangles().size());
  Vec xi = Vec::Zero(0);
  if (qp.layout.with_slacks) {
    xi = qsol.v.segment(qp.layout.d_size(), 6 * T);
    report.slack_l1 = xi.cwiseAbs().sum();
  }
  report.curvature = report.objective - opt.lambda * report.slack_l1;

  std::vector<ControlNet> nets(T);
  for (int t = 0; t < T; ++t) {
    const auto& mt = tri.triangles()[t];
    const auto v3 = tri.triangle_points(t);
    const std::array<double, 3> zt{z[mt.v[0]], z[mt.v[1]], z[mt.v[2]]};
    Eigen::Matrix<double, 16, 9> R;
    Eigen::Matrix<double, 16, 1> f;
    build_Rf(v3, mt.edge, zt, R, f);
    const Eigen::Matrix<double, 16, 1> c =
        R * detail::gather_local_d(qp.layout, mt, t, qsol.v) + f;
    ControlNet& net = nets[t];
    net[0] = zt[0];
    net[1] = zt[1];
    net[2] = zt[2];
    for (int i = 0; i < 16; ++i) net[3 + i] = c(i);
  }

  const Vec d = qsol.v.head(qp.layout.d_size());
  return GRDSurface(opt.map, norm, std::move(tri), std::move(nets), d, xi, std::move(report));
}

/// Fit every device present in the sample set independently.
inline GRDModel fit(const std::vector<SamplePoint>& samples, const FitOptions& opt = {}) {
  std::map<std::string, std::vector<SamplePoint>> by_device;
  for (const auto& s : samples) by_device[s.device].push_back(s);
  if (by_device.empty()) throw CollinearInput("no samples");
  GRDModel model;
  for (auto& [device, group] : by_device) model.surfaces.emplace(device, fit_surface(group, opt));
  model.metadata["coordinate_map"] = opt.map.name();
  model.metadata["lambda"] = std::to_string(opt.lambda);
  model.metadata["monotone"] = opt.monotone ? "1" : "0";
  return model;
}

}  // namespace grdfit
