#pragma once

#include <cmath>
#include <string>

#include "grdfit/common.hpp"

namespace grdfit {

/// Maps (bitrate kbps, width, height) to the planar fitting coordinates.
/// Default: x = log10(bitrate), y = log2(width*height). Monotone increasing in
/// bitrate either way, so axial monotonicity is preserved.
struct CoordinateMap {
  enum class Kind { Log, Identity };
  Kind kind = Kind::Log;

  double x(double bitrate_kbps) const {
    if (bitrate_kbps <= 0.0) throw RangeError("bitrate must be positive, got " + std::to_string(bitrate_kbps));
    return kind == Kind::Log ? std::log10(bitrate_kbps) : bitrate_kbps;
  }
  double y(int width, int height) const {
    const double px = static_cast<double>(width) * height;
    if (px <= 0.0) throw RangeError("resolution must be positive");
    return kind == Kind::Log ? std::log2(px) : px;
  }
  /// d(mapped x)/d(bitrate), for unit conversion of gradients.
  double dx_dbitrate(double bitrate_kbps) const {
    return kind == Kind::Log ? 1.0 / (bitrate_kbps * std::log(10.0)) : 1.0;
  }
  /// d(mapped y)/d(pixel count).
  double dy_dpixels(int width, int height) const {
    const double px = static_cast<double>(width) * height;
    return kind == Kind::Log ? 1.0 / (px * std::log(2.0)) : 1.0;
  }

  std::string name() const { return kind == Kind::Log ? "log" : "identity"; }
  static CoordinateMap from_name(const std::string& n) {
    if (n == "log") return {Kind::Log};
    if (n == "identity") return {Kind::Identity};
    throw CorruptDocument("unknown coordinate map '" + n + "'");
  }
};

/// Per-axis affine standardization of the fitting frame. The spline's C1
/// construction is affine-equivariant, but the curvature objective weights
/// edges by 1/length^3; fitting in a canonical unit box makes the fit
/// independent of axis scaling and keeps the QP well conditioned.
struct Normalization {
  double x_offset = 0.0, x_scale = 1.0;
  double y_offset = 0.0, y_scale = 1.0;

  double nx(double x) const { return (x - x_offset) / x_scale; }
  double ny(double y) const { return (y - y_offset) / y_scale; }

  template <typename It>
  static Normalization fit(It first, It last) {
    double xlo = 1e300, xhi = -1e300, ylo = 1e300, yhi = -1e300;
    for (It it = first; it != last; ++it) {
      xlo = std::min(xlo, it->first);
      xhi = std::max(xhi, it->first);
      ylo = std::min(ylo, it->second);
      yhi = std::max(yhi, it->second);
    }
    Normalization n;
    n.x_offset = xlo;
    n.x_scale = (xhi > xlo) ? (xhi - xlo) : 1.0;
    n.y_offset = ylo;
    n.y_scale = (yhi > ylo) ? (yhi - ylo) : 1.0;
    return n;
  }
};

}  // namespace grdfit
