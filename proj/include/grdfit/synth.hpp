#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "grdfit/sampler.hpp"

namespace grdfit {

/// Logistic-in-log-bitrate generator family. For device u at resolution
/// fraction t (0 at the smallest grid resolution, 1 at the largest):
///   z = A(t) / (1 + exp(-g(t) * (ln bitrate - mu(t))))
/// with A in (60, 100], g > 0, and mu increasing in t. Strictly increasing in
/// bitrate by construction; the resolution-dependent ceiling A emulates the
/// upsampling penalty large displays put on low resolutions.
struct DeviceParams {
  double a_max = 95.0;  // ceiling at the largest resolution
  double a_drop = 10.0; // ceiling loss at the smallest resolution
  double g0 = 1.8, g1 = 0.2;
  double mu0 = 6.2, mu1 = 0.8;  // ln kbps
};

struct SyntheticSurface {
  std::vector<DeviceParams> params;  // per device
  double y_lo = 0.0, y_hi = 1.0;     // log2 pixel anchors of the grid

  double t_of(int width, int height) const {
    const double y = std::log2(static_cast<double>(width) * height);
    if (y_hi <= y_lo) return 0.0;
    return std::clamp((y - y_lo) / (y_hi - y_lo), 0.0, 1.0);
  }
  double value(double bitrate_kbps, int width, int height, int device) const {
    const DeviceParams& p = params.at(device);
    const double t = t_of(width, height);
    const double a = p.a_max - p.a_drop * (1.0 - t);
    const double g = p.g0 + p.g1 * t;
    const double mu = p.mu0 + p.mu1 * t;
    return a / (1.0 + std::exp(-g * (std::log(bitrate_kbps) - mu)));
  }
};

struct SyntheticSpec {
  std::uint64_t seed = 1;
  int devices = 1;
  GridSpec grid;
  // parameter ranges; defaults keep every surface inside (60, 100] and
  // clearly rising across the grid's bitrate span
  double a_max_lo = 85.0, a_max_hi = 98.0;
  double a_drop_hi = 22.0;  // scaled up with the device index
  double g0_lo = 1.2, g0_hi = 2.2;
  double g1_lo = -0.3, g1_hi = 0.8;
  double mu1_lo = 0.3, mu1_hi = 1.2;
};

struct SyntheticCorpus {
  GridSpec grid;
  std::vector<std::string> devices;
  std::vector<SyntheticSurface> surfaces;

  GridSurfaceSet dense() const {
    GridSurfaceSet out;
    out.grid = grid;
    out.devices = devices;
    for (const auto& s : surfaces) {
      std::vector<Vec> per_dev;
      for (size_t d = 0; d < devices.size(); ++d) {
        Vec v(grid.size());
        for (int r = 0; r < static_cast<int>(grid.resolutions.size()); ++r)
          for (int b = 0; b < static_cast<int>(grid.bitrates_kbps.size()); ++b)
            v[grid.index(r, b)] = s.value(grid.bitrates_kbps[b], grid.resolutions[r].width,
                                          grid.resolutions[r].height, static_cast<int>(d));
        per_dev.push_back(std::move(v));
      }
      out.values.push_back(std::move(per_dev));
    }
    return out;
  }
};

inline const std::vector<std::string>& device_names() {
  static const std::vector<std::string> names{"cellphone", "tablet", "laptop", "desktop", "tv"};
  return names;
}

/// Deterministic corpus of M surfaces from the seed. Every generated surface
/// is verified to rise with bitrate on the grid.
inline SyntheticCorpus synth_corpus(const SyntheticSpec& spec, int m_surfaces) {
  spec.grid.validate();
  if (m_surfaces < 1) throw SynthSpecError("need at least one surface");
  if (spec.devices < 1 || spec.devices > static_cast<int>(device_names().size()))
    throw SynthSpecError("devices must be in [1, " + std::to_string(device_names().size()) + "]");
  if (spec.grid.bitrates_kbps.front() <= 0.0) throw SynthSpecError("bitrates must be positive");

  SyntheticCorpus corpus;
  corpus.grid = spec.grid;
  for (int d = 0; d < spec.devices; ++d) corpus.devices.push_back(device_names()[d]);

  const double lnb_lo = std::log(spec.grid.bitrates_kbps.front());
  const double lnb_hi = std::log(spec.grid.bitrates_kbps.back());
  Rng rng(spec.seed);
  for (int m = 0; m < m_surfaces; ++m) {
    SyntheticSurface s;
    s.y_lo = std::log2(static_cast<double>(spec.grid.resolutions.front().pixels()));
    s.y_hi = std::log2(static_cast<double>(spec.grid.resolutions.back().pixels()));
    for (int d = 0; d < spec.devices; ++d) {
      DeviceParams p;
      p.a_max = rng.uniform(spec.a_max_lo, spec.a_max_hi);
      // larger devices penalize low resolutions more
      const double dev_scale =
          spec.devices > 1 ? 0.4 + 0.6 * d / static_cast<double>(spec.devices - 1) : 1.0;
      const double drop_cap = std::min(spec.a_drop_hi, p.a_max - 60.5);
      p.a_drop = rng.uniform(0.0, drop_cap) * dev_scale;
      p.g0 = rng.uniform(spec.g0_lo, spec.g0_hi);
      p.g1 = std::max(rng.uniform(spec.g1_lo, spec.g1_hi), 0.4 - p.g0);
      // keep the midpoint inside the central part of the bitrate span
      p.mu0 = rng.uniform(lnb_lo + 0.25 * (lnb_hi - lnb_lo), lnb_lo + 0.6 * (lnb_hi - lnb_lo));
      p.mu1 = rng.uniform(spec.mu1_lo, spec.mu1_hi);
      s.params.push_back(p);
    }
    corpus.surfaces.push_back(std::move(s));
  }

  // generation-time check: finite-difference rise along bitrate on the grid
  for (const auto& s : corpus.surfaces)
    for (int d = 0; d < spec.devices; ++d)
      for (const auto& r : spec.grid.resolutions)
        for (size_t b = 1; b < spec.grid.bitrates_kbps.size(); ++b) {
          const double z0 = s.value(spec.grid.bitrates_kbps[b - 1], r.width, r.height, d);
          const double z1 = s.value(spec.grid.bitrates_kbps[b], r.width, r.height, d);
          if (z1 < z0) throw SynthSpecError("generated surface is not rising in bitrate");
        }
  return corpus;
}

}  // namespace grdfit
