#pragma once

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "grdfit/sampler.hpp"

namespace grdfit {

/// Write-temp-then-rename so readers never observe partial files.
inline void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw Error("cannot write '" + tmp + "'");
    os << content;
    if (!os.good()) throw Error("short write to '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw Error("cannot rename '" + tmp + "' to '" + path + "'");
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace detail {

inline std::string format_resolution(const Resolution& r) {
  return std::to_string(r.width) + "x" + std::to_string(r.height);
}

inline Resolution parse_resolution(const std::string& s) {
  const auto x = s.find('x');
  if (x == std::string::npos) throw ParseError("resolution must look like 1920x1080, got '" + s + "'");
  try {
    return {std::stoi(s.substr(0, x)), std::stoi(s.substr(x + 1))};
  } catch (const std::exception&) {
    throw ParseError("resolution must look like 1920x1080, got '" + s + "'");
  }
}

}  // namespace detail

// --------------------------- corpus files ----------------------------------
//   # grd-corpus v1
//   # bitrates 100 200 ...
//   # resolutions 320x240 640x360 ...
//   # devices cellphone tv
//   # surfaces M
//   # surface <m> <device>
//   <one line of B values per resolution, resolution-major>

inline std::string corpus_to_text(const GridSurfaceSet& set) {
  set.validate();
  std::ostringstream os;
  os << std::setprecision(17);
  os << "# grd-corpus v1\n# bitrates";
  for (const double b : set.grid.bitrates_kbps) os << " " << b;
  os << "\n# resolutions";
  for (const auto& r : set.grid.resolutions) os << " " << detail::format_resolution(r);
  os << "\n# devices";
  for (const auto& d : set.devices) os << " " << d;
  os << "\n# surfaces " << set.count() << "\n";
  const int nb = static_cast<int>(set.grid.bitrates_kbps.size());
  for (int m = 0; m < set.count(); ++m)
    for (size_t d = 0; d < set.devices.size(); ++d) {
      os << "# surface " << m << " " << set.devices[d] << "\n";
      for (int r = 0; r < static_cast<int>(set.grid.resolutions.size()); ++r) {
        for (int b = 0; b < nb; ++b) os << (b ? " " : "") << set.values[m][d][set.grid.index(r, b)];
        os << "\n";
      }
    }
  return os.str();
}

inline GridSurfaceSet corpus_from_text(const std::string& text) {
  std::istringstream in(text);
  GridSurfaceSet set;
  std::string line;
  int lineno = 0, expected_surfaces = -1;
  bool signature = false;
  int cur_surface = -1, cur_device = -1, cur_row = 0;

  const auto fail = [&](const std::string& msg) {
    throw ParseError("line " + std::to_string(lineno) + ": " + msg);
  };

  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string word;
      hs >> word;
      if (word == "grd-corpus") {
        std::string v;
        hs >> v;
        if (v != "v1") fail("unsupported corpus version '" + v + "'");
        signature = true;
      } else if (word == "bitrates") {
        double b;
        while (hs >> b) set.grid.bitrates_kbps.push_back(b);
      } else if (word == "resolutions") {
        std::string r;
        while (hs >> r) set.grid.resolutions.push_back(detail::parse_resolution(r));
      } else if (word == "devices") {
        std::string d;
        while (hs >> d) set.devices.push_back(d);
      } else if (word == "surfaces") {
        hs >> expected_surfaces;
      } else if (word == "surface") {
        int m;
        std::string dev;
        if (!(hs >> m >> dev)) fail("malformed surface header");
        cur_surface = m;
        if (m == static_cast<int>(set.values.size()))
          set.values.emplace_back(set.devices.size(), Vec(set.grid.size()));
        else if (m != static_cast<int>(set.values.size()) - 1)
          fail("surfaces out of order");
        cur_device = -1;
        for (size_t d = 0; d < set.devices.size(); ++d)
          if (set.devices[d] == dev) cur_device = static_cast<int>(d);
        if (cur_device < 0) fail("unknown device '" + dev + "'");
        cur_row = 0;
      }
      continue;
    }
    if (!signature) fail("data before the '# grd-corpus v1' signature");
    if (cur_surface < 0 || cur_device < 0) fail("data row outside a surface block");
    if (cur_row >= static_cast<int>(set.grid.resolutions.size())) fail("too many rows in block");
    std::istringstream ls(line);
    const int nb = static_cast<int>(set.grid.bitrates_kbps.size());
    for (int b = 0; b < nb; ++b) {
      double v;
      if (!(ls >> v)) fail("expected " + std::to_string(nb) + " values");
      set.values[cur_surface][cur_device][set.grid.index(cur_row, b)] = v;
    }
    ++cur_row;
  }
  if (!signature) throw ParseError("missing '# grd-corpus v1' signature");
  if (expected_surfaces >= 0 && expected_surfaces != set.count())
    throw ParseError("corpus declares " + std::to_string(expected_surfaces) + " surfaces, found " +
                     std::to_string(set.count()));
  set.validate();
  return set;
}

// --------------------------- prior files -----------------------------------

inline std::string prior_to_text(const CovariancePrior& prior) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "# grd-prior v1\n# bitrates";
  for (const double b : prior.grid.bitrates_kbps) os << " " << b;
  os << "\n# resolutions";
  for (const auto& r : prior.grid.resolutions) os << " " << detail::format_resolution(r);
  os << "\n# devices";
  for (const auto& d : prior.devices) os << " " << d;
  os << "\n# epsilon " << prior.epsilon << "\n# corpus-size " << prior.corpus_size << "\n";
  for (size_t d = 0; d < prior.devices.size(); ++d) {
    os << "# matrix " << prior.devices[d] << "\n";
    const Mat& s = prior.sigma[d];
    for (Eigen::Index r = 0; r < s.rows(); ++r) {
      for (Eigen::Index c = 0; c < s.cols(); ++c) os << (c ? " " : "") << s(r, c);
      os << "\n";
    }
  }
  return os.str();
}

inline CovariancePrior prior_from_text(const std::string& text) {
  std::istringstream in(text);
  CovariancePrior prior;
  std::string line;
  int lineno = 0;
  bool signature = false;
  int cur_device = -1, cur_row = 0;
  const auto fail = [&](const std::string& msg) {
    throw ParseError("line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string word;
      hs >> word;
      if (word == "grd-prior") {
        std::string v;
        hs >> v;
        if (v != "v1") fail("unsupported prior version");
        signature = true;
      } else if (word == "bitrates") {
        double b;
        while (hs >> b) prior.grid.bitrates_kbps.push_back(b);
      } else if (word == "resolutions") {
        std::string r;
        while (hs >> r) prior.grid.resolutions.push_back(detail::parse_resolution(r));
      } else if (word == "devices") {
        std::string d;
        while (hs >> d) prior.devices.push_back(d);
      } else if (word == "epsilon") {
        hs >> prior.epsilon;
      } else if (word == "corpus-size") {
        hs >> prior.corpus_size;
      } else if (word == "matrix") {
        std::string dev;
        hs >> dev;
        cur_device = -1;
        for (size_t d = 0; d < prior.devices.size(); ++d)
          if (prior.devices[d] == dev) cur_device = static_cast<int>(d);
        if (cur_device < 0) fail("unknown device '" + dev + "'");
        while (static_cast<int>(prior.sigma.size()) <= cur_device)
          prior.sigma.emplace_back(Mat::Zero(prior.grid.size(), prior.grid.size()));
        cur_row = 0;
      }
      continue;
    }
    if (!signature) fail("data before the '# grd-prior v1' signature");
    if (cur_device < 0) fail("matrix row outside a matrix block");
    if (cur_row >= prior.grid.size()) fail("too many matrix rows");
    std::istringstream ls(line);
    for (int c = 0; c < prior.grid.size(); ++c)
      if (!(ls >> prior.sigma[cur_device](cur_row, c))) fail("short matrix row");
    ++cur_row;
  }
  if (!signature) throw ParseError("missing '# grd-prior v1' signature");
  if (prior.sigma.size() != prior.devices.size()) throw ParseError("missing covariance matrices");
  prior.grid.validate();
  return prior;
}

// --------------------------- plan files -------------------------------------

inline std::string plan_to_text(const SamplingPlan& plan, const GridSpec& grid) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "# grd-plan v1\n# threshold " << plan.threshold << "\n# stop-index " << plan.stop_index
     << "\n# columns: step index bitrate_kbps width height trace\n";
  for (size_t k = 0; k < plan.order.size(); ++k) {
    const auto [r, b] = grid.split(plan.order[k]);
    os << k << "\t" << plan.order[k] << "\t" << grid.bitrates_kbps[b] << "\t"
       << grid.resolutions[r].width << "\t" << grid.resolutions[r].height << "\t" << plan.trace[k]
       << "\n";
  }
  return os.str();
}

}  // namespace grdfit
