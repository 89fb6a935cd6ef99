#pragma once

#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "grdfit/surface.hpp"

namespace grdfit {

/// Parsed measurement file: rows grouped by (source, codec); the device lives
/// on each sample. Header declares the metric and its value range.
struct MeasurementSet {
  std::string metric = "quality";
  double z_min = 0.0, z_max = 100.0;
  std::map<std::pair<std::string, std::string>, std::vector<SamplePoint>> groups;
};

/// Format: '#'-prefixed header, whitespace-separated rows.
///   # grd-measurements v1
///   # metric <name> <min> <max>
///   # columns: source codec device width height bitrate_kbps quality
///   clip01 h264 tv 1920 1080 2500 87.3
inline MeasurementSet load_measurements(std::istream& in) {
  MeasurementSet out;
  std::string line;
  int lineno = 0;
  bool signature_seen = false;
  std::map<std::tuple<std::string, std::string, std::string, int, int, double>, int> seen;

  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string word;
      hs >> word;
      if (word == "grd-measurements") {
        std::string ver;
        hs >> ver;
        if (ver != "v1")
          throw ParseError("line " + std::to_string(lineno) + ": unsupported version '" + ver + "'");
        signature_seen = true;
      } else if (word == "metric") {
        if (!(hs >> out.metric >> out.z_min >> out.z_max) || out.z_max <= out.z_min)
          throw ParseError("line " + std::to_string(lineno) + ": malformed metric header");
      }
      continue;
    }
    if (!signature_seen)
      throw ParseError("line " + std::to_string(lineno) +
                       ": data before the '# grd-measurements v1' signature");
    std::istringstream ls(line);
    std::string source, codec, device;
    long width = 0, height = 0;
    double bitrate = 0.0, z = 0.0;
    if (!(ls >> source >> codec >> device >> width >> height >> bitrate >> z))
      throw ParseError("line " + std::to_string(lineno) +
                       ": expected 'source codec device width height bitrate_kbps quality'");
    std::string extra;
    if (ls >> extra)
      throw ParseError("line " + std::to_string(lineno) + ": trailing field '" + extra + "'");
    if (width <= 0 || height <= 0)
      throw ParseError("line " + std::to_string(lineno) + ": non-positive resolution");
    if (bitrate <= 0.0)
      throw ParseError("line " + std::to_string(lineno) + ": non-positive bitrate");
    if (z < out.z_min || z > out.z_max)
      throw RangeError("line " + std::to_string(lineno) + ": quality " + std::to_string(z) +
                       " outside [" + std::to_string(out.z_min) + ", " +
                       std::to_string(out.z_max) + "]");
    const auto key = std::make_tuple(source, codec, device, static_cast<int>(width),
                                     static_cast<int>(height), bitrate);
    const auto [it, fresh] = seen.emplace(key, lineno);
    if (!fresh)
      throw DuplicateKey("line " + std::to_string(lineno) + " duplicates line " +
                         std::to_string(it->second));
    out.groups[{source, codec}].push_back(
        {device, bitrate, static_cast<int>(width), static_cast<int>(height), z});
  }
  if (!signature_seen) throw ParseError("missing '# grd-measurements v1' signature");
  return out;
}

inline MeasurementSet load_measurements_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  return load_measurements(in);
}

inline void save_measurements(std::ostream& os, const MeasurementSet& ms) {
  os << "# grd-measurements v1\n";
  os << "# metric " << ms.metric << " " << ms.z_min << " " << ms.z_max << "\n";
  os << "# columns: source codec device width height bitrate_kbps quality\n";
  os.precision(17);
  for (const auto& [key, rows] : ms.groups)
    for (const auto& s : rows)
      os << key.first << " " << key.second << " " << s.device << " " << s.width << " " << s.height
         << " " << s.bitrate_kbps << " " << s.z << "\n";
}

}  // namespace grdfit
