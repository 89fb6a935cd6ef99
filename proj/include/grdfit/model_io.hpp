#pragma once

#include <string>

#include <json.hpp>

#include "grdfit/surface.hpp"

namespace grdfit {

inline constexpr int kModelFormatVersion = 1;

/// Self-describing model document. Doubles round-trip exactly through the
/// JSON layer (shortest-representation printing, up to 17 significant digits).
inline nlohmann::json serialize(const GRDModel& model) {
  nlohmann::json doc;
  doc["format"] = "grd-model";
  doc["version"] = kModelFormatVersion;
  doc["metadata"] = model.metadata;
  nlohmann::json devs = nlohmann::json::object();
  for (const auto& [device, surf] : model.surfaces) {
    nlohmann::json s;
    s["coordinate_map"] = surf.map().name();
    const Normalization& n = surf.normalization();
    s["normalization"] = {{"x_offset", n.x_offset},
                          {"x_scale", n.x_scale},
                          {"y_offset", n.y_offset},
                          {"y_scale", n.y_scale}};
    nlohmann::json sites = nlohmann::json::array();
    for (size_t i = 0; i < surf.triangulation().sites().size(); ++i) {
      const Site& st = surf.triangulation().sites()[i];
      sites.push_back({st.x, st.y});
    }
    s["sites"] = std::move(sites);
    nlohmann::json tris = nlohmann::json::array(), nets = nlohmann::json::array();
    for (size_t t = 0; t < surf.triangulation().triangles().size(); ++t) {
      const auto& mt = surf.triangulation().triangles()[t];
      tris.push_back({mt.v[0], mt.v[1], mt.v[2]});
      nets.push_back(surf.nets()[t]);
    }
    s["triangles"] = std::move(tris);
    s["ordinates"] = std::move(nets);
    s["d"] = std::vector<double>(surf.d().begin(), surf.d().end());
    s["xi"] = std::vector<double>(surf.xi().begin(), surf.xi().end());
    const FitReport& r = surf.report();
    s["fit"] = {{"status", to_string(r.status)},
                {"objective", r.objective},
                {"curvature", r.curvature},
                {"primal_residual", r.primal_residual},
                {"dual_residual", r.dual_residual},
                {"slack_l1", r.slack_l1},
                {"iterations", r.iterations},
                {"warnings", r.warnings}};
    devs[device] = std::move(s);
  }
  doc["devices"] = std::move(devs);
  return doc;
}

inline GRDModel deserialize(const nlohmann::json& doc) {
  try {
    if (!doc.contains("format") || doc.at("format") != "grd-model")
      throw CorruptDocument("not a grd-model document");
    const int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion)
      throw VersionMismatch("document version " + std::to_string(version) +
                            ", this build reads version " + std::to_string(kModelFormatVersion));
    GRDModel model;
    if (doc.contains("metadata"))
      model.metadata = doc.at("metadata").get<std::map<std::string, std::string>>();
    for (const auto& [device, s] : doc.at("devices").items()) {
      const CoordinateMap map = CoordinateMap::from_name(s.at("coordinate_map").get<std::string>());
      Normalization norm;
      norm.x_offset = s.at("normalization").at("x_offset").get<double>();
      norm.x_scale = s.at("normalization").at("x_scale").get<double>();
      norm.y_offset = s.at("normalization").at("y_offset").get<double>();
      norm.y_scale = s.at("normalization").at("y_scale").get<double>();

      std::vector<Site> sites;
      for (const auto& row : s.at("sites")) {
        if (row.size() != 2) throw CorruptDocument("site row must have 2 entries");
        sites.push_back({row[0].get<double>(), row[1].get<double>(), static_cast<int>(sites.size())});
      }
      std::vector<std::array<int, 3>> tris;
      for (const auto& row : s.at("triangles")) {
        if (row.size() != 3) throw CorruptDocument("triangle row must have 3 entries");
        tris.push_back({row[0].get<int>(), row[1].get<int>(), row[2].get<int>()});
      }
      std::vector<ControlNet> nets;
      for (const auto& row : s.at("ordinates")) {
        if (row.size() != 19) throw CorruptDocument("ordinate row must have 19 entries");
        ControlNet n;
        for (int i = 0; i < 19; ++i) n[i] = row[i].get<double>();
        nets.push_back(n);
      }
      if (nets.size() != tris.size())
        throw CorruptDocument("ordinate rows (" + std::to_string(nets.size()) +
                              ") do not match triangles (" + std::to_string(tris.size()) + ")");

      const std::vector<double> dv = s.at("d").get<std::vector<double>>();
      const std::vector<double> xv = s.at("xi").get<std::vector<double>>();
      Vec d = Eigen::Map<const Vec>(dv.data(), static_cast<Eigen::Index>(dv.size()));
      Vec xi = Eigen::Map<const Vec>(xv.data(), static_cast<Eigen::Index>(xv.size()));

      FitReport report;
      if (s.contains("fit")) {
        const auto& f = s.at("fit");
        const std::string st = f.value("status", "solved");
        report.status = st == "solved"        ? QPStatus::Solved
                        : st == "infeasible"  ? QPStatus::Infeasible
                        : st == "unbounded"   ? QPStatus::Unbounded
                                              : QPStatus::MaxIterations;
        report.objective = f.value("objective", 0.0);
        report.curvature = f.value("curvature", 0.0);
        report.primal_residual = f.value("primal_residual", 0.0);
        report.dual_residual = f.value("dual_residual", 0.0);
        report.slack_l1 = f.value("slack_l1", 0.0);
        report.iterations = f.value("iterations", 0L);
      }

      Triangulation tr = assemble_triangulation(std::move(sites), tris);
      model.surfaces.emplace(device, GRDSurface(map, norm, std::move(tr), std::move(nets),
                                                std::move(d), std::move(xi), std::move(report)));
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw CorruptDocument(std::string("malformed model document: ") + e.what());
  }
}

inline std::string serialize_text(const GRDModel& model) { return serialize(model).dump(1); }

inline GRDModel deserialize_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw CorruptDocument(std::string("model document is not valid JSON: ") + e.what());
  }
  return deserialize(doc);
}

}  // namespace grdfit
