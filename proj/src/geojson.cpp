#include "roofkit/geojson.hpp"

#include <fstream>
#include <sstream>

namespace roofkit {

namespace {

nlohmann::json ring_json(const Ring& ring) {
  auto coords = nlohmann::json::array();
  for (const auto& p : ring) coords.push_back({p.x, p.y});
  return coords;
}

}  // namespace

nlohmann::json to_geojson(const PolygonSet& polygons,
                          const std::optional<GeoTransform>& transform) {
  auto features = nlohmann::json::array();
  for (const auto& source : polygons.polygons) {
    Polygon poly = source;
    require_valid_ring(poly.exterior);
    for (const auto& hole : poly.holes) require_valid_ring(hole);
    if (transform) {
      for (auto& p : poly.exterior) p = transform->apply(p);
      for (auto& hole : poly.holes) {
        for (auto& p : hole) p = transform->apply(p);
      }
    }
    orient(poly);

    auto rings = nlohmann::json::array();
    rings.push_back(ring_json(poly.exterior));
    for (const auto& hole : poly.holes) rings.push_back(ring_json(hole));
    features.push_back({
        {"type", "Feature"},
        {"properties",
         {{"instance", poly.instance_id},
          {"class", poly.class_id},
          {"confidence", poly.confidence}}},
        {"geometry", {{"type", "Polygon"}, {"coordinates", std::move(rings)}}},
    });
  }
  return {{"type", "FeatureCollection"}, {"features", std::move(features)}};
}

void write_geojson(const PolygonSet& polygons, const std::filesystem::path& path,
                   const std::optional<GeoTransform>& transform) {
  write_text_file(path, to_geojson(polygons, transform).dump() + "\n");
}

GeoTransform read_geotransform(const std::filesystem::path& path) {
  const auto j = read_json_file(path);
  GeoTransform t;
  try {
    t.origin_x = j.at("origin_x").get<double>();
    t.origin_y = j.at("origin_y").get<double>();
    t.pixel_size = j.at("pixel_size").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  if (!(t.pixel_size > 0.0)) {
    throw ValidationError(path.string() + ": pixel_size must be positive");
  }
  return t;
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot create " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace roofkit
