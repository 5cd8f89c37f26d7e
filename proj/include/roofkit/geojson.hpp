#pragma once

#include <filesystem>
#include <optional>

#include <json.hpp>

#include "roofkit/geometry.hpp"

namespace roofkit {

// RFC 7946 FeatureCollection with one Polygon feature per polygon and
// properties {instance, class, confidence}. With a transform, coordinates
// are mapped to world coordinates first; rings are oriented after the
// mapping (exteriors counter-clockwise, holes clockwise). Throws
// ValidationError for degenerate rings.
nlohmann::json to_geojson(const PolygonSet& polygons,
                          const std::optional<GeoTransform>& transform = std::nullopt);

void write_geojson(const PolygonSet& polygons, const std::filesystem::path& path,
                   const std::optional<GeoTransform>& transform = std::nullopt);

// Reads a {origin_x, origin_y, pixel_size} georeferencing sidecar.
GeoTransform read_geotransform(const std::filesystem::path& path);

// JSON helpers shared by the file writers.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace roofkit
