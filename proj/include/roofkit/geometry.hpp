#pragma once

#include <cstdint>
#include <vector>

#include "roofkit/array.hpp"

namespace roofkit {

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

// Closed ring: the first vertex is repeated at the end.
using Ring = std::vector<Point>;

struct Polygon {
  Ring exterior;
  std::vector<Ring> holes;
  std::uint32_t instance_id = 0;
  int class_id = 0;
  double confidence = 1.0;
};

// Polygons in pixel coordinates (x = column, y = row, pixel (r, c) covers
// [c, c + 1] x [r, r + 1]) unless transformed to world coordinates.
struct PolygonSet {
  std::vector<Polygon> polygons;
};

// Shoelace area; positive for counter-clockwise rings in the numeric (x, y)
// plane.
double signed_area(const Ring& ring);
double polygon_area(const Polygon& polygon);

// Even-odd test over a closed ring. Points exactly on an edge are
// unspecified.
bool ring_contains(const Ring& ring, const Point& p);
bool polygon_contains(const Polygon& polygon, const Point& p);

// Reverses rings as needed so exteriors are counter-clockwise and holes
// clockwise.
void orient(Polygon& polygon);

// Throws ValidationError for open rings or rings with fewer than 4 vertices.
void require_valid_ring(const Ring& ring);

// Pixels whose centres fall inside any polygon of the set.
Mask rasterize(const std::vector<Polygon>& polygons, int height, int width);

// Maps pixel coordinates to world coordinates for a north-up raster:
// x = origin_x + col * pixel_size, y = origin_y - row * pixel_size.
struct GeoTransform {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double pixel_size = 1.0;

  Point apply(const Point& pixel) const {
    return {origin_x + pixel.x * pixel_size, origin_y - pixel.y * pixel_size};
  }
};

}  // namespace roofkit
