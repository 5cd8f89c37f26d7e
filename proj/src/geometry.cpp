#include "roofkit/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace roofkit {

double signed_area(const Ring& ring) {
  double twice = 0.0;
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    twice += ring[i].x * ring[i + 1].y - ring[i + 1].x * ring[i].y;
  }
  return 0.5 * twice;
}

double polygon_area(const Polygon& polygon) {
  double area = std::abs(signed_area(polygon.exterior));
  for (const auto& hole : polygon.holes) area -= std::abs(signed_area(hole));
  return area;
}

bool ring_contains(const Ring& ring, const Point& p) {
  bool inside = false;
  for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
    const Point& a = ring[i];
    const Point& b = ring[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

bool polygon_contains(const Polygon& polygon, const Point& p) {
  if (!ring_contains(polygon.exterior, p)) return false;
  return std::none_of(polygon.holes.begin(), polygon.holes.end(),
                      [&](const Ring& hole) { return ring_contains(hole, p); });
}

void orient(Polygon& polygon) {
  if (signed_area(polygon.exterior) < 0) {
    std::reverse(polygon.exterior.begin(), polygon.exterior.end());
  }
  for (auto& hole : polygon.holes) {
    if (signed_area(hole) > 0) std::reverse(hole.begin(), hole.end());
  }
}

void require_valid_ring(const Ring& ring) {
  if (ring.size() < 4) {
    throw ValidationError("degenerate ring: fewer than 4 vertices");
  }
  if (!(ring.front() == ring.back())) throw ValidationError("ring is not closed");
}

Mask rasterize(const std::vector<Polygon>& polygons, int height, int width) {
  Mask out(height, width);
  for (const auto& polygon : polygons) {
    double min_y = polygon.exterior.front().y, max_y = min_y;
    double min_x = polygon.exterior.front().x, max_x = min_x;
    for (const auto& p : polygon.exterior) {
      min_x = std::min(min_x, p.x);
      max_x = std::max(max_x, p.x);
      min_y = std::min(min_y, p.y);
      max_y = std::max(max_y, p.y);
    }
    const int r0 = std::max(0, static_cast<int>(std::floor(min_y)));
    const int r1 = std::min(height - 1, static_cast<int>(std::ceil(max_y)));
    const int c0 = std::max(0, static_cast<int>(std::floor(min_x)));
    const int c1 = std::min(width - 1, static_cast<int>(std::ceil(max_x)));
    for (int r = r0; r <= r1; ++r) {
      for (int c = c0; c <= c1; ++c) {
        if (polygon_contains(polygon, {c + 0.5, r + 0.5})) out(r, c) = 1;
      }
    }
  }
  return out;
}

}  // namespace roofkit
