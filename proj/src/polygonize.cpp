#include "roofkit/polygonize.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace roofkit {

namespace {

enum Dir : int { kEast = 0, kSouth = 1, kWest = 2, kNorth = 3 };
constexpr int kDx[4] = {1, 0, -1, 0};
constexpr int kDy[4] = {0, 1, 0, -1};

// Directed unit edge on the pixel-corner lattice, instance on its right
// (screen coordinates, y down).
struct Edge {
  int x = 0, y = 0;
  Dir dir = kEast;
  bool used = false;
};

struct TracedRing {
  Ring ring;
  Point probe;  // centre of a pixel just outside the traced region's side
  double area = 0.0;
};

std::int64_t vertex_key(int x, int y) {
  return (static_cast<std::int64_t>(y) << 32) | static_cast<std::uint32_t>(x);
}

// Drops collinear vertices, starts the ring at its smallest (y, x) corner
// and closes it.
Ring simplify(const std::vector<Point>& loop) {
  std::vector<Point> corners;
  const std::size_t n = loop.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& prev = loop[(i + n - 1) % n];
    const Point& cur = loop[i];
    const Point& next = loop[(i + 1) % n];
    const double cross = (cur.x - prev.x) * (next.y - cur.y) -
                         (cur.y - prev.y) * (next.x - cur.x);
    if (cross != 0.0) corners.push_back(cur);
  }
  auto first = std::min_element(corners.begin(), corners.end(),
                                [](const Point& a, const Point& b) {
                                  return a.y != b.y ? a.y < b.y : a.x < b.x;
                                });
  std::rotate(corners.begin(), first, corners.end());
  corners.push_back(corners.front());
  return corners;
}

std::vector<TracedRing> trace(const LabelImage& map, std::uint32_t id,
                              const std::vector<std::size_t>& pixels) {
  const int h = map.height(), w = map.width();
  auto inside = [&](int r, int c) {
    return r >= 0 && c >= 0 && r < h && c < w && map(r, c) == id;
  };

  std::vector<Edge> edges;
  for (auto i : pixels) {
    const int r = static_cast<int>(i / w), c = static_cast<int>(i % w);
    if (!inside(r - 1, c)) edges.push_back({c, r, kEast});
    if (!inside(r, c + 1)) edges.push_back({c + 1, r, kSouth});
    if (!inside(r + 1, c)) edges.push_back({c + 1, r + 1, kWest});
    if (!inside(r, c - 1)) edges.push_back({c, r + 1, kNorth});
  }
  std::unordered_map<std::int64_t, std::vector<std::size_t>> outgoing;
  outgoing.reserve(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    outgoing[vertex_key(edges[e].x, edges[e].y)].push_back(e);
  }

  std::vector<TracedRing> rings;
  for (std::size_t start = 0; start < edges.size(); ++start) {
    if (edges[start].used) continue;
    std::vector<Point> loop;
    std::size_t e = start;
    while (!edges[e].used) {
      Edge& edge = edges[e];
      edge.used = true;
      loop.push_back({static_cast<double>(edge.x), static_cast<double>(edge.y)});
      const int nx = edge.x + kDx[edge.dir], ny = edge.y + kDy[edge.dir];
      const auto& candidates = outgoing.at(vertex_key(nx, ny));
      // At a corner-touching vertex prefer the right turn, which keeps
      // hugging the current pixel.
      std::size_t chosen = candidates.front();
      if (candidates.size() > 1) {
        const Dir right = static_cast<Dir>((edge.dir + 1) % 4);
        for (auto cand : candidates) {
          if (edges[cand].dir == right) chosen = cand;
        }
      }
      e = chosen;
    }
    const Edge& first = edges[start];
    // Left of travel is outside the region.
    const double mx = first.x + 0.5 * kDx[first.dir];
    const double my = first.y + 0.5 * kDy[first.dir];
    TracedRing traced;
    traced.probe = {mx + 0.5 * kDy[first.dir], my - 0.5 * kDx[first.dir]};
    traced.ring = simplify(loop);
    traced.area = signed_area(traced.ring);
    rings.push_back(std::move(traced));
  }
  return rings;
}

}  // namespace

PolygonSet polygonize(const InstanceSet& instances) {
  const auto& map = instances.instance_map;
  std::vector<std::vector<std::size_t>> pixels(instances.size() + 1);
  for (std::size_t i = 0; i < map.size(); ++i) {
    if (map[i] != 0 && map[i] <= instances.size()) pixels[map[i]].push_back(i);
  }

  PolygonSet out;
  for (const auto& rec : instances.records) {
    if (pixels[rec.id].empty()) continue;
    auto rings = trace(map, rec.id, pixels[rec.id]);
    std::vector<Polygon> pieces;
    std::vector<const TracedRing*> holes;
    for (const auto& r : rings) {
      if (r.area > 0) {
        Polygon p;
        p.exterior = r.ring;
        p.instance_id = rec.id;
        p.class_id = rec.class_id;
        p.confidence = rec.confidence;
        pieces.push_back(std::move(p));
      } else {
        holes.push_back(&r);
      }
    }
    for (const TracedRing* hole : holes) {
      // The smallest exterior around the hole's outside pixel owns it.
      Polygon* owner = nullptr;
      double owner_area = 0.0;
      for (auto& piece : pieces) {
        if (!ring_contains(piece.exterior, hole->probe)) continue;
        const double a = signed_area(piece.exterior);
        if (!owner || a < owner_area) {
          owner = &piece;
          owner_area = a;
        }
      }
      if (!owner) throw Error("polygonize: hole ring without an enclosing exterior");
      owner->holes.push_back(hole->ring);
    }
    auto by_start = [](const Ring& a, const Ring& b) {
      return a.front().y != b.front().y ? a.front().y < b.front().y
                                        : a.front().x < b.front().x;
    };
    for (auto& piece : pieces) {
      std::sort(piece.holes.begin(), piece.holes.end(), by_start);
    }
    std::sort(pieces.begin(), pieces.end(), [&](const Polygon& a, const Polygon& b) {
      return by_start(a.exterior, b.exterior);
    });
    for (auto& piece : pieces) out.polygons.push_back(std::move(piece));
  }
  return out;
}

}  // namespace roofkit
