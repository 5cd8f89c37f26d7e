#include "roofkit/splitter.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <set>

#include <fmt/format.h>

#include "roofkit/geojson.hpp"

namespace roofkit {

namespace {

constexpr int kSetCount = 3;

std::size_t count_of(const ClassHistogram& h, int c) {
  const auto it = h.find(c);
  return it == h.end() ? 0 : it->second;
}

std::size_t total_of(const ClassHistogram& h) {
  std::size_t n = 0;
  for (const auto& [c, k] : h) n += k;
  return n;
}

// Per-set class counts plus totals for a given assignment.
struct Tally {
  std::array<ClassHistogram, kSetCount> counts;
  std::array<std::size_t, kSetCount> buildings{};
  std::array<std::size_t, kSetCount> cells{};

  void add(const ClassHistogram& h, int set, int sign) {
    for (const auto& [c, k] : h) {
      auto& slot = counts[set][c];
      slot = sign > 0 ? slot + k : slot - k;
    }
    buildings[set] = sign > 0 ? buildings[set] + total_of(h) : buildings[set] - total_of(h);
    cells[set] = sign > 0 ? cells[set] + 1 : cells[set] - 1;
  }
};

struct Objective {
  double excess = 0.0;
  double chi2 = 0.0;
};

bool better(const Objective& a, const Objective& b) {
  constexpr double kEps = 1e-12;
  if (a.excess < b.excess - kEps) return true;
  if (a.excess > b.excess + kEps) return false;
  return a.chi2 < b.chi2 - kEps;
}

Objective evaluate_tally(const Tally& t, const ClassHistogram& totals,
                         const ClassHistogram& max_cell, const SplitFractions& f) {
  Objective o;
  for (int s = 0; s < kSetCount; ++s) {
    const double fraction = f.of(static_cast<SplitSet>(s));
    for (const auto& [c, total] : totals) {
      const double target = fraction * static_cast<double>(total);
      const double dev = static_cast<double>(count_of(t.counts[s], c)) - target;
      o.excess += std::max(0.0, std::abs(dev) - static_cast<double>(count_of(max_cell, c)));
      if (target > 0.0) o.chi2 += dev * dev / target;
    }
  }
  return o;
}

std::string lower(std::string s) {
  for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

int parse_class(const nlohmann::json& value) {
  if (value.is_number_integer()) return value.get<int>();
  if (value.is_string()) {
    const auto name = lower(value.get<std::string>());
    static const std::map<std::string, int> kNames = {
        {"metal sheet", 1}, {"metal_sheet", 1}, {"metal", 1},
        {"thatch", 2},      {"asbestos", 3},    {"concrete", 4},
        {"no roof", 5},     {"no_roof", 5},     {"no-roof", 5}};
    if (auto it = kNames.find(name); it != kNames.end()) return it->second;
    try {
      return std::stoi(name);
    } catch (const std::exception&) {
    }
  }
  throw ValidationError("building class must be an integer id or a roof material name");
}

Ring parse_ring(const nlohmann::json& coords) {
  Ring ring;
  for (const auto& p : coords) ring.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  if (!ring.empty() && !(ring.front() == ring.back())) ring.push_back(ring.front());
  require_valid_ring(ring);
  return ring;
}

Polygon parse_polygon(const nlohmann::json& rings) {
  Polygon poly;
  bool first = true;
  for (const auto& r : rings) {
    if (first) {
      poly.exterior = parse_ring(r);
      first = false;
    } else {
      poly.holes.push_back(parse_ring(r));
    }
  }
  if (first) throw ValidationError("polygon without rings");
  orient(poly);
  return poly;
}

}  // namespace

const char* set_name(SplitSet set) {
  switch (set) {
    case SplitSet::kTrain: return "train";
    case SplitSet::kVal: return "val";
    case SplitSet::kTest: return "test";
  }
  return "";
}

double SplitFractions::of(SplitSet set) const {
  switch (set) {
    case SplitSet::kTrain: return train;
    case SplitSet::kVal: return val;
    case SplitSet::kTest: return test;
  }
  return 0.0;
}

std::optional<int> Grid::cell_of(const Point& p) const {
  if (!(p.x >= extent.min_x && p.x <= extent.max_x && p.y >= extent.min_y &&
        p.y <= extent.max_y)) {
    return std::nullopt;
  }
  const int col = std::min(cols - 1, static_cast<int>(std::floor((p.x - extent.min_x) / cell_size)));
  const int row = std::min(rows - 1, static_cast<int>(std::floor((p.y - extent.min_y) / cell_size)));
  return row * cols + col;
}

Extent Grid::cell_bounds(int index) const {
  const int row = index / cols, col = index % cols;
  Extent e;
  e.min_x = extent.min_x + col * cell_size;
  e.min_y = extent.min_y + row * cell_size;
  e.max_x = e.min_x + cell_size;
  e.max_y = e.min_y + cell_size;
  return e;
}

Grid build_grid(const Extent& extent, double cell_size) {
  if (!(cell_size > 0.0)) throw ValidationError("cell size must be positive");
  const double width = extent.max_x - extent.min_x;
  const double height = extent.max_y - extent.min_y;
  if (!(width > 0.0) || !(height > 0.0)) {
    throw ValidationError("grid extent must have positive width and height");
  }
  Grid g;
  g.extent = extent;
  g.cell_size = cell_size;
  g.cols = std::max(1, static_cast<int>(std::ceil(width / cell_size)));
  g.rows = std::max(1, static_cast<int>(std::ceil(height / cell_size)));
  return g;
}

Point footprint_centroid(const std::vector<Polygon>& footprint) {
  double area = 0.0, cx = 0.0, cy = 0.0;
  auto accumulate = [&](const Ring& ring, double sign) {
    for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
      const auto& a = ring[i];
      const auto& b = ring[i + 1];
      const double cross = (a.x * b.y - b.x * a.y) * sign;
      area += cross / 2.0;
      cx += (a.x + b.x) * cross;
      cy += (a.y + b.y) * cross;
    }
  };
  for (const auto& poly : footprint) {
    accumulate(poly.exterior, signed_area(poly.exterior) >= 0 ? 1.0 : -1.0);
    for (const auto& hole : poly.holes) {
      accumulate(hole, signed_area(hole) <= 0 ? 1.0 : -1.0);
    }
  }
  if (area == 0.0) {
    if (footprint.empty() || footprint.front().exterior.empty()) {
      throw ValidationError("building footprint is empty");
    }
    return footprint.front().exterior.front();
  }
  return {cx / (6.0 * area), cy / (6.0 * area)};
}

Extent footprint_extent(const std::vector<BuildingRecord>& buildings) {
  Extent e{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& b : buildings) {
    for (const auto& poly : b.footprint) {
      for (const auto& p : poly.exterior) {
        e.min_x = std::min(e.min_x, p.x);
        e.min_y = std::min(e.min_y, p.y);
        e.max_x = std::max(e.max_x, p.x);
        e.max_y = std::max(e.max_y, p.y);
      }
    }
  }
  return e;
}

std::vector<ClassHistogram> cell_class_counts(const std::vector<BuildingRecord>& buildings,
                                              const Grid& grid) {
  std::vector<ClassHistogram> counts(grid.cell_count());
  for (const auto& b : buildings) {
    const auto cell = grid.cell_of(b.centroid);
    if (!cell) {
      throw ValidationError("building " + b.id + " has its centroid outside the grid");
    }
    ++counts[*cell][b.class_id];
  }
  return counts;
}

std::vector<int> rarest_first(const std::vector<ClassHistogram>& counts) {
  ClassHistogram totals;
  for (const auto& h : counts) {
    for (const auto& [c, k] : h) totals[c] += k;
  }
  std::vector<int> order;
  for (const auto& [c, k] : totals) order.push_back(c);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return totals[a] < totals[b]; });
  return order;
}

ClassHistogram max_cell_counts(const std::vector<ClassHistogram>& counts) {
  ClassHistogram out;
  for (const auto& h : counts) {
    for (const auto& [c, k] : h) out[c] = std::max(out[c], k);
  }
  return out;
}

double chi_square_to_target(const std::array<ClassHistogram, 3>& set_counts,
                            const ClassHistogram& totals, const SplitFractions& f) {
  double chi2 = 0.0;
  for (int s = 0; s < kSetCount; ++s) {
    for (const auto& [c, total] : totals) {
      const double target = f.of(static_cast<SplitSet>(s)) * static_cast<double>(total);
      if (target <= 0.0) continue;
      const double dev = static_cast<double>(count_of(set_counts[s], c)) - target;
      chi2 += dev * dev / target;
    }
  }
  return chi2;
}

GridSplit partition_cells(const Grid& grid, const std::vector<ClassHistogram>& counts,
                          const SplitFractions& f, std::vector<int> priority) {
  for (double x : {f.train, f.val, f.test}) {
    if (!(x >= 0.0)) throw ValidationError("split fractions must be non-negative");
  }
  if (std::abs(f.train + f.val + f.test - 1.0) > 1e-9) {
    throw ValidationError("split fractions must sum to 1");
  }
  if (counts.size() != static_cast<std::size_t>(grid.cell_count())) {
    throw ValidationError("cell counts do not match the grid");
  }

  GridSplit split;
  split.grid = grid;
  split.priority = priority.empty() ? rarest_first(counts) : std::move(priority);
  split.cell_set.assign(counts.size(), SplitSet::kTrain);
  if (counts.empty()) return split;

  ClassHistogram totals;
  for (const auto& h : counts) {
    for (const auto& [c, k] : h) totals[c] += k;
  }
  const std::size_t all_buildings = total_of(totals);
  const ClassHistogram max_cell = max_cell_counts(counts);

  std::vector<int> order(counts.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    for (int c : split.priority) {
      const auto ka = count_of(counts[a], c), kb = count_of(counts[b], c);
      if (ka != kb) return ka > kb;
    }
    return total_of(counts[a]) > total_of(counts[b]);
  });

  Tally tally;
  std::vector<int> assigned(counts.size(), 0);
  const double cells = static_cast<double>(counts.size());
  for (int cell : order) {
    const auto& h = counts[cell];
    std::vector<double> best_key;
    int best_set = 0;
    for (int s = 0; s < kSetCount; ++s) {
      const double fraction = f.of(static_cast<SplitSet>(s));
      std::vector<double> key;
      for (int c : split.priority) {
        if (count_of(h, c) == 0) continue;
        key.push_back(fraction * static_cast<double>(totals[c]) -
                      static_cast<double>(count_of(tally.counts[s], c)));
      }
      key.push_back(fraction * static_cast<double>(all_buildings) -
                    static_cast<double>(tally.buildings[s]));
      key.push_back(fraction * cells - static_cast<double>(tally.cells[s]));
      if (s == 0 || key > best_key) {
        best_key = std::move(key);
        best_set = s;
      }
    }
    assigned[cell] = best_set;
    tally.add(h, best_set, +1);
  }

  // Local search over cells holding buildings.
  std::vector<int> occupied;
  for (int cell = 0; cell < static_cast<int>(counts.size()); ++cell) {
    if (total_of(counts[cell]) > 0) occupied.push_back(cell);
  }
  Objective current = evaluate_tally(tally, totals, max_cell, f);
  bool improved = true;
  for (int round = 0; improved && round < 1000; ++round) {
    improved = false;
    for (int cell : occupied) {
      for (int s = 0; s < kSetCount; ++s) {
        const int from = assigned[cell];
        if (s == from) continue;
        tally.add(counts[cell], from, -1);
        tally.add(counts[cell], s, +1);
        const Objective next = evaluate_tally(tally, totals, max_cell, f);
        if (better(next, current)) {
          assigned[cell] = s;
          current = next;
          improved = true;
        } else {
          tally.add(counts[cell], s, -1);
          tally.add(counts[cell], from, +1);
        }
      }
    }
    for (std::size_t i = 0; i < occupied.size(); ++i) {
      for (std::size_t j = i + 1; j < occupied.size(); ++j) {
        const int a = occupied[i], b = occupied[j];
        const int sa = assigned[a], sb = assigned[b];
        if (sa == sb) continue;
        tally.add(counts[a], sa, -1);
        tally.add(counts[b], sb, -1);
        tally.add(counts[a], sb, +1);
        tally.add(counts[b], sa, +1);
        const Objective next = evaluate_tally(tally, totals, max_cell, f);
        if (better(next, current)) {
          assigned[a] = sb;
          assigned[b] = sa;
          current = next;
          improved = true;
        } else {
          tally.add(counts[a], sb, -1);
          tally.add(counts[b], sa, -1);
          tally.add(counts[a], sa, +1);
          tally.add(counts[b], sb, +1);
        }
      }
    }
  }

  for (std::size_t cell = 0; cell < counts.size(); ++cell) {
    split.cell_set[cell] = static_cast<SplitSet>(assigned[cell]);
    for (const auto& [c, k] : counts[cell]) split.set_counts[assigned[cell]][c] += k;
  }
  return split;
}

Ring clip_ring(const Ring& ring, const Extent& box) {
  std::vector<Point> poly(ring.begin(), ring.end());
  if (!poly.empty() && poly.front() == poly.back()) poly.pop_back();

  auto clip = [&](auto inside, auto intersect) {
    std::vector<Point> out;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Point& cur = poly[i];
      const Point& prev = poly[(i + poly.size() - 1) % poly.size()];
      const bool in_cur = inside(cur), in_prev = inside(prev);
      if (in_cur) {
        if (!in_prev) out.push_back(intersect(prev, cur));
        out.push_back(cur);
      } else if (in_prev) {
        out.push_back(intersect(prev, cur));
      }
    }
    poly = std::move(out);
  };
  auto at_x = [](double x) {
    return [x](const Point& a, const Point& b) {
      const double t = (x - a.x) / (b.x - a.x);
      return Point{x, a.y + t * (b.y - a.y)};
    };
  };
  auto at_y = [](double y) {
    return [y](const Point& a, const Point& b) {
      const double t = (y - a.y) / (b.y - a.y);
      return Point{a.x + t * (b.x - a.x), y};
    };
  };
  clip([&](const Point& p) { return p.x >= box.min_x; }, at_x(box.min_x));
  clip([&](const Point& p) { return p.x <= box.max_x; }, at_x(box.max_x));
  clip([&](const Point& p) { return p.y >= box.min_y; }, at_y(box.min_y));
  clip([&](const Point& p) { return p.y <= box.max_y; }, at_y(box.max_y));

  if (poly.size() < 3) return {};
  poly.push_back(poly.front());
  if (signed_area(poly) == 0.0) return {};
  return poly;
}

void leakage_masks(const std::vector<BuildingRecord>& buildings, GridSplit& split) {
  const Grid& grid = split.grid;
  split.masks.clear();
  for (const auto& b : buildings) {
    const auto home = grid.cell_of(b.centroid);
    if (!home) throw ValidationError("building " + b.id + " has its centroid outside the grid");
    const SplitSet own = split.cell_set[*home];

    Extent box = footprint_extent({b});
    const int c0 = std::max(0, static_cast<int>(std::floor((box.min_x - grid.extent.min_x) / grid.cell_size)));
    const int c1 = std::min(grid.cols - 1, static_cast<int>(std::floor((box.max_x - grid.extent.min_x) / grid.cell_size)));
    const int r0 = std::max(0, static_cast<int>(std::floor((box.min_y - grid.extent.min_y) / grid.cell_size)));
    const int r1 = std::min(grid.rows - 1, static_cast<int>(std::floor((box.max_y - grid.extent.min_y) / grid.cell_size)));
    for (int row = r0; row <= r1; ++row) {
      for (int col = c0; col <= c1; ++col) {
        const int cell = row * grid.cols + col;
        if (split.cell_set[cell] == own) continue;
        const Extent bounds = grid.cell_bounds(cell);
        for (const auto& poly : b.footprint) {
          Polygon piece;
          piece.exterior = clip_ring(poly.exterior, bounds);
          if (piece.exterior.empty()) continue;
          for (const auto& hole : poly.holes) {
            Ring clipped = clip_ring(hole, bounds);
            if (!clipped.empty()) piece.holes.push_back(std::move(clipped));
          }
          piece.class_id = b.class_id;
          orient(piece);
          split.masks.push_back({b.id, cell, split.cell_set[cell], std::move(piece)});
        }
      }
    }
  }
}

std::vector<BuildingRecord> buildings_from_geojson(const nlohmann::json& collection) {
  std::vector<BuildingRecord> out;
  try {
    if (collection.at("type") != "FeatureCollection") {
      throw ValidationError("buildings must be a GeoJSON FeatureCollection");
    }
    std::size_t index = 0;
    for (const auto& feature : collection.at("features")) {
      BuildingRecord b;
      const auto& props = feature.at("properties");
      if (props.contains("id")) {
        b.id = props["id"].is_string() ? props["id"].get<std::string>() : props["id"].dump();
      } else if (feature.contains("id")) {
        b.id = feature["id"].is_string() ? feature["id"].get<std::string>()
                                         : feature["id"].dump();
      } else {
        b.id = std::to_string(index);
      }
      b.class_id = parse_class(props.at("class"));
      const auto& geom = feature.at("geometry");
      const auto type = geom.at("type").get<std::string>();
      if (type == "Polygon") {
        b.footprint.push_back(parse_polygon(geom.at("coordinates")));
      } else if (type == "MultiPolygon") {
        for (const auto& rings : geom.at("coordinates")) {
          b.footprint.push_back(parse_polygon(rings));
        }
      } else {
        throw ValidationError("unsupported building geometry '" + type + "'");
      }
      for (auto& poly : b.footprint) poly.class_id = b.class_id;
      b.centroid = footprint_centroid(b.footprint);
      out.push_back(std::move(b));
      ++index;
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("buildings GeoJSON: ") + e.what());
  }
  return out;
}

std::vector<BuildingRecord> read_buildings(const std::filesystem::path& path) {
  return buildings_from_geojson(read_json_file(path));
}

nlohmann::json split_to_json(const GridSplit& split) {
  const Grid& g = split.grid;
  nlohmann::json cells = nlohmann::json::array();
  for (int i = 0; i < g.cell_count(); ++i) {
    cells.push_back({{"index", i},
                     {"row", i / g.cols},
                     {"col", i % g.cols},
                     {"set", set_name(split.cell_set[i])}});
  }
  nlohmann::json counts = nlohmann::json::object();
  for (auto set : kSplitSets) {
    nlohmann::json h = nlohmann::json::object();
    for (const auto& [c, k] : split.counts(set)) h[std::to_string(c)] = k;
    counts[set_name(set)] = std::move(h);
  }
  return {{"cell_size", g.cell_size},
          {"origin", {g.extent.min_x, g.extent.min_y}},
          {"cols", g.cols},
          {"rows", g.rows},
          {"priority", split.priority},
          {"cells", std::move(cells)},
          {"class_counts", std::move(counts)}};
}

PolygonSet mask_polygons(const GridSplit& split, SplitSet set) {
  PolygonSet out;
  for (const auto& m : split.masks) {
    if (m.set == set) out.polygons.push_back(m.piece);
  }
  return out;
}

std::string class_counts_csv(const GridSplit& split) {
  std::set<int> classes;
  for (auto set : kSplitSets) {
    for (const auto& [c, k] : split.counts(set)) classes.insert(c);
  }
  std::string out = "set,class,count\n";
  for (auto set : kSplitSets) {
    for (int c : classes) {
      out += fmt::format("{},{},{}\n", set_name(set), c, count_of(split.counts(set), c));
    }
  }
  return out;
}

}  // namespace roofkit
