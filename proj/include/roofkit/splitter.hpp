#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "roofkit/geometry.hpp"

namespace roofkit {

enum class SplitSet : int { kTrain = 0, kVal = 1, kTest = 2 };
inline constexpr std::array<SplitSet, 3> kSplitSets = {SplitSet::kTrain, SplitSet::kVal,
                                                       SplitSet::kTest};
const char* set_name(SplitSet set);

struct Extent {
  double min_x = 0.0, min_y = 0.0, max_x = 0.0, max_y = 0.0;
};

// Square cells anchored at the extent's min corner, indexed row-major
// (index = row * cols + col, row growing with y). Cells are half-open,
// [x0, x1) x [y0, y1); points on the extent's max edges belong to the last
// cell so the whole closed extent is covered exactly once.
struct Grid {
  Extent extent;
  double cell_size = 225.0;
  int cols = 0;
  int rows = 0;

  int cell_count() const { return cols * rows; }
  std::optional<int> cell_of(const Point& p) const;
  Extent cell_bounds(int index) const;
};

Grid build_grid(const Extent& extent, double cell_size = 225.0);

struct BuildingRecord {
  std::string id;
  Point centroid;
  std::vector<Polygon> footprint;
  int class_id = 0;
};

// Area-weighted centroid of the footprint (holes subtract).
Point footprint_centroid(const std::vector<Polygon>& footprint);
Extent footprint_extent(const std::vector<BuildingRecord>& buildings);

using ClassHistogram = std::map<int, std::size_t>;

// Each building is counted in the cell containing its centroid. Throws
// ValidationError for a centroid outside the grid.
std::vector<ClassHistogram> cell_class_counts(const std::vector<BuildingRecord>& buildings,
                                              const Grid& grid);

struct SplitFractions {
  double train = 0.7;
  double val = 0.15;
  double test = 0.15;

  double of(SplitSet set) const;
};

// Footprint part lying in a cell of a different set than the building's
// centroid cell; `set` is the set whose data must hide it.
struct MaskRegion {
  std::string building_id;
  int cell = 0;
  SplitSet set = SplitSet::kTrain;
  Polygon piece;
};

struct GridSplit {
  Grid grid;
  std::vector<SplitSet> cell_set;
  std::array<ClassHistogram, 3> set_counts;
  std::vector<int> priority;  // rarest class first
  std::vector<MaskRegion> masks;

  const ClassHistogram& counts(SplitSet set) const {
    return set_counts[static_cast<int>(set)];
  }
};

// Classes ordered by ascending global count (ties: lower class id).
std::vector<int> rarest_first(const std::vector<ClassHistogram>& counts);

// Stratified partition of grid cells into train / val / test.
//
// Cells are visited in descending order of their counts along the class
// priority order (then total count, then cell index). Each goes to the set
// whose counts are furthest below target (fraction x global total),
// compared on the cell's classes in priority order, then on total
// buildings, then on the number of cells. A deterministic local search of
// single-cell moves and pairwise swaps then lowers, in this order, the
// excess of any set-class deviation over one cell's worth of that class
// and the chi-square distance to the targets. An empty `priority` means
// rarest_first(counts).
GridSplit partition_cells(const Grid& grid, const std::vector<ClassHistogram>& counts,
                          const SplitFractions& fractions, std::vector<int> priority = {});

// Sum over sets and classes of (count - target)^2 / target, skipping zero
// targets.
double chi_square_to_target(const std::array<ClassHistogram, 3>& set_counts,
                            const ClassHistogram& totals, const SplitFractions& fractions);

// Largest count of each class found in a single cell.
ClassHistogram max_cell_counts(const std::vector<ClassHistogram>& counts);

// Fills split.masks with the footprint parts of every building that fall in
// cells assigned to a set other than the building's own.
void leakage_masks(const std::vector<BuildingRecord>& buildings, GridSplit& split);

// Sutherland-Hodgman clip of a closed ring to an axis-aligned rectangle.
// Returns an empty ring when nothing remains.
Ring clip_ring(const Ring& ring, const Extent& box);

// Reads a FeatureCollection of Polygon / MultiPolygon buildings with a
// `class` property (integer id or roof material name).
std::vector<BuildingRecord> read_buildings(const std::filesystem::path& path);
std::vector<BuildingRecord> buildings_from_geojson(const nlohmann::json& collection);

nlohmann::json split_to_json(const GridSplit& split);
PolygonSet mask_polygons(const GridSplit& split, SplitSet set);
std::string class_counts_csv(const GridSplit& split);

}  // namespace roofkit
