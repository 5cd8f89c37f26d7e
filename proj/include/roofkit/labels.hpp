#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <vector>

#include "roofkit/array.hpp"
#include "roofkit/distance.hpp"

namespace roofkit {

// Instance-id raster (0 = background) plus the class of each instance.
// Ids need not be contiguous.
struct LabelRaster {
  LabelImage ids;
  std::map<std::uint32_t, int> class_of;

  // Throws ValidationError if a nonzero id has no class entry.
  void validate() const;
};

// Axis-aligned pixel bounds of one instance, inclusive on both ends.
struct PixelBox {
  int row0 = 0, col0 = 0, row1 = -1, col1 = -1;
};

// Bounding boxes of every nonzero id, ordered by id.
std::map<std::uint32_t, PixelBox> instance_boxes(const LabelImage& ids);

struct SegmentDistances {
  DistanceField nearest;  // d1: 0 on foreground pixels
  DistanceField second;   // d2: kInfiniteDistance if fewer than two segments
};

// Distances from every pixel to its nearest and second-nearest distinct
// segments. Distances larger than `max_distance` are reported as
// kInfiniteDistance; the default computes every distance exactly.
SegmentDistances two_nearest_segment_distances(
    const LabelImage& ids,
    double max_distance = std::numeric_limits<double>::infinity());

struct GapEdit {
  std::vector<std::uint32_t> removed_instances;
  std::size_t relabeled_pixels = 0;
};

struct GapResult {
  LabelRaster labels;
  GapEdit edit;
};

// Relabels as background every object pixel closer than `min_gap` to a pixel
// of a different instance. Both sides of a close pair are eroded, so every
// remaining pair of distinct instances is at least `min_gap` apart.
GapResult enforce_gap(const LabelRaster& labels, int min_gap = 7);

enum class WeightMode {
  kLiteral,  // background weight = w(x)
  kAdditive,      // background weight = 1 + w(x)
};

struct WeightParams {
  double w0 = 10.0;
  double sigma = 5.0;
  WeightMode mode = WeightMode::kAdditive;
};

// w0 * exp(-(d1 + d2)^2 / (2 sigma^2)).
double boundary_weight(double distance_sum, double w0, double sigma);

// Distance sum beyond which boundary_weight() rounds to 0 in float32.
double negligible_weight_distance(double w0, double sigma);

// Per-pixel loss weights emphasising narrow background between segments.
// Foreground pixels weigh exactly 1.
FloatImage weight_map(const LabelImage& ids, const WeightParams& params = {});

// Nested ordinal level masks. levels[0] is level 1 (all object pixels);
// levels[m-1] marks object pixels farther than (m-1) * level_margin from
// the nearest pixel outside their own instance.
struct OrdinalTargets {
  std::vector<Mask> levels;
  int level_margin = 0;

  // Per-pixel height h(x): the number of level masks marking the pixel.
  Array2D<std::uint8_t> heights() const;
};

OrdinalTargets ordinal_targets(const LabelImage& ids, int level_count,
                               int level_margin);

}  // namespace roofkit
