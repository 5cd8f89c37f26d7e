#pragma once

#include <limits>
#include <vector>

#include "roofkit/array.hpp"

namespace roofkit {

// Per-pixel Euclidean distance in pixels. Pixels with no reachable source
// hold kInfiniteDistance.
using DistanceField = FloatImage;

inline constexpr float kInfiniteDistance = std::numeric_limits<float>::infinity();

// Which pixels of a binary mask act as the source set.
enum class DistanceSource {
  kBackground,  // distance to the nearest 0 pixel
  kForeground,  // distance to the nearest nonzero pixel
};

// Exact squared Euclidean distances to the nearest nonzero pixel of
// `sources`, computed with the separable lower-envelope algorithm. Entries
// are exact integers stored as double; +inf where `sources` is empty.
std::vector<double> squared_distance_to(const Mask& sources);

// Exact Euclidean distance transform. Pixels outside the raster are not
// part of either set.
DistanceField distance_transform(const Mask& mask, DistanceSource from);

}  // namespace roofkit
