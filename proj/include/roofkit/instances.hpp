#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include "roofkit/array.hpp"

namespace roofkit {

enum class Connectivity { kFour = 4, kEight = 8 };

struct InstanceRecord {
  std::uint32_t id = 0;
  int class_id = 0;  // 0 until classified
  double confidence = 1.0;
  std::size_t pixel_count = 0;
};

// Separated objects. Ids are dense: records[i].id == i + 1 and the instance
// map uses 0 for background.
struct InstanceSet {
  LabelImage instance_map;
  std::vector<InstanceRecord> records;

  std::size_t size() const { return records.size(); }
  const InstanceRecord& record(std::uint32_t id) const { return records.at(id - 1); }

  // Checks id density, pixel counts and confidence range.
  void validate() const;
};

// Builds an InstanceSet from arbitrary ids. Instances are renumbered
// densely in ascending order of their original id; classes and confidences
// are looked up by original id (missing confidence defaults to 1).
InstanceSet make_instance_set(const LabelImage& ids,
                              const std::map<std::uint32_t, int>& class_of,
                              const std::map<std::uint32_t, double>& confidence_of = {});

// Maximal connected foreground regions, labelled 1..N in the row-major order
// in which each region is first encountered.
InstanceSet connected_components(const Mask& mask,
                                 Connectivity connectivity = Connectivity::kEight);

enum class StackKind { kClassProbs, kLevelProbs };

// Per-pixel probability maps from an external model.
//
// kClassProbs: layer 0 is background, layer k is class k; layers sum to 1.
// kLevelProbs: layer m - 1 is the probability of ordinal level m.
struct ProbabilityStack {
  std::vector<FloatImage> layers;
  StackKind kind = StackKind::kClassProbs;

  int height() const { return layers.empty() ? 0 : layers[0].height(); }
  int width() const { return layers.empty() ? 0 : layers[0].width(); }

  // Values in [0, 1], equal shapes, and for class stacks per-pixel sums
  // within `tolerance` of 1.
  void validate(double tolerance = 1e-4) const;
};

bool is_nested(const std::vector<Mask>& levels);

// Per-level masks p >= threshold, then intersected with the level below so
// that levels[m + 1] is a subset of levels[m].
std::vector<Mask> threshold_levels(const ProbabilityStack& stack,
                                   double threshold = 0.5);

// Height h(x) = number of level masks marking x (0 on background).
Array2D<std::uint8_t> elevation_map(const std::vector<Mask>& levels);

// Marker-based watershed on nested level masks. Within each connected
// component of levels[0], the pixels at the component's deepest level form
// the markers; floods grow from markers in order of increasing elevation
// until every levels[0] pixel belongs to exactly one basin. Components
// that never reach level 2 become one instance each. Throws
// ValidationError if the masks are not nested.
InstanceSet dow_watershed(const std::vector<Mask>& levels,
                          Connectivity connectivity = Connectivity::kEight);

// Class = argmax over classes 1..C of the mean class probability, taken
// over the instance's interior pixels (where `interior`'s foreground mass
// reaches `interior_threshold`) if such pixels exist, otherwise over all of
// its pixels from `class_probs`. Confidence = mean probability of the chosen
// class in `class_probs` over all instance pixels. Ties go to the lower
// class id.
InstanceSet assign_class_and_confidence(InstanceSet instances,
                                        const ProbabilityStack& class_probs,
                                        const ProbabilityStack* interior = nullptr,
                                        double interior_threshold = 0.5);

}  // namespace roofkit
