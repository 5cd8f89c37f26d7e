#include "roofkit/instances.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <string>
#include <tuple>

namespace roofkit {

namespace {

constexpr std::array<std::pair<int, int>, 8> kNeighbours8 = {
    {{-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 1}, {1, -1}, {1, 0}, {1, 1}}};
constexpr std::array<std::pair<int, int>, 4> kNeighbours4 = {
    {{-1, 0}, {0, -1}, {0, 1}, {1, 0}}};

template <typename Fn>
void for_each_neighbour(int r, int c, int h, int w, Connectivity conn, Fn&& fn) {
  auto visit = [&](const auto& offsets) {
    for (const auto& [dr, dc] : offsets) {
      const int nr = r + dr, nc = c + dc;
      if (nr >= 0 && nc >= 0 && nr < h && nc < w) fn(nr, nc);
    }
  };
  if (conn == Connectivity::kEight) {
    visit(kNeighbours8);
  } else {
    visit(kNeighbours4);
  }
}

// Renumbers nonzero labels 1..N by first row-major encounter and builds
// the unclassified records.
InstanceSet canonicalize(const LabelImage& labels) {
  std::map<std::uint32_t, std::uint32_t> remap;
  InstanceSet out;
  out.instance_map = LabelImage(labels.height(), labels.width());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto v = labels[i];
    if (v == 0) continue;
    auto [it, inserted] =
        remap.try_emplace(v, static_cast<std::uint32_t>(remap.size() + 1));
    if (inserted) out.records.push_back({it->second, 0, 1.0, 0});
    out.instance_map[i] = it->second;
    ++out.records[it->second - 1].pixel_count;
  }
  return out;
}

}  // namespace

void InstanceSet::validate() const {
  std::vector<std::size_t> counts(records.size() + 1, 0);
  for (auto id : instance_map.values()) {
    if (id > records.size()) {
      throw ValidationError("instance map id " + std::to_string(id) +
                            " has no record");
    }
    ++counts[id];
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (rec.id != i + 1) throw ValidationError("instance ids are not dense");
    if (rec.pixel_count != counts[i + 1]) {
      throw ValidationError("instance " + std::to_string(rec.id) +
                            " pixel count does not match its map");
    }
    if (!(rec.confidence >= 0.0 && rec.confidence <= 1.0)) {
      throw ValidationError("instance " + std::to_string(rec.id) +
                            " confidence outside [0, 1]");
    }
  }
}

InstanceSet make_instance_set(const LabelImage& ids,
                              const std::map<std::uint32_t, int>& class_of,
                              const std::map<std::uint32_t, double>& confidence_of) {
  std::map<std::uint32_t, std::uint32_t> remap;
  for (auto v : ids.values()) {
    if (v != 0) remap.emplace(v, 0);
  }
  InstanceSet out;
  out.instance_map = LabelImage(ids.height(), ids.width());
  std::uint32_t next = 1;
  for (auto& [original, dense] : remap) {
    dense = next++;
    InstanceRecord rec;
    rec.id = dense;
    auto cls = class_of.find(original);
    if (cls == class_of.end()) {
      throw ValidationError("instance " + std::to_string(original) +
                            " has no class assignment");
    }
    rec.class_id = cls->second;
    if (auto conf = confidence_of.find(original); conf != confidence_of.end()) {
      rec.confidence = conf->second;
    }
    out.records.push_back(rec);
  }
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] == 0) continue;
    const auto dense = remap.at(ids[i]);
    out.instance_map[i] = dense;
    ++out.records[dense - 1].pixel_count;
  }
  return out;
}

InstanceSet connected_components(const Mask& mask, Connectivity connectivity) {
  const int h = mask.height(), w = mask.width();
  LabelImage labels(h, w);
  std::uint32_t next = 0;
  std::vector<std::pair<int, int>> stack;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!mask(r, c) || labels(r, c) != 0) continue;
      ++next;
      labels(r, c) = next;
      stack.assign(1, {r, c});
      while (!stack.empty()) {
        const auto [pr, pc] = stack.back();
        stack.pop_back();
        for_each_neighbour(pr, pc, h, w, connectivity, [&](int nr, int nc) {
          if (mask(nr, nc) && labels(nr, nc) == 0) {
            labels(nr, nc) = next;
            stack.emplace_back(nr, nc);
          }
        });
      }
    }
  }
  return canonicalize(labels);
}

void ProbabilityStack::validate(double tolerance) const {
  if (layers.empty()) throw ValidationError("probability stack has no layers");
  if (kind == StackKind::kClassProbs && layers.size() < 2) {
    throw ValidationError("class probability stack needs a background and >= 1 class layer");
  }
  for (const auto& layer : layers) {
    require_same_shape(layer, layers[0], "probability stack layers");
    for (float v : layer.values()) {
      if (!(v >= 0.0f && v <= 1.0f)) {
        throw ValidationError("probability outside [0, 1]");
      }
    }
  }
  if (kind != StackKind::kClassProbs) return;
  for (std::size_t i = 0; i < layers[0].size(); ++i) {
    double sum = 0.0;
    for (const auto& layer : layers) sum += layer[i];
    if (std::abs(sum - 1.0) > tolerance) {
      throw ValidationError("class probabilities do not sum to 1 at pixel " +
                            std::to_string(i));
    }
  }
}

bool is_nested(const std::vector<Mask>& levels) {
  for (std::size_t m = 1; m < levels.size(); ++m) {
    if (!levels[m].same_shape(levels[0])) return false;
    for (std::size_t i = 0; i < levels[m].size(); ++i) {
      if (levels[m][i] && !levels[m - 1][i]) return false;
    }
  }
  return true;
}

std::vector<Mask> threshold_levels(const ProbabilityStack& stack, double threshold) {
  if (stack.layers.empty()) throw ValidationError("threshold_levels: no layers");
  std::vector<Mask> out;
  out.reserve(stack.layers.size());
  for (std::size_t m = 0; m < stack.layers.size(); ++m) {
    const auto& p = stack.layers[m];
    require_same_shape(p, stack.layers[0], "level probability layers");
    Mask level(p.height(), p.width());
    for (std::size_t i = 0; i < p.size(); ++i) {
      const bool on = p[i] >= threshold;
      level[i] = on && (m == 0 || out[m - 1][i]);
    }
    out.push_back(std::move(level));
  }
  return out;
}

Array2D<std::uint8_t> elevation_map(const std::vector<Mask>& levels) {
  if (levels.empty()) return {};
  if (levels.size() > 255) throw ValidationError("at most 255 levels supported");
  Array2D<std::uint8_t> h(levels[0].height(), levels[0].width());
  for (const auto& level : levels) {
    require_same_shape(level, levels[0], "level masks");
    for (std::size_t i = 0; i < h.size(); ++i) h[i] += level[i] != 0;
  }
  return h;
}

InstanceSet dow_watershed(const std::vector<Mask>& levels, Connectivity connectivity) {
  if (levels.empty()) throw ValidationError("dow_watershed: no level masks");
  const auto height = elevation_map(levels);
  if (!is_nested(levels)) {
    throw ValidationError("dow_watershed: level masks are not nested");
  }
  const int h = levels[0].height(), w = levels[0].width();
  const int level_count = static_cast<int>(levels.size());

  const InstanceSet regions = connected_components(levels[0], connectivity);
  std::vector<std::uint8_t> deepest(regions.size() + 1, 0);
  for (std::size_t i = 0; i < height.size(); ++i) {
    const auto region = regions.instance_map[i];
    if (region != 0) deepest[region] = std::max(deepest[region], height[i]);
  }

  // Marker pixels: the deepest level reached inside each region, for regions
  // that reach level 2 or beyond.
  Mask marker_mask(h, w);
  for (std::size_t i = 0; i < height.size(); ++i) {
    const auto region = regions.instance_map[i];
    marker_mask[i] = region != 0 && deepest[region] >= 2 && height[i] == deepest[region];
  }
  const InstanceSet markers = connected_components(marker_mask, connectivity);

  LabelImage basins(h, w);
  auto next = static_cast<std::uint32_t>(markers.size());
  std::vector<std::uint32_t> fallback_label(regions.size() + 1, 0);
  for (std::size_t i = 0; i < basins.size(); ++i) {
    const auto region = regions.instance_map[i];
    if (region == 0) continue;
    if (deepest[region] < 2) {
      if (fallback_label[region] == 0) fallback_label[region] = ++next;
      basins[i] = fallback_label[region];
    } else {
      basins[i] = markers.instance_map[i];
    }
  }

  // Priority flood keyed by (elevation, push order). Elevation is
  // level_count - h, so deeper pixels flood first.
  using Entry = std::tuple<int, std::uint64_t, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  std::uint64_t order = 0;
  for (std::size_t i = 0; i < basins.size(); ++i) {
    if (marker_mask[i]) queue.emplace(level_count - height[i], order++, i);
  }
  while (!queue.empty()) {
    const auto [elevation, age, i] = queue.top();
    queue.pop();
    const int r = static_cast<int>(i / w), c = static_cast<int>(i % w);
    for_each_neighbour(r, c, h, w, connectivity, [&](int nr, int nc) {
      const auto j = basins.index(nr, nc);
      if (levels[0][j] && basins[j] == 0) {
        basins[j] = basins[i];
        queue.emplace(level_count - height[j], order++, j);
      }
    });
  }
  return canonicalize(basins);
}

InstanceSet assign_class_and_confidence(InstanceSet instances,
                                        const ProbabilityStack& class_probs,
                                        const ProbabilityStack* interior,
                                        double interior_threshold) {
  const auto& map = instances.instance_map;
  if (class_probs.layers.size() < 2) {
    throw ValidationError("class probabilities need background + >= 1 class layer");
  }
  for (const auto& layer : class_probs.layers) {
    require_same_shape(layer, map, "class probabilities vs instance map");
  }
  if (interior) {
    if (interior->layers.size() != class_probs.layers.size()) {
      throw ValidationError("interior and class stacks have different class counts");
    }
    for (const auto& layer : interior->layers) {
      require_same_shape(layer, map, "interior probabilities vs instance map");
    }
  }

  const std::size_t n = instances.size();
  const std::size_t classes = class_probs.layers.size();  // including background
  std::vector<double> full_sum(n * classes, 0.0), interior_sum(n * classes, 0.0);
  std::vector<std::size_t> interior_count(n, 0);
  for (const auto& rec : instances.records) {
    if (rec.pixel_count == 0) {
      throw ValidationError("instance " + std::to_string(rec.id) + " is empty");
    }
  }

  for (std::size_t i = 0; i < map.size(); ++i) {
    const auto id = map[i];
    if (id == 0) continue;
    const std::size_t base = (id - 1) * classes;
    for (std::size_t k = 1; k < classes; ++k) {
      full_sum[base + k] += class_probs.layers[k][i];
    }
    if (!interior) continue;
    double foreground = 0.0;
    for (std::size_t k = 1; k < classes; ++k) foreground += interior->layers[k][i];
    if (foreground >= interior_threshold) {
      ++interior_count[id - 1];
      for (std::size_t k = 1; k < classes; ++k) {
        interior_sum[base + k] += interior->layers[k][i];
      }
    }
  }

  for (std::size_t idx = 0; idx < n; ++idx) {
    auto& rec = instances.records[idx];
    const std::size_t base = idx * classes;
    const bool use_interior = interior && interior_count[idx] > 0;
    const auto& sums = use_interior ? interior_sum : full_sum;
    // Equal pixel counts within one vote, so comparing sums compares means.
    std::size_t best = 1;
    for (std::size_t k = 2; k < classes; ++k) {
      if (sums[base + k] > sums[base + best]) best = k;
    }
    rec.class_id = static_cast<int>(best);
    rec.confidence = std::clamp(
        full_sum[base + best] / static_cast<double>(rec.pixel_count), 0.0, 1.0);
  }
  return instances;
}

}  // namespace roofkit
