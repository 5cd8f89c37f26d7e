#include "roofkit/labels.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace roofkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// `box` grown by `margin` pixels on every side and clipped to the raster.
PixelBox grow(const PixelBox& box, int margin, int height, int width) {
  PixelBox out;
  out.row0 = std::max(0, box.row0 - margin);
  out.col0 = std::max(0, box.col0 - margin);
  out.row1 = std::min(height - 1, box.row1 + margin);
  out.col1 = std::min(width - 1, box.col1 + margin);
  return out;
}

int margin_for(double max_distance, int height, int width) {
  if (!std::isfinite(max_distance)) return std::max(height, width);
  return static_cast<int>(
      std::min<double>(std::ceil(max_distance), std::max(height, width)));
}

// Squared distances, over `window`, to the window pixels for which
// `is_source(id)` holds.
template <typename Pred>
std::vector<double> window_distances(const LabelImage& ids, const PixelBox& window,
                                     Pred is_source) {
  const int wh = window.row1 - window.row0 + 1;
  const int ww = window.col1 - window.col0 + 1;
  Mask sources(wh, ww);
  for (int r = 0; r < wh; ++r) {
    for (int c = 0; c < ww; ++c) {
      sources(r, c) = is_source(ids(window.row0 + r, window.col0 + c));
    }
  }
  return squared_distance_to(sources);
}

}  // namespace

void LabelRaster::validate() const {
  for (auto id : ids.values()) {
    if (id != 0 && !class_of.contains(id)) {
      throw ValidationError("instance " + std::to_string(id) +
                            " has no class assignment");
    }
  }
}

std::map<std::uint32_t, PixelBox> instance_boxes(const LabelImage& ids) {
  std::map<std::uint32_t, PixelBox> boxes;
  for (int r = 0; r < ids.height(); ++r) {
    for (int c = 0; c < ids.width(); ++c) {
      const auto id = ids(r, c);
      if (id == 0) continue;
      auto [it, inserted] = boxes.try_emplace(id, PixelBox{r, c, r, c});
      if (!inserted) {
        auto& b = it->second;
        b.row0 = std::min(b.row0, r);
        b.col0 = std::min(b.col0, c);
        b.row1 = std::max(b.row1, r);
        b.col1 = std::max(b.col1, c);
      }
    }
  }
  return boxes;
}

SegmentDistances two_nearest_segment_distances(const LabelImage& ids,
                                               double max_distance) {
  const int h = ids.height(), w = ids.width();
  std::vector<double> best(ids.size(), kInf), runner_up(ids.size(), kInf);
  const int margin = margin_for(max_distance, h, w);
  const double limit_sq = max_distance * max_distance;

  for (const auto& [id, box] : instance_boxes(ids)) {
    const PixelBox win = grow(box, margin, h, w);
    const auto sq = window_distances(
        ids, win, [id = id](std::uint32_t v) { return v == id; });
    const int ww = win.col1 - win.col0 + 1;
    for (int r = win.row0; r <= win.row1; ++r) {
      for (int c = win.col0; c <= win.col1; ++c) {
        const double d = sq[static_cast<std::size_t>(r - win.row0) * ww + (c - win.col0)];
        if (d > limit_sq) continue;
        const auto i = ids.index(r, c);
        if (d < best[i]) {
          runner_up[i] = best[i];
          best[i] = d;
        } else if (d < runner_up[i]) {
          runner_up[i] = d;
        }
      }
    }
  }

  SegmentDistances out{DistanceField(h, w), DistanceField(h, w)};
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out.nearest[i] = static_cast<float>(std::sqrt(best[i]));
    out.second[i] = static_cast<float>(std::sqrt(runner_up[i]));
  }
  return out;
}

GapResult enforce_gap(const LabelRaster& labels, int min_gap) {
  if (min_gap < 0) throw ValidationError("enforce_gap: n_gap must be >= 0");
  const LabelImage& ids = labels.ids;
  const int h = ids.height(), w = ids.width();
  const auto boxes = instance_boxes(ids);
  std::vector<std::uint8_t> remove(ids.size(), 0);
  const double gap_sq = static_cast<double>(min_gap) * min_gap;

  if (min_gap > 0) {
    for (const auto& [id, box] : boxes) {
      const PixelBox win = grow(box, min_gap, h, w);
      const auto sq = window_distances(
          ids, win, [id = id](std::uint32_t v) { return v == id; });
      const int ww = win.col1 - win.col0 + 1;
      for (int r = win.row0; r <= win.row1; ++r) {
        for (int c = win.col0; c <= win.col1; ++c) {
          const auto other = ids(r, c);
          if (other == 0 || other == id) continue;
          if (sq[static_cast<std::size_t>(r - win.row0) * ww + (c - win.col0)] < gap_sq) {
            remove[ids.index(r, c)] = 1;
          }
        }
      }
    }
  }

  GapResult result{labels, {}};
  LabelImage& out = result.labels.ids;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (remove[i]) {
      out[i] = 0;
      ++result.edit.relabeled_pixels;
    }
  }
  std::set<std::uint32_t> survivors(out.values().begin(), out.values().end());
  for (const auto& [id, box] : boxes) {
    if (!survivors.contains(id)) {
      result.edit.removed_instances.push_back(id);
      result.labels.class_of.erase(id);
    }
  }
  return result;
}

double boundary_weight(double distance_sum, double w0, double sigma) {
  return w0 * std::exp(-(distance_sum * distance_sum) / (2.0 * sigma * sigma));
}

double negligible_weight_distance(double w0, double sigma) {
  // Half the smallest float32 subnormal rounds to zero.
  constexpr double kVanishing = 1e-46;
  if (w0 <= kVanishing) return 0.0;
  return sigma * std::sqrt(2.0 * std::log(w0 / kVanishing));
}

FloatImage weight_map(const LabelImage& ids, const WeightParams& params) {
  if (!(params.sigma > 0.0)) {
    throw ValidationError("weight_map: sigma must be positive");
  }
  if (params.w0 < 0.0) throw ValidationError("weight_map: w0 must be >= 0");
  // Beyond the cutoff the float32 weight is exactly 0, so limiting the
  // segment search there does not change any output bit.
  const double cutoff = negligible_weight_distance(params.w0, params.sigma);
  const auto d = two_nearest_segment_distances(ids, cutoff);

  FloatImage out(ids.height(), ids.width(), 1.0f);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] != 0) continue;
    const double sum = static_cast<double>(d.nearest[i]) + d.second[i];
    const double wx = std::isfinite(sum) ? boundary_weight(sum, params.w0, params.sigma)
                                         : 0.0;
    out[i] = static_cast<float>(params.mode == WeightMode::kAdditive ? 1.0 + wx : wx);
  }
  return out;
}

Array2D<std::uint8_t> OrdinalTargets::heights() const {
  if (levels.empty()) return {};
  Array2D<std::uint8_t> h(levels[0].height(), levels[0].width());
  for (const auto& level : levels) {
    for (std::size_t i = 0; i < h.size(); ++i) h[i] += level[i] != 0;
  }
  return h;
}

OrdinalTargets ordinal_targets(const LabelImage& ids, int level_count,
                               int level_margin) {
  if (level_count < 1) throw ValidationError("ordinal_targets: n_lev must be >= 1");
  if (level_margin < 1) throw ValidationError("ordinal_targets: n_pix must be >= 1");
  if (level_count > 255) throw ValidationError("ordinal_targets: n_lev must be <= 255");
  const int h = ids.height(), w = ids.width();
  OrdinalTargets t;
  t.level_margin = level_margin;
  t.levels.assign(level_count, Mask(h, w));
  for (std::size_t i = 0; i < ids.size(); ++i) t.levels[0][i] = ids[i] != 0;
  if (level_count == 1) return t;

  for (const auto& [id, box] : instance_boxes(ids)) {
    // One extra pixel of context always contains the nearest non-member.
    const PixelBox win = grow(box, 1, h, w);
    const auto sq = window_distances(
        ids, win, [id = id](std::uint32_t v) { return v != id; });
    const int ww = win.col1 - win.col0 + 1;
    for (int r = box.row0; r <= box.row1; ++r) {
      for (int c = box.col0; c <= box.col1; ++c) {
        if (ids(r, c) != id) continue;
        const double d = sq[static_cast<std::size_t>(r - win.row0) * ww + (c - win.col0)];
        for (int m = 2; m <= level_count; ++m) {
          const double threshold = static_cast<double>(m - 1) * level_margin;
          if (d > threshold * threshold) {
            t.levels[m - 1](r, c) = 1;
          } else {
            break;
          }
        }
      }
    }
  }
  return t;
}

}  // namespace roofkit
