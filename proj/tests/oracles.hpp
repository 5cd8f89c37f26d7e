#pragma once

// Slow, obviously-correct reference implementations used by the unit tests
// and the acceptance suite.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <vector>

#include "roofkit/array.hpp"
#include "roofkit/instances.hpp"

namespace oracle {

using roofkit::LabelImage;
using roofkit::Mask;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Squared distance from every pixel to the nearest nonzero pixel of
// `sources` by scanning all pairs.
inline std::vector<double> squared_distance(const Mask& sources) {
  std::vector<std::pair<int, int>> pts;
  for (int r = 0; r < sources.height(); ++r) {
    for (int c = 0; c < sources.width(); ++c) {
      if (sources(r, c)) pts.emplace_back(r, c);
    }
  }
  std::vector<double> out(sources.size(), kInf);
  for (int r = 0; r < sources.height(); ++r) {
    for (int c = 0; c < sources.width(); ++c) {
      double best = kInf;
      for (const auto& [pr, pc] : pts) {
        const double d = double(pr - r) * (pr - r) + double(pc - c) * (pc - c);
        best = std::min(best, d);
      }
      out[sources.index(r, c)] = best;
    }
  }
  return out;
}

// Squared distances from every pixel to each instance, sorted ascending.
inline std::vector<std::vector<double>> sorted_segment_distances(const LabelImage& ids) {
  std::map<std::uint32_t, std::vector<std::pair<int, int>>> members;
  for (int r = 0; r < ids.height(); ++r) {
    for (int c = 0; c < ids.width(); ++c) {
      if (ids(r, c)) members[ids(r, c)].emplace_back(r, c);
    }
  }
  std::vector<std::vector<double>> out(ids.size());
  for (int r = 0; r < ids.height(); ++r) {
    for (int c = 0; c < ids.width(); ++c) {
      auto& list = out[ids.index(r, c)];
      for (const auto& [id, pts] : members) {
        double best = kInf;
        for (const auto& [pr, pc] : pts) {
          best = std::min(best, double(pr - r) * (pr - r) + double(pc - c) * (pc - c));
        }
        list.push_back(best);
      }
      std::sort(list.begin(), list.end());
    }
  }
  return out;
}

// Smallest squared distance between pixels of two different instances.
inline double min_interinstance_sq(const LabelImage& ids) {
  std::vector<std::tuple<int, int, std::uint32_t>> pts;
  for (int r = 0; r < ids.height(); ++r) {
    for (int c = 0; c < ids.width(); ++c) {
      if (ids(r, c)) pts.emplace_back(r, c, ids(r, c));
    }
  }
  double best = kInf;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& [ra, ca, ia] = pts[i];
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const auto& [rb, cb, ib] = pts[j];
      if (ia == ib) continue;
      best = std::min(best, double(ra - rb) * (ra - rb) + double(ca - cb) * (ca - cb));
    }
  }
  return best;
}

// Breadth-first flood fill; labels in row-major order of first encounter.
inline LabelImage flood_components(const Mask& mask, bool eight) {
  LabelImage out(mask.height(), mask.width());
  std::uint32_t next = 0;
  for (int r = 0; r < mask.height(); ++r) {
    for (int c = 0; c < mask.width(); ++c) {
      if (!mask(r, c) || out(r, c)) continue;
      ++next;
      std::deque<std::pair<int, int>> queue{{r, c}};
      out(r, c) = next;
      while (!queue.empty()) {
        auto [y, x] = queue.front();
        queue.pop_front();
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if ((dy == 0 && dx == 0) || (!eight && dy != 0 && dx != 0)) continue;
            const int ny = y + dy, nx = x + dx;
            if (!mask.contains(ny, nx) || !mask(ny, nx) || out(ny, nx)) continue;
            out(ny, nx) = next;
            queue.emplace_back(ny, nx);
          }
        }
      }
    }
  }
  return out;
}

struct Scene {
  roofkit::InstanceSet preds;
  roofkit::InstanceSet gts;
};

// Axis-aligned boxes painted in order; later boxes overwrite earlier ones.
inline LabelImage paint_boxes(int h, int w, const std::vector<std::array<int, 4>>& boxes) {
  LabelImage ids(h, w);
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const auto& [r0, c0, r1, c1] = boxes[i];
    for (int r = std::max(0, r0); r < std::min(h, r1); ++r) {
      for (int c = std::max(0, c0); c < std::min(w, c1); ++c) {
        ids(r, c) = static_cast<std::uint32_t>(i + 1);
      }
    }
  }
  return ids;
}

// Random scene with up to `max_objects` ground truths, jittered copies as
// predictions plus some false positives. Confidences are drawn from a
// coarse grid so ties occur.
inline Scene random_scene(std::mt19937_64& rng, int max_objects, int classes = 1) {
  constexpr int kSize = 64;
  std::uniform_int_distribution<int> count(1, max_objects);
  std::uniform_int_distribution<int> pos(0, kSize - 4);
  std::uniform_int_distribution<int> extent(3, 14);
  std::uniform_int_distribution<int> jitter(-3, 3);
  std::uniform_int_distribution<int> cls(1, classes);
  std::uniform_int_distribution<int> conf(1, 10);
  std::bernoulli_distribution keep(0.8), extra(0.3);

  const int n = count(rng);
  std::vector<std::array<int, 4>> gt_boxes, pred_boxes;
  std::map<std::uint32_t, int> gt_class, pred_class;
  std::map<std::uint32_t, double> pred_conf;
  for (int i = 0; i < n; ++i) {
    const int r = pos(rng), c = pos(rng);
    const std::array<int, 4> box{r, c, r + extent(rng), c + extent(rng)};
    gt_boxes.push_back(box);
    const int k = cls(rng);
    gt_class[static_cast<std::uint32_t>(i + 1)] = k;
    if (keep(rng)) {
      pred_boxes.push_back({box[0] + jitter(rng), box[1] + jitter(rng), box[2] + jitter(rng),
                            box[3] + jitter(rng)});
      const auto id = static_cast<std::uint32_t>(pred_boxes.size());
      pred_class[id] = extra(rng) ? cls(rng) : k;
      pred_conf[id] = conf(rng) / 10.0;
    }
    if (extra(rng)) {
      const int pr = pos(rng), pc = pos(rng);
      pred_boxes.push_back({pr, pc, pr + extent(rng), pc + extent(rng)});
      const auto id = static_cast<std::uint32_t>(pred_boxes.size());
      pred_class[id] = cls(rng);
      pred_conf[id] = conf(rng) / 10.0;
    }
  }
  // Painting can hide whole boxes; keep only ids still visible.
  auto build = [&](const std::vector<std::array<int, 4>>& boxes,
                   const std::map<std::uint32_t, int>& class_of,
                   const std::map<std::uint32_t, double>& conf_of) {
    const LabelImage ids = paint_boxes(kSize, kSize, boxes);
    std::set<std::uint32_t> visible(ids.values().begin(), ids.values().end());
    std::map<std::uint32_t, int> k;
    for (auto id : visible) {
      if (id) k[id] = class_of.at(id);
    }
    return roofkit::make_instance_set(ids, k, conf_of);
  };
  return {build(pred_boxes, pred_class, pred_conf), build(gt_boxes, gt_class, {})};
}

// IoU >= threshold decided on integers with the threshold in percent.
inline bool iou_at_least_pct(std::size_t inter, std::size_t uni, int pct) {
  return inter * 100 >= static_cast<std::size_t>(pct) * uni;
}

// Per ranked prediction (confidence descending, lower id first) whether it
// is a true positive at `pct` percent IoU, recomputing every overlap by
// pixel counting.
inline std::vector<bool> greedy_tp_flags(const roofkit::InstanceSet& preds,
                                         const roofkit::InstanceSet& gts, int pct,
                                         std::optional<int> class_id, bool class_aware) {
  std::vector<const roofkit::InstanceRecord*> ranked;
  for (const auto& r : preds.records) {
    if (!class_id || r.class_id == *class_id) ranked.push_back(&r);
  }
  std::sort(ranked.begin(), ranked.end(), [](auto* a, auto* b) {
    if (a->confidence != b->confidence) return a->confidence > b->confidence;
    return a->id < b->id;
  });
  std::set<std::uint32_t> taken;
  std::vector<bool> flags;
  const auto& pm = preds.instance_map;
  const auto& gm = gts.instance_map;
  for (const auto* p : ranked) {
    std::uint32_t best = 0;
    std::size_t best_i = 0, best_u = 1;
    for (const auto& g : gts.records) {
      if (taken.count(g.id)) continue;
      if (class_id && g.class_id != *class_id) continue;
      if (class_aware && g.class_id != p->class_id) continue;
      std::size_t inter = 0, uni = 0;
      for (std::size_t i = 0; i < pm.size(); ++i) {
        const bool a = pm[i] == p->id, b = gm[i] == g.id;
        inter += a && b;
        uni += a || b;
      }
      if (inter == 0 || !iou_at_least_pct(inter, uni, pct)) continue;
      if (best == 0 || inter * best_u > best_i * uni) {
        best = g.id;
        best_i = inter;
        best_u = uni;
      }
    }
    if (best) taken.insert(best);
    flags.push_back(best != 0);
  }
  return flags;
}

// All-points AP by listing every PR point and taking, at each recall step,
// the best precision reached at that recall or beyond.
inline double enumerate_ap(const std::vector<bool>& tp, std::size_t n_gt) {
  if (n_gt == 0) return std::numeric_limits<double>::quiet_NaN();
  std::vector<std::pair<double, double>> points;  // recall, precision
  std::size_t hits = 0;
  for (std::size_t i = 0; i < tp.size(); ++i) {
    hits += tp[i];
    points.emplace_back(double(hits) / n_gt, double(hits) / double(i + 1));
  }
  double ap = 0.0, prev_recall = 0.0;
  for (std::size_t k = 1; k <= n_gt; ++k) {
    const double r = double(k) / n_gt;
    double best = 0.0;
    bool reached = false;
    for (const auto& [rec, prec] : points) {
      if (rec >= r - 1e-15) {
        best = std::max(best, prec);
        reached = true;
      }
    }
    if (!reached) break;
    ap += (r - prev_recall) * best;
    prev_recall = r;
  }
  return ap;
}

inline std::size_t count_gt(const roofkit::InstanceSet& gts, std::optional<int> class_id) {
  std::size_t n = 0;
  for (const auto& g : gts.records) n += !class_id || g.class_id == *class_id;
  return n;
}

inline double scene_ap(const Scene& s, int pct, std::optional<int> class_id = std::nullopt) {
  return enumerate_ap(greedy_tp_flags(s.preds, s.gts, pct, class_id, false),
                      count_gt(s.gts, class_id));
}

inline double scene_ap_range(const Scene& s, std::optional<int> class_id = std::nullopt) {
  double sum = 0.0;
  for (int pct = 50; pct <= 95; pct += 5) sum += scene_ap(s, pct, class_id);
  return sum / 10.0;
}

// Softmax of arbitrary logits, computed in long double without shifting.
inline std::vector<double> softmax(const std::vector<double>& z) {
  long double total = 0.0L;
  std::vector<long double> e;
  for (double v : z) {
    e.push_back(std::exp(static_cast<long double>(v)));
    total += e.back();
  }
  std::vector<double> out;
  for (auto v : e) out.push_back(static_cast<double>(v / total));
  return out;
}

}  // namespace oracle
