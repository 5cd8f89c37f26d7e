#include "roofkit/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <unordered_map>

namespace roofkit {

namespace {

constexpr int kRangeSteps = 10;

std::int64_t to_basis_points(double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw ValidationError("IoU threshold must lie in [0, 1]");
  }
  return std::llround(threshold * 10000.0);
}

// Threshold of step k in 0.50, 0.55, ..., 0.95.
std::int64_t range_basis_points(int k) { return 5000 + 500 * k; }

bool iou_at_least(std::size_t inter, std::size_t uni, std::int64_t bp) {
  return static_cast<std::int64_t>(inter) * 10000 >= bp * static_cast<std::int64_t>(uni);
}

// inter_a / uni_a > inter_b / uni_b
bool iou_greater(std::size_t ia, std::size_t ua, std::size_t ib, std::size_t ub) {
  return static_cast<unsigned __int128>(ia) * ub > static_cast<unsigned __int128>(ib) * ua;
}

struct Overlaps {
  std::vector<std::size_t> pred_area;  // indexed by id, slot 0 unused
  std::vector<std::size_t> gt_area;
  // For every prediction: (ground truth id, intersection) sorted by id.
  std::vector<std::vector<std::pair<std::uint32_t, std::size_t>>> by_pred;
};

Overlaps compute_overlaps(const InstanceSet& preds, const InstanceSet& gts) {
  require_same_shape(preds.instance_map, gts.instance_map,
                     "prediction vs ground-truth raster");
  Overlaps o;
  o.pred_area.assign(preds.size() + 1, 0);
  o.gt_area.assign(gts.size() + 1, 0);
  o.by_pred.resize(preds.size() + 1);
  std::unordered_map<std::uint64_t, std::size_t> inter;
  const auto& pm = preds.instance_map;
  const auto& gm = gts.instance_map;
  for (std::size_t i = 0; i < pm.size(); ++i) {
    const auto p = pm[i], g = gm[i];
    if (p > preds.size() || g > gts.size()) {
      throw ValidationError("instance map id without a record");
    }
    ++o.pred_area[p];
    ++o.gt_area[g];
    if (p != 0 && g != 0) ++inter[(std::uint64_t{p} << 32) | g];
  }
  for (const auto& [key, count] : inter) {
    o.by_pred[key >> 32].emplace_back(static_cast<std::uint32_t>(key & 0xFFFFFFFFu), count);
  }
  for (auto& list : o.by_pred) std::sort(list.begin(), list.end());
  return o;
}

std::vector<std::uint32_t> ranked_predictions(const InstanceSet& preds,
                                              std::optional<int> class_id) {
  std::vector<std::uint32_t> order;
  for (const auto& rec : preds.records) {
    if (!class_id || rec.class_id == *class_id) order.push_back(rec.id);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    return preds.record(a).confidence > preds.record(b).confidence;
  });
  return order;
}

// Greedy matching of `order` (already ranked). Returns the matched ground
// truth id per ranked prediction (0 = unmatched).
std::vector<std::uint32_t> greedy_match(const Overlaps& o, const InstanceSet& preds,
                                        const InstanceSet& gts,
                                        const std::vector<std::uint32_t>& order,
                                        std::int64_t bp, bool class_aware,
                                        std::optional<int> class_id) {
  std::vector<bool> taken(gts.size() + 1, false);
  std::vector<std::uint32_t> matched(order.size(), 0);
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto p = order[k];
    const int p_class = preds.record(p).class_id;
    std::uint32_t best = 0;
    std::size_t best_inter = 0, best_union = 1;
    for (const auto& [g, inter] : o.by_pred[p]) {
      if (taken[g]) continue;
      const int g_class = gts.record(g).class_id;
      if (class_id && g_class != *class_id) continue;
      if (class_aware && g_class != p_class) continue;
      const std::size_t uni = o.pred_area[p] + o.gt_area[g] - inter;
      if (!iou_at_least(inter, uni, bp)) continue;
      if (best == 0 || iou_greater(inter, uni, best_inter, best_union)) {
        best = g;
        best_inter = inter;
        best_union = uni;
      }
    }
    if (best != 0) {
      taken[best] = true;
      matched[k] = best;
    }
  }
  return matched;
}

std::size_t count_ground_truths(const InstanceSet& gts, std::optional<int> class_id) {
  return static_cast<std::size_t>(std::count_if(
      gts.records.begin(), gts.records.end(),
      [&](const InstanceRecord& r) { return !class_id || r.class_id == *class_id; }));
}

double mean_present(const std::vector<double>& values) {
  double sum = 0.0;
  std::size_t n = 0;
  for (double v : values) {
    if (is_absent(v)) continue;
    sum += v;
    ++n;
  }
  return n == 0 ? kAbsent : sum / static_cast<double>(n);
}

}  // namespace

double pixel_iou(const Mask& pred, const Mask& gt) {
  require_same_shape(pred, gt, "pixel_iou");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool a = pred[i] != 0, b = gt[i] != 0;
    inter += a && b;
    uni += a || b;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

ClassIous class_ious(const LabelImage& pred_classes, const LabelImage& gt_classes,
                     std::span<const int> subset) {
  require_same_shape(pred_classes, gt_classes, "class_ious");
  std::map<int, std::array<std::size_t, 3>> counts;  // inter, pred, gt
  for (std::size_t i = 0; i < pred_classes.size(); ++i) {
    const int p = static_cast<int>(pred_classes[i]);
    const int g = static_cast<int>(gt_classes[i]);
    if (p != 0) ++counts[p][1];
    if (g != 0) ++counts[g][2];
    if (p != 0 && p == g) ++counts[p][0];
  }
  ClassIous out;
  for (int c : subset) counts.try_emplace(c);
  for (const auto& [c, n] : counts) {
    const std::size_t uni = n[1] + n[2] - n[0];
    out.per_class[c] = uni == 0 ? kAbsent
                                : static_cast<double>(n[0]) / static_cast<double>(uni);
  }
  std::vector<double> chosen;
  for (int c : subset) chosen.push_back(out.per_class[c]);
  out.mean = mean_present(chosen);
  return out;
}

LabelImage class_raster(const InstanceSet& instances) {
  const auto& map = instances.instance_map;
  LabelImage out(map.height(), map.width());
  for (std::size_t i = 0; i < map.size(); ++i) {
    if (map[i] != 0) out[i] = static_cast<std::uint32_t>(instances.record(map[i]).class_id);
  }
  return out;
}

MatchResult match_instances(const InstanceSet& preds, const InstanceSet& gts,
                            double threshold, MatchMode mode) {
  const auto bp = to_basis_points(threshold);
  const Overlaps o = compute_overlaps(preds, gts);
  const auto order = ranked_predictions(preds, std::nullopt);
  const auto matched = greedy_match(o, preds, gts, order, bp,
                                    mode == MatchMode::kClassAware, std::nullopt);
  MatchResult result;
  result.threshold = threshold;
  std::vector<bool> gt_used(gts.size() + 1, false);
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto p = order[k];
    const auto g = matched[k];
    if (g == 0) {
      result.unmatched_predictions.push_back(p);
      continue;
    }
    gt_used[g] = true;
    InstancePair pair;
    pair.prediction = p;
    pair.ground_truth = g;
    for (const auto& [gid, inter] : o.by_pred[p]) {
      if (gid == g) pair.intersection = inter;
    }
    pair.union_size = o.pred_area[p] + o.gt_area[g] - pair.intersection;
    pair.iou = static_cast<double>(pair.intersection) / static_cast<double>(pair.union_size);
    result.pairs.push_back(pair);
  }
  for (std::uint32_t g = 1; g <= gts.size(); ++g) {
    if (!gt_used[g]) result.unmatched_ground_truths.push_back(g);
  }
  return result;
}

double ap_from_ranking(const std::vector<bool>& is_tp, std::size_t ground_truths,
                       ApInterpolation interpolation) {
  if (ground_truths == 0) return kAbsent;
  const std::size_t n = is_tp.size();
  std::vector<double> precision(n);
  std::vector<std::size_t> tp_cum(n);
  std::size_t tp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    tp += is_tp[i];
    tp_cum[i] = tp;
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
  }
  for (std::size_t i = n; i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }

  if (interpolation == ApInterpolation::kAllPoints) {
    double ap = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (is_tp[i]) ap += precision[i];
    }
    return ap / static_cast<double>(ground_truths);
  }

  double sum = 0.0;
  std::size_t i = 0;
  for (std::size_t k = 0; k <= 100; ++k) {
    // First rank whose recall reaches k / 100.
    while (i < n && tp_cum[i] * 100 < k * ground_truths) ++i;
    if (i == n) break;
    sum += precision[i];
  }
  return sum / 101.0;
}

double average_precision(const InstanceSet& preds, const InstanceSet& gts,
                         double threshold, std::optional<int> class_id,
                         ApInterpolation interpolation) {
  const auto bp = to_basis_points(threshold);
  const Overlaps o = compute_overlaps(preds, gts);
  const auto order = ranked_predictions(preds, class_id);
  const auto matched = greedy_match(o, preds, gts, order, bp, false, class_id);
  std::vector<bool> is_tp(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) is_tp[k] = matched[k] != 0;
  return ap_from_ranking(is_tp, count_ground_truths(gts, class_id), interpolation);
}

double ap_range(const InstanceSet& preds, const InstanceSet& gts,
                std::optional<int> class_id, ApInterpolation interpolation) {
  if (count_ground_truths(gts, class_id) == 0) return kAbsent;
  double sum = 0.0;
  for (int k = 0; k < kRangeSteps; ++k) {
    sum += average_precision(preds, gts, static_cast<double>(range_basis_points(k)) / 10000.0,
                             class_id, interpolation);
  }
  return sum / kRangeSteps;
}

std::size_t count_tps(const InstanceSet& preds, const InstanceSet& gts, MatchMode mode) {
  return match_instances(preds, gts, 0.5, mode).pairs.size();
}

Evaluation::Evaluation(EvalOptions options) : options_(std::move(options)) {}

void Evaluation::add_image(const InstanceSet& preds, const InstanceSet& gts,
                           std::size_t image_index) {
  const Overlaps o = compute_overlaps(preds, gts);
  ++images_;

  for (std::size_t i = 0; i < preds.instance_map.size(); ++i) {
    const bool p = preds.instance_map[i] != 0, g = gts.instance_map[i] != 0;
    binary_pixels_.pred += p;
    binary_pixels_.gt += g;
    binary_pixels_.intersection += p && g;
  }

  auto rank_into = [&](Ranking& ranking, std::optional<int> class_id) {
    const auto order = ranked_predictions(preds, class_id);
    const std::size_t offset = ranking.detections.size();
    for (auto id : order) {
      ranking.detections.push_back({preds.record(id).confidence, image_index, id});
    }
    ranking.tp.resize(ranking.detections.size(), {});
    for (int k = 0; k < kRangeSteps; ++k) {
      const auto matched =
          greedy_match(o, preds, gts, order, range_basis_points(k), false, class_id);
      for (std::size_t j = 0; j < order.size(); ++j) {
        ranking.tp[offset + j][k] = matched[j] != 0;
      }
    }
    ranking.ground_truths += count_ground_truths(gts, class_id);
  };

  rank_into(binary_ranking_, std::nullopt);
  if (options_.mode == EvalMode::kBinary) {
    const auto& tp = binary_ranking_.tp;
    for (std::size_t j = binary_ranking_.tp.size() - preds.size(); j < tp.size(); ++j) {
      tps_ += tp[j][0];
    }
    return;
  }

  const auto pc = class_raster(preds), gc = class_raster(gts);
  std::set<int> classes(options_.all_classes.begin(), options_.all_classes.end());
  classes.insert(options_.main_classes.begin(), options_.main_classes.end());
  for (const auto& r : preds.records) classes.insert(r.class_id);
  for (const auto& r : gts.records) classes.insert(r.class_id);
  for (std::size_t i = 0; i < pc.size(); ++i) {
    const int p = static_cast<int>(pc[i]), g = static_cast<int>(gc[i]);
    if (p != 0) ++class_pixels_[p].pred;
    if (g != 0) ++class_pixels_[g].gt;
    if (p != 0 && p == g) ++class_pixels_[p].intersection;
  }
  for (int c : classes) {
    Ranking& ranking = class_rankings_[c];
    const std::size_t before = ranking.tp.size();
    rank_into(ranking, c);
    for (std::size_t j = before; j < ranking.tp.size(); ++j) tps_ += ranking.tp[j][0];
  }
}

void Evaluation::merge(const Evaluation& other) {
  images_ += other.images_;
  binary_pixels_.intersection += other.binary_pixels_.intersection;
  binary_pixels_.pred += other.binary_pixels_.pred;
  binary_pixels_.gt += other.binary_pixels_.gt;
  for (const auto& [c, n] : other.class_pixels_) {
    auto& mine = class_pixels_[c];
    mine.intersection += n.intersection;
    mine.pred += n.pred;
    mine.gt += n.gt;
  }
  auto merge_ranking = [](Ranking& into, const Ranking& from) {
    into.detections.insert(into.detections.end(), from.detections.begin(),
                           from.detections.end());
    into.tp.insert(into.tp.end(), from.tp.begin(), from.tp.end());
    into.ground_truths += from.ground_truths;
  };
  merge_ranking(binary_ranking_, other.binary_ranking_);
  for (const auto& [c, r] : other.class_rankings_) merge_ranking(class_rankings_[c], r);
  tps_ += other.tps_;
}

double Evaluation::ap_at(const Ranking& ranking, int threshold_index) const {
  std::vector<std::size_t> order(ranking.detections.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ranking.detections[a] < ranking.detections[b];
  });
  std::vector<bool> is_tp(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    is_tp[k] = ranking.tp[order[k]][threshold_index];
  }
  return ap_from_ranking(is_tp, ranking.ground_truths, options_.interpolation);
}

double Evaluation::ap_range_of(const Ranking& ranking) const {
  if (ranking.ground_truths == 0) return kAbsent;
  double sum = 0.0;
  for (int k = 0; k < kRangeSteps; ++k) sum += ap_at(ranking, k);
  return sum / kRangeSteps;
}

MetricsReport Evaluation::report() const {
  MetricsReport r;
  r.mode = options_.mode;
  r.image_count = images_;
  if (images_ == 0) return r;

  const auto& bp = binary_pixels_;
  const std::size_t uni = bp.pred + bp.gt - bp.intersection;
  r.iou = uni == 0 ? 1.0 : static_cast<double>(bp.intersection) / static_cast<double>(uni);
  r.ap50 = ap_at(binary_ranking_, 0);
  r.ap50_95 = ap_range_of(binary_ranking_);
  r.tps = tps_;
  if (options_.mode == EvalMode::kBinary) return r;

  for (const auto& [c, ranking] : class_rankings_) {
    ClassMetrics m;
    const auto it = class_pixels_.find(c);
    if (it != class_pixels_.end()) {
      const auto& n = it->second;
      const std::size_t cu = n.pred + n.gt - n.intersection;
      if (cu > 0) m.iou = static_cast<double>(n.intersection) / static_cast<double>(cu);
    }
    m.ap50 = ap_at(ranking, 0);
    m.ap50_95 = ap_range_of(ranking);
    r.per_class[c] = m;
  }
  auto mean_over = [&](const std::vector<int>& subset, double ClassMetrics::*field) {
    std::vector<double> values;
    for (int c : subset) {
      const auto it = r.per_class.find(c);
      values.push_back(it == r.per_class.end() ? kAbsent : it->second.*field);
    }
    return mean_present(values);
  };
  r.miou3 = mean_over(options_.main_classes, &ClassMetrics::iou);
  r.miou5 = mean_over(options_.all_classes, &ClassMetrics::iou);
  r.map50_3 = mean_over(options_.main_classes, &ClassMetrics::ap50);
  r.map50_5 = mean_over(options_.all_classes, &ClassMetrics::ap50);
  r.map50_95_3 = mean_over(options_.main_classes, &ClassMetrics::ap50_95);
  r.map50_95_5 = mean_over(options_.all_classes, &ClassMetrics::ap50_95);
  return r;
}

MetricsReport evaluate(std::span<const InstanceSet> preds, std::span<const InstanceSet> gts,
                       const EvalOptions& options) {
  if (preds.size() != gts.size()) {
    throw ValidationError("evaluate: prediction and ground-truth counts differ");
  }
  Evaluation eval(options);
  for (std::size_t i = 0; i < preds.size(); ++i) eval.add_image(preds[i], gts[i], i);
  return eval.report();
}

}  // namespace roofkit
