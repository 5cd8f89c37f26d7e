#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "roofkit/array.hpp"
#include "roofkit/instances.hpp"

namespace roofkit {

// Roof material classes in label order.
enum RoofClass : int {
  kMetalSheet = 1,
  kThatch = 2,
  kAsbestos = 3,
  kConcrete = 4,
  kNoRoof = 5,
};

inline const std::vector<int> kMainClasses = {kMetalSheet, kThatch, kNoRoof};
inline const std::vector<int> kAllClasses = {kMetalSheet, kThatch, kAsbestos,
                                             kConcrete, kNoRoof};

// Marker for a metric that is undefined on the evaluated data.
inline constexpr double kAbsent = std::numeric_limits<double>::quiet_NaN();
inline bool is_absent(double v) { return std::isnan(v); }

// |pred & gt| / |pred | gt|; 1 when both masks are empty.
double pixel_iou(const Mask& pred, const Mask& gt);

struct ClassIous {
  std::map<int, double> per_class;  // kAbsent if the class is in neither raster
  double mean = kAbsent;            // over present classes of the subset
};

// Per-class IoU of two class-id rasters (0 = background) and the macro mean
// over `subset`.
ClassIous class_ious(const LabelImage& pred_classes, const LabelImage& gt_classes,
                     std::span<const int> subset);

// Class id of every pixel's instance.
LabelImage class_raster(const InstanceSet& instances);

// Threshold comparisons are done on integer pixel counts at a resolution
// of 1e-4, so thresholds such as 0.55 are matched exactly.
struct InstancePair {
  std::uint32_t prediction = 0;
  std::uint32_t ground_truth = 0;
  std::size_t intersection = 0;
  std::size_t union_size = 0;
  double iou = 0.0;
};

struct MatchResult {
  std::vector<InstancePair> pairs;
  std::vector<std::uint32_t> unmatched_predictions;
  std::vector<std::uint32_t> unmatched_ground_truths;
  double threshold = 0.5;
};

enum class MatchMode { kClassAgnostic, kClassAware };

// Greedy matching: predictions in descending confidence (ties: lower id)
// each take the unmatched ground truth with the highest IoU >= threshold
// (ties: lower id), restricted to the same class in class-aware mode.
MatchResult match_instances(const InstanceSet& preds, const InstanceSet& gts,
                            double threshold, MatchMode mode = MatchMode::kClassAgnostic);

enum class ApInterpolation {
  kAllPoints,  // area under the monotone precision envelope
  kCoco101,    // envelope sampled at recall 0, 0.01, ..., 1
};

// Average precision at one IoU threshold. With `class_id`, only
// predictions and ground truths of that class take part. Returns kAbsent
// when there is no ground truth.
double average_precision(const InstanceSet& preds, const InstanceSet& gts,
                         double threshold, std::optional<int> class_id = std::nullopt,
                         ApInterpolation interpolation = ApInterpolation::kAllPoints);

// Mean AP over thresholds 0.50, 0.55, ..., 0.95.
double ap_range(const InstanceSet& preds, const InstanceSet& gts,
                std::optional<int> class_id = std::nullopt,
                ApInterpolation interpolation = ApInterpolation::kAllPoints);

std::size_t count_tps(const InstanceSet& preds, const InstanceSet& gts,
                      MatchMode mode = MatchMode::kClassAgnostic);

// Area under the precision envelope for detections already ranked by
// confidence. `is_tp[i]` flags the i-th ranked detection.
double ap_from_ranking(const std::vector<bool>& is_tp, std::size_t ground_truths,
                       ApInterpolation interpolation = ApInterpolation::kAllPoints);

enum class EvalMode { kBinary, kMulticlass };

struct EvalOptions {
  EvalMode mode = EvalMode::kBinary;
  std::vector<int> main_classes = kMainClasses;  // mIoU^3, mAP^3
  std::vector<int> all_classes = kAllClasses;    // mIoU^5, mAP^5
  ApInterpolation interpolation = ApInterpolation::kAllPoints;
};

struct ClassMetrics {
  double iou = kAbsent;
  double ap50 = kAbsent;
  double ap50_95 = kAbsent;
};

// Absent values are kAbsent. Class-level fields are only filled in
// multiclass mode.
struct MetricsReport {
  EvalMode mode = EvalMode::kBinary;
  std::size_t image_count = 0;
  double iou = kAbsent;  // binary foreground IoU
  double miou3 = kAbsent;
  double miou5 = kAbsent;
  double ap50 = kAbsent;  // class-agnostic
  double ap50_95 = kAbsent;
  double map50_3 = kAbsent;
  double map50_5 = kAbsent;
  double map50_95_3 = kAbsent;
  double map50_95_5 = kAbsent;
  std::size_t tps = 0;  // class-agnostic in binary mode, class-aware otherwise
  std::map<int, ClassMetrics> per_class;
};

// Sufficient statistics of one image pair. Merging is associative, so
// images can be scored in any order and reduced once.
class Evaluation {
 public:
  explicit Evaluation(EvalOptions options = {});

  // `image_index` orders equal-confidence detections across images.
  void add_image(const InstanceSet& preds, const InstanceSet& gts,
                 std::size_t image_index);
  void merge(const Evaluation& other);
  MetricsReport report() const;

 private:
  struct Detection {
    double confidence;
    std::size_t image;
    std::uint32_t id;
    friend bool operator<(const Detection& a, const Detection& b) {
      if (a.confidence != b.confidence) return a.confidence > b.confidence;
      if (a.image != b.image) return a.image < b.image;
      return a.id < b.id;
    }
  };
  struct Ranking {
    std::vector<Detection> detections;
    // One TP flag per detection and per threshold 0.50..0.95.
    std::vector<std::array<bool, 10>> tp;
    std::size_t ground_truths = 0;
  };
  struct PixelCounts {
    std::size_t intersection = 0, pred = 0, gt = 0;
  };

  double ap_at(const Ranking& ranking, int threshold_index) const;
  double ap_range_of(const Ranking& ranking) const;

  EvalOptions options_;
  std::size_t images_ = 0;
  PixelCounts binary_pixels_;
  std::map<int, PixelCounts> class_pixels_;
  Ranking binary_ranking_;
  std::map<int, Ranking> class_rankings_;
  std::size_t tps_ = 0;
};

MetricsReport evaluate(std::span<const InstanceSet> preds,
                       std::span<const InstanceSet> gts, const EvalOptions& options);

enum class ReportFormat { kJson, kCsv };

// Numbers are written with 6 decimals; absent values become null (JSON) or
// an empty cell (CSV). A report over zero images is a header-only CSV.
std::string format_report(const MetricsReport& report, ReportFormat format);
void write_report(const MetricsReport& report, const std::filesystem::path& path,
                  ReportFormat format);
MetricsReport parse_report_json(const std::string& text);

}  // namespace roofkit
