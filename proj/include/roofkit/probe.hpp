#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "roofkit/array.hpp"

namespace roofkit {

// Row-major height x width x channels grid of feature vectors.
struct FeatureMap {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<float> values;

  FeatureMap() = default;
  FeatureMap(int h, int w, int c) : height(h), width(w), channels(c), values(std::size_t(h) * w * c) {}

  float& at(int r, int c, int k) { return values[(std::size_t(r) * width + c) * channels + k]; }
  float at(int r, int c, int k) const { return values[(std::size_t(r) * width + c) * channels + k]; }
  void validate() const;
};

// Bilinear resize with half-pixel centres (align_corners = false), source
// coordinates clamped at 0 the way torch does when upsampling.
FeatureMap bilinear_upsample(const FeatureMap& f, int out_h, int out_w);

// Per-channel mean over mask-true pixels. Mask and feature grid must have
// the same shape; an empty mask is a ValidationError.
Eigen::VectorXd masked_pool(const FeatureMap& f, const Mask& mask);

enum class PoolMode {
  kUpsample,      // features upsampled to the mask grid, then masked
  kNoMask,        // plain global average
  kDownsampleMask // mask shrunk to the feature grid (nearest neighbour)
};

PoolMode parse_pool_mode(const std::string& name);
const char* pool_mode_name(PoolMode mode);

// Nearest-neighbour resize of a mask to the given grid. Cells sample the
// source pixel floor(i * in / out); if that leaves the mask empty, every
// cell overlapped by a mask pixel is set instead.
Mask downsample_mask(const Mask& mask, int out_h, int out_w);

Eigen::VectorXd pool_features(const FeatureMap& f, const Mask& mask, PoolMode mode);

struct ProbeModel {
  std::vector<int> class_order;
  double lambda = 0.0;
  Eigen::MatrixXd weights;  // channels x classes
  Eigen::VectorXd bias;     // per class

  nlohmann::json to_json() const;
  static ProbeModel from_json(const nlohmann::json& j);
};

// Mean softmax cross-entropy plus (lambda / 2) * ||W||^2, bias unpenalized.
// Parameters are packed as [W column-major (d x K), b (K)].
class LogRegObjective {
 public:
  LogRegObjective(const Eigen::MatrixXd& X, std::vector<int> targets, int classes,
                  double lambda);

  double operator()(const Eigen::VectorXd& theta, Eigen::VectorXd* gradient) const;
  Eigen::Index parameter_count() const { return X_.cols() * classes_ + classes_; }

 private:
  const Eigen::MatrixXd& X_;
  std::vector<int> targets_;
  int classes_;
  double lambda_;
};

struct FitOptions {
  double lambda = 1e-4;
  double tolerance = 1e-6;
  int max_iterations = 10000;
  int history = 10;
};

struct FitTrace {
  std::vector<double> objective;  // one entry per accepted iterate
  double gradient_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Rows of X are samples. Trained with L-BFGS and Armijo backtracking from
// zero parameters; stops at gradient norm <= tolerance, at max_iterations,
// or when no step lowers the objective.
ProbeModel fit_logreg(const Eigen::MatrixXd& X, const std::vector<int>& y,
                      const FitOptions& options = {}, FitTrace* trace = nullptr);

Eigen::VectorXd predict_proba(const ProbeModel& model, const Eigen::VectorXd& x);
int predict_class(const ProbeModel& model, const Eigen::VectorXd& x);

// Majority vote of the k nearest rows (Euclidean; distance ties go to the
// lower row). Vote ties go to the class of the nearest tied neighbour.
int knn_predict(const Eigen::MatrixXd& X, const std::vector<int>& y, const Eigen::VectorXd& x,
                int k);

// Macro F1 over the union of classes seen in truth and prediction.
double macro_f1(const std::vector<int>& truth, const std::vector<int>& predicted);

// Fold index per sample. Each class is shuffled (seeded) and dealt
// round-robin, continuing the deal where the previous class stopped.
std::vector<int> stratified_folds(const std::vector<int>& y, int folds, std::uint64_t seed);

struct ProbeConfig {
  enum class Kind { kLogReg, kKnn } kind = Kind::kLogReg;
  double lambda = 0.0;
  int k = 1;

  std::string label() const;
};

struct ConfigScore {
  ProbeConfig config;
  std::vector<double> fold_f1;  // NaN for folds without test samples
  double mean_f1 = 0.0;
};

struct CvOptions {
  int folds = 10;
  std::uint64_t seed = 0;
  std::vector<double> lambdas = {1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0};
  std::vector<int> ks = {1, 3, 5, 7, 11};
  FitOptions fit;
  int workers = 1;
};

struct CvResult {
  std::vector<ConfigScore> scores;
  std::vector<int> fold_of;
  std::size_t best = 0;

  const ConfigScore& best_score() const { return scores[best]; }
  nlohmann::json to_json() const;
};

// Scores every logistic-regression and kNN configuration by mean macro F1
// over stratified folds. The best is the highest mean; ties prefer logistic
// regression, then the smaller lambda or k.
CvResult cross_validate(const Eigen::MatrixXd& X, const std::vector<int>& y,
                        const CvOptions& options = {});

}  // namespace roofkit
