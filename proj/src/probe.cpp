#include "roofkit/probe.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <deque>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "roofkit/error.hpp"

namespace roofkit {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct SourceTap {
  int i0, i1;
  double frac;
};

std::vector<SourceTap> bilinear_taps(int in, int out) {
  std::vector<SourceTap> taps(out);
  const double scale = static_cast<double>(in) / out;
  for (int o = 0; o < out; ++o) {
    double src = (o + 0.5) * scale - 0.5;
    if (src < 0.0) src = 0.0;
    const int i0 = std::min(static_cast<int>(src), in - 1);
    const int i1 = std::min(i0 + 1, in - 1);
    taps[o] = {i0, i1, src - i0};
  }
  return taps;
}

std::vector<int> class_indices(const std::vector<int>& y, const std::vector<int>& order) {
  std::map<int, int> index;
  for (std::size_t i = 0; i < order.size(); ++i) index[order[i]] = static_cast<int>(i);
  std::vector<int> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = index.at(y[i]);
  return out;
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& X, const std::vector<int>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
  return out;
}

}  // namespace

void FeatureMap::validate() const {
  if (height < 1 || width < 1 || channels < 1) {
    throw ValidationError("feature map dimensions must be positive");
  }
  if (values.size() != std::size_t(height) * width * channels) {
    throw ValidationError("feature map value count does not match its shape");
  }
  for (float v : values) {
    if (!std::isfinite(v)) throw ValidationError("feature map contains non-finite values");
  }
}

FeatureMap bilinear_upsample(const FeatureMap& f, int out_h, int out_w) {
  if (out_h < f.height || out_w < f.width) {
    throw ValidationError(fmt::format("cannot upsample {}x{} features to {}x{}", f.height,
                                      f.width, out_h, out_w));
  }
  const auto rows = bilinear_taps(f.height, out_h);
  const auto cols = bilinear_taps(f.width, out_w);
  FeatureMap out(out_h, out_w, f.channels);
  for (int r = 0; r < out_h; ++r) {
    const auto& ty = rows[r];
    for (int c = 0; c < out_w; ++c) {
      const auto& tx = cols[c];
      for (int k = 0; k < f.channels; ++k) {
        const double top = (1.0 - tx.frac) * f.at(ty.i0, tx.i0, k) + tx.frac * f.at(ty.i0, tx.i1, k);
        const double bottom = (1.0 - tx.frac) * f.at(ty.i1, tx.i0, k) + tx.frac * f.at(ty.i1, tx.i1, k);
        out.at(r, c, k) = static_cast<float>((1.0 - ty.frac) * top + ty.frac * bottom);
      }
    }
  }
  return out;
}

Eigen::VectorXd masked_pool(const FeatureMap& f, const Mask& mask) {
  if (mask.height() != f.height || mask.width() != f.width) {
    throw ValidationError(fmt::format("mask {}x{} does not match feature grid {}x{}",
                                      mask.height(), mask.width(), f.height, f.width));
  }
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(f.channels);
  std::size_t count = 0;
  for (int r = 0; r < f.height; ++r) {
    for (int c = 0; c < f.width; ++c) {
      if (!mask(r, c)) continue;
      ++count;
      for (int k = 0; k < f.channels; ++k) sum[k] += f.at(r, c, k);
    }
  }
  if (count == 0) throw ValidationError("masked_pool: mask is empty");
  return sum / static_cast<double>(count);
}

PoolMode parse_pool_mode(const std::string& name) {
  if (name == "upsample") return PoolMode::kUpsample;
  if (name == "no-mask") return PoolMode::kNoMask;
  if (name == "downsample-mask") return PoolMode::kDownsampleMask;
  throw ValidationError("unknown pooling mode '" + name + "'");
}

const char* pool_mode_name(PoolMode mode) {
  switch (mode) {
    case PoolMode::kUpsample: return "upsample";
    case PoolMode::kNoMask: return "no-mask";
    case PoolMode::kDownsampleMask: return "downsample-mask";
  }
  return "";
}

Mask downsample_mask(const Mask& mask, int out_h, int out_w) {
  const int h = mask.height(), w = mask.width();
  Mask out(out_h, out_w);
  bool any = false;
  for (int r = 0; r < out_h; ++r) {
    const int sr = std::min(h - 1, static_cast<int>(static_cast<long long>(r) * h / out_h));
    for (int c = 0; c < out_w; ++c) {
      const int sc = std::min(w - 1, static_cast<int>(static_cast<long long>(c) * w / out_w));
      out(r, c) = mask(sr, sc) != 0;
      any = any || out(r, c);
    }
  }
  if (any) return out;
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      if (!mask(r, c)) continue;
      out(static_cast<int>(static_cast<long long>(r) * out_h / h),
          static_cast<int>(static_cast<long long>(c) * out_w / w)) = 1;
    }
  }
  return out;
}

Eigen::VectorXd pool_features(const FeatureMap& f, const Mask& mask, PoolMode mode) {
  switch (mode) {
    case PoolMode::kNoMask:
      return masked_pool(f, Mask(f.height, f.width, 1));
    case PoolMode::kDownsampleMask:
      return masked_pool(f, downsample_mask(mask, f.height, f.width));
    case PoolMode::kUpsample:
      break;
  }
  if (mask.height() == f.height && mask.width() == f.width) return masked_pool(f, mask);
  return masked_pool(bilinear_upsample(f, mask.height(), mask.width()), mask);
}

namespace {

constexpr char kBase64[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string base64_encode(const std::vector<std::uint8_t>& bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  for (std::size_t i = 0; i < bytes.size(); i += 3) {
    const std::size_t n = std::min<std::size_t>(3, bytes.size() - i);
    std::uint32_t v = std::uint32_t(bytes[i]) << 16;
    if (n > 1) v |= std::uint32_t(bytes[i + 1]) << 8;
    if (n > 2) v |= bytes[i + 2];
    for (std::size_t k = 0; k < 4; ++k) {
      out.push_back(k <= n ? kBase64[(v >> (18 - 6 * k)) & 63] : '=');
    }
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
  if (text.size() % 4 != 0) throw FormatError("probe model: base64 length is not a multiple of 4");
  std::vector<std::uint8_t> out;
  for (std::size_t i = 0; i < text.size(); i += 4) {
    std::uint32_t v = 0;
    int pad = 0;
    for (std::size_t k = 0; k < 4; ++k) {
      const char ch = text[i + k];
      int d = 0;
      if (ch == '=' && i + 4 == text.size() && k >= 2) {
        ++pad;
      } else if (pad > 0) {
        throw FormatError("probe model: malformed base64 padding");
      } else {
        const char* pos = std::strchr(kBase64, ch);
        if (ch == '\0' || pos == nullptr) throw FormatError("probe model: invalid base64 character");
        d = static_cast<int>(pos - kBase64);
      }
      v = (v << 6) | static_cast<std::uint32_t>(d);
    }
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    if (pad < 2) out.push_back(static_cast<std::uint8_t>(v >> 8));
    if (pad < 1) out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

}  // namespace

// Weights are row-major (channel, class) little-endian float32, base64.
nlohmann::json ProbeModel::to_json() const {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(static_cast<std::size_t>(weights.size()) * 4);
  for (Eigen::Index i = 0; i < weights.rows(); ++i) {
    for (Eigen::Index k = 0; k < weights.cols(); ++k) {
      const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(weights(i, k)));
      for (int b = 0; b < 4; ++b) bytes.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
    }
  }
  return {{"class_order", class_order},
          {"lambda", lambda},
          {"channels", weights.rows()},
          {"weights", base64_encode(bytes)},
          {"bias", std::vector<double>(bias.data(), bias.data() + bias.size())}};
}

ProbeModel ProbeModel::from_json(const nlohmann::json& j) {
  try {
    ProbeModel m;
    m.class_order = j.at("class_order").get<std::vector<int>>();
    m.lambda = j.at("lambda").get<double>();
    const auto channels = j.at("channels").get<Eigen::Index>();
    const auto classes = static_cast<Eigen::Index>(m.class_order.size());
    const auto bytes = base64_decode(j.at("weights").get<std::string>());
    if (channels < 0 || bytes.size() != static_cast<std::size_t>(channels * classes) * 4) {
      throw FormatError("probe model: weights size does not match channels x classes");
    }
    m.weights.resize(channels, classes);
    for (Eigen::Index i = 0; i < channels * classes; ++i) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) bits |= std::uint32_t(bytes[4 * i + b]) << (8 * b);
      m.weights(i / classes, i % classes) = std::bit_cast<float>(bits);
    }
    const auto b = j.at("bias").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(b.size()) != classes) {
      throw FormatError("probe model: bias size does not match classes");
    }
    m.bias = Eigen::Map<const Eigen::VectorXd>(b.data(), classes);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("probe model: ") + e.what());
  }
}

LogRegObjective::LogRegObjective(const Eigen::MatrixXd& X, std::vector<int> targets,
                                 int classes, double lambda)
    : X_(X), targets_(std::move(targets)), classes_(classes), lambda_(lambda) {
  if (static_cast<Eigen::Index>(targets_.size()) != X.rows()) {
    throw ValidationError("label count does not match sample count");
  }
}

double LogRegObjective::operator()(const Eigen::VectorXd& theta,
                                   Eigen::VectorXd* gradient) const {
  const Eigen::Index d = X_.cols(), n = X_.rows();
  const Eigen::Map<const Eigen::MatrixXd> W(theta.data(), d, classes_);
  const Eigen::Map<const Eigen::VectorXd> b(theta.data() + d * classes_, classes_);

  Eigen::MatrixXd Z = X_ * W;
  Z.rowwise() += b.transpose();
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double peak = Z.row(i).maxCoeff();
    Z.row(i).array() = (Z.row(i).array() - peak).exp();
    const double norm = Z.row(i).sum();
    loss += std::log(norm) - std::log(Z(i, targets_[i]));
    Z.row(i) /= norm;
  }
  loss /= static_cast<double>(n);
  loss += 0.5 * lambda_ * W.squaredNorm();

  if (gradient) {
    for (Eigen::Index i = 0; i < n; ++i) Z(i, targets_[i]) -= 1.0;
    Z /= static_cast<double>(n);
    gradient->resize(parameter_count());
    Eigen::Map<Eigen::MatrixXd> gW(gradient->data(), d, classes_);
    gW.noalias() = X_.transpose() * Z;
    gW += lambda_ * W;
    Eigen::Map<Eigen::VectorXd>(gradient->data() + d * classes_, classes_) =
        Z.colwise().sum().transpose();
  }
  return loss;
}

ProbeModel fit_logreg(const Eigen::MatrixXd& X, const std::vector<int>& y,
                      const FitOptions& options, FitTrace* trace) {
  if (X.rows() == 0) throw ValidationError("fit_logreg: no samples");
  if (static_cast<Eigen::Index>(y.size()) != X.rows()) {
    throw ValidationError("fit_logreg: label count does not match sample count");
  }
  if (!(options.lambda >= 0.0)) throw ValidationError("fit_logreg: lambda must be >= 0");
  if (!X.allFinite()) throw ValidationError("fit_logreg: features must be finite");
  std::set<int> distinct(y.begin(), y.end());
  if (distinct.size() < 2) throw ValidationError("fit_logreg: at least two classes are required");

  ProbeModel model;
  model.class_order.assign(distinct.begin(), distinct.end());
  model.lambda = options.lambda;
  const int classes = static_cast<int>(distinct.size());
  const LogRegObjective objective(X, class_indices(y, model.class_order), classes,
                                  options.lambda);

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(objective.parameter_count());
  Eigen::VectorXd grad;
  double value = objective(theta, &grad);
  FitTrace local;
  local.objective.push_back(value);

  std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> memory;
  constexpr double kArmijo = 1e-4;
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    if (grad.norm() <= options.tolerance) {
      local.converged = true;
      break;
    }
    Eigen::VectorXd direction = -grad;
    if (!memory.empty()) {
      std::vector<double> alpha(memory.size());
      for (std::size_t m = memory.size(); m-- > 0;) {
        const auto& [s, yv] = memory[m];
        alpha[m] = s.dot(direction) / yv.dot(s);
        direction -= alpha[m] * yv;
      }
      const auto& [s_last, y_last] = memory.back();
      direction *= s_last.dot(y_last) / y_last.squaredNorm();
      for (std::size_t m = 0; m < memory.size(); ++m) {
        const auto& [s, yv] = memory[m];
        const double beta = yv.dot(direction) / yv.dot(s);
        direction += (alpha[m] - beta) * s;
      }
    }
    double slope = grad.dot(direction);
    if (!(slope < 0.0)) {
      memory.clear();
      direction = -grad;
      slope = -grad.squaredNorm();
    }

    double step = memory.empty() ? std::min(1.0, 1.0 / grad.norm()) : 1.0;
    Eigen::VectorXd next, next_grad;
    double next_value = value;
    bool accepted = false;
    for (int tries = 0; tries < 60; ++tries) {
      next = theta + step * direction;
      next_value = objective(next, &next_grad);
      if (next_value <= value + kArmijo * step * slope && next_value < value) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!memory.empty()) {
        memory.clear();
        --iter;
        continue;
      }
      break;
    }

    Eigen::VectorXd s = next - theta;
    Eigen::VectorXd yv = next_grad - grad;
    if (s.dot(yv) > 1e-12 * s.norm() * yv.norm()) {
      memory.emplace_back(std::move(s), std::move(yv));
      if (static_cast<int>(memory.size()) > options.history) memory.pop_front();
    }
    theta = std::move(next);
    grad = std::move(next_grad);
    value = next_value;
    local.objective.push_back(value);
  }
  if (!local.converged && grad.norm() <= options.tolerance) local.converged = true;
  local.iterations = iter;
  local.gradient_norm = grad.norm();
  if (trace) *trace = std::move(local);

  const Eigen::Index d = X.cols();
  model.weights = Eigen::Map<const Eigen::MatrixXd>(theta.data(), d, classes);
  model.bias = theta.segment(d * classes, classes);
  return model;
}

Eigen::VectorXd predict_proba(const ProbeModel& model, const Eigen::VectorXd& x) {
  if (x.size() != model.weights.rows()) {
    throw ValidationError(fmt::format("feature vector has {} channels, model expects {}",
                                      x.size(), model.weights.rows()));
  }
  Eigen::VectorXd z = model.weights.transpose() * x + model.bias;
  z.array() -= z.maxCoeff();
  z = z.array().exp();
  return z / z.sum();
}

int predict_class(const ProbeModel& model, const Eigen::VectorXd& x) {
  const Eigen::VectorXd p = predict_proba(model, x);
  Eigen::Index best = 0;
  for (Eigen::Index k = 1; k < p.size(); ++k) {
    if (p[k] > p[best]) best = k;
  }
  return model.class_order[best];
}

int knn_predict(const Eigen::MatrixXd& X, const std::vector<int>& y, const Eigen::VectorXd& x,
                int k) {
  if (X.rows() == 0) throw ValidationError("knn_predict: no training samples");
  if (k < 1) throw ValidationError("knn_predict: k must be >= 1");
  if (x.size() != X.cols()) throw ValidationError("knn_predict: dimension mismatch");
  std::vector<std::pair<double, int>> dist(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    dist[i] = {(X.row(i).transpose() - x).squaredNorm(), static_cast<int>(i)};
  }
  const std::size_t kk = std::min<std::size_t>(k, dist.size());
  std::partial_sort(dist.begin(), dist.begin() + kk, dist.end());

  std::map<int, int> votes;
  for (std::size_t i = 0; i < kk; ++i) ++votes[y[dist[i].second]];
  int top = 0;
  for (const auto& [c, v] : votes) top = std::max(top, v);
  for (std::size_t i = 0; i < kk; ++i) {
    const int c = y[dist[i].second];
    if (votes[c] == top) return c;
  }
  return y[dist[0].second];
}

double macro_f1(const std::vector<int>& truth, const std::vector<int>& predicted) {
  if (truth.size() != predicted.size()) {
    throw ValidationError("macro_f1: truth and prediction lengths differ");
  }
  if (truth.empty()) throw ValidationError("macro_f1: no samples");
  std::map<int, std::array<std::size_t, 3>> table;  // tp, fp, fn
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] == predicted[i]) {
      ++table[truth[i]][0];
    } else {
      ++table[predicted[i]][1];
      ++table[truth[i]][2];
    }
  }
  double sum = 0.0;
  for (const auto& [c, t] : table) {
    sum += 2.0 * t[0] / static_cast<double>(2 * t[0] + t[1] + t[2]);
  }
  return sum / static_cast<double>(table.size());
}

std::vector<int> stratified_folds(const std::vector<int>& y, int folds, std::uint64_t seed) {
  if (folds < 2) throw ValidationError("cross-validation needs at least 2 folds");
  std::map<int, std::vector<int>> members;
  for (std::size_t i = 0; i < y.size(); ++i) members[y[i]].push_back(static_cast<int>(i));
  std::mt19937_64 rng(seed);
  std::vector<int> fold_of(y.size(), 0);
  std::size_t dealt = 0;
  for (auto& [c, idx] : members) {
    for (std::size_t i = idx.size(); i > 1; --i) {
      std::swap(idx[i - 1], idx[rng() % i]);
    }
    for (int i : idx) fold_of[i] = static_cast<int>(dealt++ % folds);
  }
  return fold_of;
}

std::string ProbeConfig::label() const {
  if (kind == Kind::kLogReg) return fmt::format("logreg(lambda={:g})", lambda);
  return fmt::format("knn(k={})", k);
}

nlohmann::json CvResult::to_json() const {
  auto number = [](double v) -> nlohmann::json {
    if (std::isnan(v)) return nullptr;
    return v;
  };
  nlohmann::json configs = nlohmann::json::array();
  for (const auto& s : scores) {
    nlohmann::json folds = nlohmann::json::array();
    for (double f : s.fold_f1) folds.push_back(number(f));
    nlohmann::json entry = {{"model", s.config.kind == ProbeConfig::Kind::kLogReg ? "logreg" : "knn"},
                            {"fold_f1", std::move(folds)},
                            {"mean_f1", number(s.mean_f1)}};
    if (s.config.kind == ProbeConfig::Kind::kLogReg) {
      entry["lambda"] = s.config.lambda;
    } else {
      entry["k"] = s.config.k;
    }
    configs.push_back(std::move(entry));
  }
  const auto& b = best_score();
  return {{"folds", fold_of.empty() ? 0 : *std::max_element(fold_of.begin(), fold_of.end()) + 1},
          {"best", b.config.label()},
          {"best_mean_f1", number(b.mean_f1)},
          {"configs", std::move(configs)}};
}

CvResult cross_validate(const Eigen::MatrixXd& X, const std::vector<int>& y,
                        const CvOptions& options) {
  if (X.rows() == 0) throw ValidationError("cross_validate: empty data");
  if (static_cast<Eigen::Index>(y.size()) != X.rows()) {
    throw ValidationError("cross_validate: label count does not match sample count");
  }
  if (options.lambdas.empty() && options.ks.empty()) {
    throw ValidationError("cross_validate: empty hyperparameter grid");
  }
  CvResult result;
  result.fold_of = stratified_folds(y, options.folds, options.seed);

  std::vector<double> lambdas = options.lambdas;
  std::vector<int> ks = options.ks;
  std::sort(lambdas.begin(), lambdas.end());
  std::sort(ks.begin(), ks.end());
  for (double l : lambdas) {
    result.scores.push_back({{ProbeConfig::Kind::kLogReg, l, 0}, {}, 0.0});
  }
  for (int k : ks) {
    result.scores.push_back({{ProbeConfig::Kind::kKnn, 0.0, k}, {}, 0.0});
  }
  for (auto& s : result.scores) s.fold_f1.assign(options.folds, kNaN);

  auto run_fold = [&](int fold) {
    std::vector<int> train, test;
    for (std::size_t i = 0; i < y.size(); ++i) {
      (result.fold_of[i] == fold ? test : train).push_back(static_cast<int>(i));
    }
    if (test.empty() || train.empty()) return;
    const Eigen::MatrixXd Xtr = select_rows(X, train);
    std::vector<int> ytr, ytest;
    for (int i : train) ytr.push_back(y[i]);
    for (int i : test) ytest.push_back(y[i]);
    const bool single = std::set<int>(ytr.begin(), ytr.end()).size() < 2;

    for (auto& s : result.scores) {
      std::vector<int> pred(test.size());
      if (s.config.kind == ProbeConfig::Kind::kLogReg) {
        if (single) {
          std::fill(pred.begin(), pred.end(), ytr.front());
        } else {
          FitOptions fit = options.fit;
          fit.lambda = s.config.lambda;
          const ProbeModel m = fit_logreg(Xtr, ytr, fit);
          for (std::size_t i = 0; i < test.size(); ++i) {
            pred[i] = predict_class(m, X.row(test[i]).transpose());
          }
        }
      } else {
        for (std::size_t i = 0; i < test.size(); ++i) {
          pred[i] = knn_predict(Xtr, ytr, X.row(test[i]).transpose(), s.config.k);
        }
      }
      s.fold_f1[fold] = macro_f1(ytest, pred);
    }
  };

  const int workers = std::max(1, std::min(options.workers, options.folds));
  if (workers == 1) {
    for (int f = 0; f < options.folds; ++f) run_fold(f);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (int f = w; f < options.folds; f += workers) run_fold(f);
      });
    }
  }

  for (auto& s : result.scores) {
    double sum = 0.0;
    int n = 0;
    for (double f : s.fold_f1) {
      if (std::isnan(f)) continue;
      sum += f;
      ++n;
    }
    s.mean_f1 = n > 0 ? sum / n : kNaN;
  }
  for (std::size_t i = 1; i < result.scores.size(); ++i) {
    const double cur = result.scores[i].mean_f1;
    const double best = result.scores[result.best].mean_f1;
    if (!std::isnan(cur) && (std::isnan(best) || cur > best)) result.best = i;
  }
  return result;
}

}  // namespace roofkit
