// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.
#include <sys/wait.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "oracles.hpp"
#include "roofkit/distance.hpp"
#include "roofkit/instances.hpp"
#include "roofkit/labels.hpp"
#include "roofkit/metrics.hpp"
#include "roofkit/npy.hpp"
#include "roofkit/probe.hpp"
#include "roofkit/splitter.hpp"

using namespace roofkit;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

LabelRaster random_raster(std::mt19937_64& rng, int h, int w, int objects) {
  std::uniform_int_distribution<int> row(0, h - 1), col(0, w - 1), size(2, 12);
  std::vector<std::array<int, 4>> boxes;
  for (int i = 0; i < objects; ++i) {
    const int r = row(rng), c = col(rng);
    boxes.push_back({r, c, r + size(rng), c + size(rng)});
  }
  LabelRaster out;
  out.ids = oracle::paint_boxes(h, w, boxes);
  for (auto id : out.ids.values()) {
    if (id) out.class_of[id] = 1 + static_cast<int>(id % 5);
  }
  return out;
}

Mask random_mask(std::mt19937_64& rng, int h, int w, double p) {
  std::bernoulli_distribution on(p);
  Mask m(h, w);
  for (auto& v : m.values()) v = on(rng);
  return m;
}

InstanceSet boxes_set(int h, int w, const std::vector<std::array<int, 4>>& boxes,
                      const std::vector<double>& conf = {}) {
  std::map<std::uint32_t, int> k;
  std::map<std::uint32_t, double> c;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    k[static_cast<std::uint32_t>(i + 1)] = 1;
    if (!conf.empty()) c[static_cast<std::uint32_t>(i + 1)] = conf[i];
  }
  return make_instance_set(oracle::paint_boxes(h, w, boxes), k, c);
}

Outcome weight_values() {
  const double a = boundary_weight(0.0, 10.0, 5.0);
  const double b = boundary_weight(10.0, 10.0, 5.0);
  const bool ok = std::abs(a - 10.0) <= 1e-9 && std::abs(b - 10.0 * std::exp(-2.0)) <= 1e-9;
  return {ok, fmt::format("w(0)={:.6f} w(10)={:.6f}", a, b)};
}

Outcome edt_exact() {
  std::mt19937_64 rng(1001);
  std::uniform_int_distribution<int> dim(1, 64);
  std::uniform_real_distribution<double> density(0.0, 0.6);
  int mismatched = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Mask m = random_mask(rng, dim(rng), dim(rng), density(rng));
    if (squared_distance_to(m) != oracle::squared_distance(m)) ++mismatched;
    const auto d = distance_transform(m, DistanceSource::kForeground);
    const auto sq = oracle::squared_distance(m);
    for (std::size_t i = 0; i < sq.size(); ++i) {
      const float expected = std::isinf(sq[i]) ? kInfiniteDistance
                                               : static_cast<float>(std::sqrt(sq[i]));
      if (d[i] != expected) {
        ++mismatched;
        break;
      }
    }
  }
  return {mismatched == 0, fmt::format("200 masks, {} mismatched", mismatched)};
}

Outcome gap_postcondition() {
  std::mt19937_64 rng(1002);
  int violations = 0, unstable = 0;
  double worst = oracle::kInf;
  for (int trial = 0; trial < 100; ++trial) {
    const auto raster = random_raster(rng, 48, 48, 4 + trial % 6);
    const auto once = enforce_gap(raster, 7);
    const double d = oracle::min_interinstance_sq(once.labels.ids);
    worst = std::min(worst, d);
    if (d < 49.0) ++violations;
    if (enforce_gap(once.labels, 7).labels.ids != once.labels.ids) ++unstable;
  }
  return {violations == 0 && unstable == 0,
          fmt::format("min distance {:.3f}, {} violations, {} not idempotent", std::sqrt(worst),
                      violations, unstable)};
}

Outcome dow_separation() {
  LabelImage ids(25, 46);
  for (int r = 0; r < 21; ++r) {
    for (int c = 0; c < 42; ++c) ids(r + 2, c + 2) = c < 21 ? 1 : 2;
  }
  const auto t = ordinal_targets(ids, 2, 10);
  const auto dow = dow_watershed(t.levels).size();
  const auto cc = connected_components(t.levels[0]).size();
  return {dow == 2 && cc == 1, fmt::format("watershed {} instances, components {}", dow, cc)};
}

Outcome single_level() {
  std::mt19937_64 rng(1005);
  int differing = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Mask m = random_mask(rng, 48, 48, 0.3 + 0.04 * (trial % 8));
    const auto conn = trial % 2 ? Connectivity::kFour : Connectivity::kEight;
    if (dow_watershed({m}, conn).instance_map != connected_components(m, conn).instance_map) {
      ++differing;
    }
  }
  return {differing == 0, fmt::format("100 masks, {} differ", differing)};
}

Outcome ap_oracle() {
  std::mt19937_64 rng(1006);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = oracle::random_scene(rng, 20);
    for (int pct = 50; pct <= 95; pct += 5) {
      worst = std::max(worst, std::abs(average_precision(s.preds, s.gts, pct / 100.0) -
                                       oracle::scene_ap(s, pct)));
    }
    worst = std::max(worst, std::abs(ap_range(s.preds, s.gts) - oracle::scene_ap_range(s)));
  }
  const double half = average_precision(
      boxes_set(10, 20, {{0, 10, 4, 14}, {0, 0, 4, 4}}, {0.9, 0.8}),
      boxes_set(10, 20, {{0, 0, 4, 4}}), 0.5);
  const double five_sixths = average_precision(
      boxes_set(10, 30, {{0, 0, 4, 4}, {0, 10, 4, 14}, {0, 20, 4, 24}}, {0.9, 0.8, 0.7}),
      boxes_set(10, 30, {{0, 0, 4, 4}, {0, 20, 4, 24}}), 0.5);
  const bool ok = worst <= 1e-9 && half == 0.5 && std::abs(five_sixths - 5.0 / 6.0) <= 1e-12;
  return {ok, fmt::format("max |diff| {:.2e}, cases {:.4f} {:.4f}", worst, half, five_sixths)};
}

Outcome metric_sanity() {
  std::mt19937_64 rng(1007);
  std::vector<InstanceSet> sets;
  std::size_t objects = 0;
  for (int i = 0; i < 5; ++i) {
    sets.push_back(oracle::random_scene(rng, 10, 5).gts);
    objects += sets.back().size();
  }
  EvalOptions opts;
  opts.mode = EvalMode::kMulticlass;
  const auto r = evaluate(sets, sets, opts);
  bool perfect = r.iou == 1.0 && r.ap50 == 1.0 && r.ap50_95 == 1.0 && r.tps == objects;
  for (double v : {r.miou3, r.miou5, r.map50_3, r.map50_5, r.map50_95_3, r.map50_95_5}) {
    perfect = perfect && (is_absent(v) || v == 1.0);
  }
  int inverted = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = oracle::random_scene(rng, 20);
    if (ap_range(s.preds, s.gts) > average_precision(s.preds, s.gts, 0.5)) ++inverted;
  }
  return {perfect && inverted == 0,
          fmt::format("perfect scene {}, tps {}/{}, {} scenes with AP50-95 > AP50",
                      perfect ? "ok" : "wrong", r.tps, objects, inverted)};
}

Outcome nesting_interior() {
  std::mt19937_64 rng(1008);
  int unnested = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto raster = random_raster(rng, 40, 40, 6);
    const auto t = ordinal_targets(raster.ids, 1 + trial % 5, 1 + trial % 4);
    if (!is_nested(t.levels)) ++unnested;
  }
  LabelImage sq(31, 31);
  Mask background(31, 31);
  for (int r = 0; r < 31; ++r) {
    for (int c = 0; c < 31; ++c) {
      const bool in = r >= 5 && r < 26 && c >= 5 && c < 26;
      sq(r, c) = in;
      background(r, c) = !in;
    }
  }
  const auto levels = ordinal_targets(sq, 2, 10).levels;
  const auto d2 = oracle::squared_distance(background);
  int wrong = 0;
  for (std::size_t i = 0; i < d2.size(); ++i) wrong += (levels[1][i] != 0) != (d2[i] > 100.0);
  return {unnested == 0 && wrong == 0,
          fmt::format("{} unnested stacks, {} interior pixels wrong", unnested, wrong)};
}

Outcome split_quality() {
  std::mt19937_64 rng(1009);
  const Grid g = build_grid({0, 0, 225 * 5, 225 * 4});
  std::vector<ClassHistogram> counts(g.cell_count());
  std::poisson_distribution<int> common(30), mid(8), rare(1);
  for (auto& h : counts) {
    h[1] = common(rng);
    h[2] = mid(rng);
    if (int k = rare(rng)) h[3] = k;
    if (int k = rare(rng)) h[5] = k;
  }
  const SplitFractions f{0.7, 0.15, 0.15};
  const auto s = partition_cells(g, counts, f);
  ClassHistogram totals;
  for (const auto& h : counts) {
    for (auto [c, k] : h) totals[c] += k;
  }
  const auto max_cell = max_cell_counts(counts);
  double excess = 0.0;
  for (auto set : kSplitSets) {
    for (auto [c, total] : totals) {
      const auto it = s.counts(set).find(c);
      const double n = it == s.counts(set).end() ? 0.0 : double(it->second);
      excess = std::max(excess, std::abs(n - f.of(set) * double(total)) - double(max_cell.at(c)));
    }
  }
  const double ours = chi_square_to_target(s.set_counts, totals, f);
  std::uniform_int_distribution<int> pick(0, 2);
  int beaten = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::array<ClassHistogram, 3> random_counts;
    for (const auto& h : counts) {
      auto& dst = random_counts[pick(rng)];
      for (auto [c, k] : h) dst[c] += k;
    }
    beaten += ours < chi_square_to_target(random_counts, totals, f);
  }
  return {excess <= 1e-9 && beaten >= 950,
          fmt::format("worst excess over one cell {:.3f}, chi2 {:.3f} beats {}/1000", excess, ours,
                      beaten)};
}

Outcome logreg_checks() {
  std::mt19937_64 rng(1010);
  std::normal_distribution<double> n(0.0, 1.0);
  double worst = 0.0;
  bool monotone = true;
  for (int trial = 0; trial < 20; ++trial) {
    const int rows = 10 + trial, dims = 2 + trial % 4, classes = 2 + trial % 3;
    Eigen::MatrixXd X(rows, dims);
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = n(rng);
    std::vector<int> t(rows), labels(rows);
    for (int i = 0; i < rows; ++i) labels[i] = t[i] = i % classes;
    const LogRegObjective obj(X, t, classes, 0.01 * (1 + trial % 5));
    Eigen::VectorXd theta(obj.parameter_count());
    for (Eigen::Index i = 0; i < theta.size(); ++i) theta[i] = 0.5 * n(rng);
    Eigen::VectorXd grad;
    obj(theta, &grad);
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
      const double h = 1e-5;
      Eigen::VectorXd a = theta, b = theta;
      a[i] += h;
      b[i] -= h;
      const double fd = (obj(a, nullptr) - obj(b, nullptr)) / (2 * h);
      worst = std::max(worst, std::abs(grad[i] - fd) / std::max(1.0, std::abs(fd)));
    }
    FitTrace trace;
    FitOptions opts;
    opts.lambda = 1e-2;
    fit_logreg(X, labels, opts, &trace);
    for (std::size_t i = 1; i < trace.objective.size(); ++i) {
      monotone = monotone && trace.objective[i] <= trace.objective[i - 1];
    }
  }
  std::normal_distribution<double> jitter(0.0, 0.3);
  Eigen::MatrixXd X(40, 2);
  std::vector<int> y;
  for (int i = 0; i < 40; ++i) {
    X(i, 0) = (i % 2 ? 2.0 : -2.0) + jitter(rng);
    X(i, 1) = jitter(rng);
    y.push_back(i % 2);
  }
  FitOptions opts;
  const auto model = fit_logreg(X, y, opts);
  int correct = 0;
  for (int i = 0; i < 40; ++i) correct += predict_class(model, X.row(i).transpose()) == y[i];
  const double accuracy = correct / 40.0;
  return {worst <= 1e-5 && monotone && accuracy == 1.0,
          fmt::format("max relative gradient error {:.2e}, monotone {}, separable accuracy {:.3f}",
                      worst, monotone ? "yes" : "no", accuracy)};
}

Outcome pooling_ablation() {
  // Class signal lives only under the building mask; the rest of the tile is
  // clutter with a random per-tile offset.
  std::mt19937_64 rng(1011);
  std::normal_distribution<float> noise(0.0f, 1.0f), clutter(0.0f, 3.0f);
  std::uniform_int_distribution<int> corner(0, 5);
  constexpr int kSamples = 90, kClasses = 3, kChannels = 6;
  Eigen::MatrixXd with_mask(kSamples, kChannels), without(kSamples, kChannels);
  std::vector<int> y;
  for (int i = 0; i < kSamples; ++i) {
    const int cls = i % kClasses;
    FeatureMap f(8, 8, kChannels);
    std::vector<float> offset(kChannels);
    for (auto& o : offset) o = clutter(rng);
    for (int r = 0; r < 8; ++r) {
      for (int c = 0; c < 8; ++c) {
        for (int k = 0; k < kChannels; ++k) f.at(r, c, k) = offset[k] + noise(rng);
      }
    }
    Mask m(32, 32);
    const int r0 = corner(rng), c0 = corner(rng);
    for (int r = r0; r < r0 + 2; ++r) {
      for (int c = c0; c < c0 + 2; ++c) {
        for (int k = 0; k < kChannels; ++k) f.at(r, c, k) = (k == cls ? 2.0f : 0.0f) + 0.3f * noise(rng);
      }
    }
    for (int r = 4 * r0 + 1; r < 4 * (r0 + 2) - 1; ++r) {
      for (int c = 4 * c0 + 1; c < 4 * (c0 + 2) - 1; ++c) m(r, c) = 1;
    }
    with_mask.row(i) = pool_features(f, m, PoolMode::kUpsample).transpose();
    without.row(i) = pool_features(f, m, PoolMode::kNoMask).transpose();
    y.push_back(cls);
  }
  CvOptions opts;
  opts.seed = 7;
  const double a = cross_validate(with_mask, y, opts).best_score().mean_f1;
  const double b = cross_validate(without, y, opts).best_score().mean_f1;
  return {a >= b, fmt::format("macro F1 with mask {:.3f}, without {:.3f}", a, b)};
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = fmt::format("\"{}\" {} >\"{}\" 2>&1", ROOFKIT_CLI_PATH, args, log.string());
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void save(const NpyArray& a, const fs::path& p) {
  fs::create_directories(p.parent_path());
  write_array(a, p);
}

Outcome cli_determinism() {
  const fs::path root = fs::temp_directory_path() / "roofkit_acceptance";
  fs::remove_all(root);
  std::mt19937_64 rng(1012);
  std::uniform_int_distribution<int> pos(0, 50), len(5, 16);
  for (int i = 0; i < 8; ++i) {
    std::vector<std::array<int, 4>> boxes;
    for (int k = 0; k < 8; ++k) {
      const int r = pos(rng), c = pos(rng);
      boxes.push_back({r, c, r + len(rng), c + len(rng)});
    }
    save(to_npy(oracle::paint_boxes(64, 64, boxes)), root / fmt::format("in/t{}.npy", i));
  }
  nlohmann::json fc = {{"type", "FeatureCollection"}, {"features", nlohmann::json::array()}};
  std::uniform_real_distribution<double> xy(0, 1500);
  for (int i = 0; i < 400; ++i) {
    const double x = xy(rng), y = xy(rng);
    fc["features"].push_back(
        {{"type", "Feature"},
         {"properties", {{"id", std::to_string(i)}, {"class", 1 + (i * 7) % 5}}},
         {"geometry",
          {{"type", "Polygon"},
           {"coordinates", {{{x, y}, {x + 15, y}, {x + 15, y + 11}, {x, y + 11}, {x, y}}}}}}});
  }
  std::ofstream(root / "buildings.geojson") << fc.dump();
  std::normal_distribution<float> noise(0.0f, 1.0f);
  std::string labels = "stem,class\n";
  for (int i = 0; i < 30; ++i) {
    std::vector<float> feat(6 * 6 * 4);
    for (auto& v : feat) v = noise(rng) + 0.5f * static_cast<float>(i % 3);
    save(NpyArray::from_values<float>({6, 6, 4}, feat), root / fmt::format("feat/s{}.npy", i));
    Mask m(12, 12);
    for (int r = 2; r < 8; ++r) {
      for (int c = 3; c < 9; ++c) m(r, c) = 1;
    }
    save(to_npy(m), root / fmt::format("mask/s{}.npy", i));
    labels += fmt::format("s{},{}\n", i, i % 3);
  }
  std::ofstream(root / "labels.csv") << labels;

  auto pipeline = [&](const std::string& name, int workers) -> bool {
    const fs::path o = root / name;
    const fs::path log = root / (name + ".log");
    const std::string w = fmt::format("--workers {} --seed 11", workers);
    if (run_cli(fmt::format("{} targets --input {} --output {}", w, (root / "in").string(),
                            (o / "targets").string()), log)) return false;
    if (run_cli(fmt::format("{} instances --input {} --output {}", w, (o / "targets").string(),
                            (o / "instances").string()), log)) return false;
    fs::create_directories(o / "pred");
    for (int i = 0; i < 8; ++i) {
      fs::copy_file(o / fmt::format("instances/t{}.npy", i), o / fmt::format("pred/t{}.npy", i));
    }
    if (run_cli(fmt::format("{} eval --pred {} --gt {} --output {}", w, (o / "pred").string(),
                            (root / "in").string(), (o / "report.json").string()), log)) return false;
    if (run_cli(fmt::format("{} split --input {} --output {}", w,
                            (root / "buildings.geojson").string(), (o / "split").string()), log)) return false;
    return run_cli(fmt::format("{} probe --features {} --masks {} --labels {} --output {} --folds 5",
                               w, (root / "feat").string(), (root / "mask").string(),
                               (root / "labels.csv").string(), (o / "probe").string()), log) == 0;
  };
  if (!pipeline("a", 1) || !pipeline("b", 4) || !pipeline("c", 1)) {
    return {false, "a CLI command failed, see " + root.string()};
  }
  std::size_t files = 0, differing = 0;
  for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
    if (!e.is_regular_file()) continue;
    ++files;
    const auto rel = fs::relative(e.path(), root / "a");
    const std::string ref = slurp(e.path());
    differing += slurp(root / "b" / rel) != ref || slurp(root / "c" / rel) != ref;
  }
  if (differing == 0) fs::remove_all(root);
  return {differing == 0 && files > 0,
          fmt::format("{} output files compared across 3 runs (workers 1, 4, 1), {} differ", files,
                      differing)};
}

struct Criterion {
  const char* name;
  const char* tolerance;
  double budget_s;  // 0 means no runtime bound
  std::function<Outcome()> check;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"boundary weight closed-form values", "abs 1e-9", 1.0, weight_values},
      {"distance transform exactness", "exact", 10.0, edt_exact},
      {"gap post-condition and idempotence", "distance >= 7, exact", 30.0, gap_postcondition},
      {"watershed separates touching squares", "exact count", 1.0, dow_separation},
      {"single-level watershed equals components", "exact", 0.0, single_level},
      {"AP matches brute-force enumeration", "abs 1e-9", 0.0, ap_oracle},
      {"metric sanity bounds", "exact", 0.0, metric_sanity},
      {"ordinal nesting and interior threshold", "exact", 0.0, nesting_interior},
      {"stratified split quality", "one cell per class, >= 95%", 10.0, split_quality},
      {"logistic regression gradient and fit", "rel 1e-5", 0.0, logreg_checks},
      {"masked pooling ablation direction", "F1 mask >= no mask", 0.0, pooling_ablation},
      {"CLI determinism across worker counts", "byte-identical", 0.0, cli_determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.check();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_s > 0 && secs >= c.budget_s) {
      out.pass = false;
      out.detail += fmt::format("; over the {:.0f} s budget", c.budget_s);
    }
    failures += !out.pass;
    std::cout << fmt::format("{} [{:2}] {} [{}]: {} ({:.3f} s)\n", out.pass ? "PASS" : "FAIL",
                             i + 1, c.name, c.tolerance, out.detail, secs);
  }
  std::cout << fmt::format("{}/{} criteria passed\n", criteria.size() - failures, criteria.size());
  return failures ? 1 : 0;
}
