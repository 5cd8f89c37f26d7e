#include <cmath>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>

#include <fmt/format.h>

#include "cli_support.hpp"
#include "roofkit/geojson.hpp"
#include "roofkit/instances.hpp"
#include "roofkit/labels.hpp"
#include "roofkit/metrics.hpp"
#include "roofkit/npy.hpp"
#include "roofkit/polygonize.hpp"
#include "roofkit/probe.hpp"
#include "roofkit/splitter.hpp"

namespace {

using namespace roofkit;
using namespace roofkit::cli;

struct Common {
  std::string config;
  int workers = 1;
  std::uint64_t seed = 0;
};

struct TargetsArgs {
  std::string input, output;
  int n_gap = 7, n_lev = 2, n_pix = 10;
  double w0 = 10.0, sigma = 5.0;
  std::string weight_mode = "additive";
};

struct InstancesArgs {
  std::string input, output, georef;
  double threshold = 0.5, interior_threshold = 0.5;
  int connectivity = 8;
};

struct EvalArgs {
  std::string pred, gt, output, format, mode = "binary", interpolation = "all-points";
  std::vector<int> main_classes = kMainClasses;
  std::vector<int> all_classes = kAllClasses;
};

struct SplitArgs {
  std::string input, output;
  double cell_size = 225.0;
  std::vector<double> fractions = {0.7, 0.15, 0.15};
  std::vector<int> priority;
};

struct ProbeArgs {
  std::string features, masks, labels, output, pool = "upsample";
  int folds = 10;
  std::vector<double> lambdas = {1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0};
  std::vector<int> ks = {1, 3, 5, 7, 11};
};

std::map<std::uint32_t, std::size_t> read_class_csv(const fs::path& path) {
  std::map<std::uint32_t, std::size_t> out;
  const auto rows = read_csv(path);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    try {
      out[static_cast<std::uint32_t>(std::stoul(rows[i].at(0)))] = std::stoul(rows[i].at(1));
    } catch (const std::exception&) {
      throw FormatError(fmt::format("{}: malformed row {}", path.string(), i + 1));
    }
  }
  return out;
}

std::string instance_csv(const InstanceSet& set) {
  std::string out = "id,class,confidence,pixels\n";
  for (const auto& r : set.records) {
    out += fmt::format("{},{},{:.6f},{}\n", r.id, r.class_id, r.confidence, r.pixel_count);
  }
  return out;
}

InstanceSet read_instances(const fs::path& npy, const fs::path& csv) {
  const LabelImage ids = to_label_image(read_array(npy));
  std::map<std::uint32_t, int> class_of;
  std::map<std::uint32_t, double> confidence_of;
  if (fs::exists(csv)) {
    const auto rows = read_csv(csv);
    if (rows.empty()) throw FormatError(csv.string() + ": missing header");
    const auto& header = rows[0];
    auto column = [&](const std::string& name) -> int {
      auto it = std::find(header.begin(), header.end(), name);
      return it == header.end() ? -1 : static_cast<int>(it - header.begin());
    };
    const int id_col = column("id"), class_col = column("class"), conf_col = column("confidence");
    if (id_col < 0) throw FormatError(csv.string() + ": no 'id' column");
    for (std::size_t i = 1; i < rows.size(); ++i) {
      try {
        const auto id = static_cast<std::uint32_t>(std::stoul(rows[i].at(id_col)));
        class_of[id] = class_col >= 0 ? std::stoi(rows[i].at(class_col)) : 0;
        if (conf_col >= 0 && !rows[i].at(conf_col).empty()) {
          confidence_of[id] = std::stod(rows[i].at(conf_col));
        }
      } catch (const std::exception&) {
        throw FormatError(fmt::format("{}: malformed row {}", csv.string(), i + 1));
      }
    }
  } else {
    for (auto id : ids.values()) {
      if (id != 0) class_of[id] = 0;
    }
  }
  return make_instance_set(ids, class_of, confidence_of);
}

int cmd_targets(const TargetsArgs& a, const Common& c) {
  if (a.n_gap < 0) throw ValidationError("n_gap must be >= 0");
  if (a.n_pix < 1) throw ValidationError("n_pix must be >= 1");
  if (a.n_lev < 1 || a.n_lev > 255) throw ValidationError("n_lev must be in [1, 255]");
  if (!(a.sigma > 0.0)) throw ValidationError("sigma must be positive");
  WeightParams wp{a.w0, a.sigma, WeightMode::kAdditive};
  if (a.weight_mode == "literal") {
    wp.mode = WeightMode::kLiteral;
  } else if (a.weight_mode != "additive") {
    throw ValidationError("weight_mode must be 'additive' or 'literal'");
  }
  const auto files = list_files(a.input, ".npy");
  ensure_directory(a.output);
  const fs::path out(a.output);

  auto body = [&](std::size_t i) {
    const fs::path& file = files[i];
    const std::string stem = stem_of(file, ".npy");
    LabelRaster raster;
    raster.ids = to_label_image(read_array(file));
    const fs::path csv = file.parent_path() / (stem + ".csv");
    const bool has_classes = fs::exists(csv);
    std::map<std::uint32_t, std::size_t> classes;
    if (has_classes) classes = read_class_csv(csv);
    for (auto id : raster.ids.values()) {
      if (id == 0) continue;
      auto it = classes.find(id);
      if (has_classes && it == classes.end()) {
        throw ValidationError(fmt::format("instance {} has no class in {}", id, csv.string()));
      }
      raster.class_of[id] = has_classes ? static_cast<int>(it->second) : 1;
    }

    const GapResult gap = enforce_gap(raster, a.n_gap);
    const LabelImage& ids = gap.labels.ids;
    write_array(to_npy(ids), out / (stem + "_gap.npy"));
    write_array(to_npy(weight_map(ids, wp)), out / (stem + "_weights.npy"));
    write_array(to_npy(ordinal_targets(ids, a.n_lev, a.n_pix).levels),
                out / (stem + "_levels.npy"));
    if (has_classes) {
      Mask cls(ids.height(), ids.width());
      for (std::size_t p = 0; p < ids.size(); ++p) {
        if (ids[p] != 0) cls[p] = static_cast<std::uint8_t>(gap.labels.class_of.at(ids[p]));
      }
      write_array(to_npy(cls), out / (stem + "_class_ids.npy"));
    }
    const nlohmann::json edit = {{"removed_instances", gap.edit.removed_instances},
                                 {"relabeled_pixels", gap.edit.relabeled_pixels}};
    write_text_file(out / (stem + "_gap.json"), edit.dump() + "\n");
    return fmt::format("targets {}: {} instances removed, {} pixels relabeled", stem,
                       gap.edit.removed_instances.size(), gap.edit.relabeled_pixels);
  };
  return report(run_files(files.size(), c.workers, body,
                          [&](std::size_t i) { return files[i].string(); }));
}

ProbabilityStack read_stack(const fs::path& path, StackKind kind) {
  ProbabilityStack s;
  s.kind = kind;
  const NpyArray arr = read_array(path);
  if (arr.dtype != DType::kFloat32) {
    throw ValidationError(path.string() + ": probability stacks must be float32");
  }
  s.layers = to_float_stack(arr);
  s.validate();
  return s;
}

int cmd_instances(const InstancesArgs& a, const Common& c) {
  if (a.connectivity != 4 && a.connectivity != 8) {
    throw ValidationError("connectivity must be 4 or 8");
  }
  for (double t : {a.threshold, a.interior_threshold}) {
    if (!(t > 0.0 && t <= 1.0)) throw ValidationError("thresholds must be in (0, 1]");
  }
  const auto conn = a.connectivity == 4 ? Connectivity::kFour : Connectivity::kEight;
  const auto files = list_files(a.input, "_levels.npy");
  ensure_directory(a.output);
  const fs::path in(a.input), out(a.output);
  std::optional<GeoTransform> global_georef;
  if (!a.georef.empty()) global_georef = read_geotransform(a.georef);

  auto body = [&](std::size_t i) {
    const std::string stem = stem_of(files[i], "_levels.npy");
    const NpyArray arr = read_array(files[i]);
    std::vector<Mask> levels;
    std::optional<ProbabilityStack> level_probs;
    if (arr.dtype == DType::kFloat32) {
      level_probs = ProbabilityStack{to_float_stack(arr), StackKind::kLevelProbs};
      level_probs->validate();
      levels = threshold_levels(*level_probs, a.threshold);
    } else if (arr.dtype == DType::kUint8) {
      levels = to_mask_stack(arr);
    } else {
      throw ValidationError(files[i].string() + ": levels must be uint8 masks or float32");
    }
    InstanceSet set = dow_watershed(levels, conn);

    const fs::path classes = in / (stem + "_classes.npy");
    const fs::path interior = in / (stem + "_interior.npy");
    if (fs::exists(classes)) {
      const ProbabilityStack class_probs = read_stack(classes, StackKind::kClassProbs);
      std::optional<ProbabilityStack> interior_probs;
      if (fs::exists(interior)) interior_probs = read_stack(interior, StackKind::kClassProbs);
      set = assign_class_and_confidence(std::move(set), class_probs,
                                        interior_probs ? &*interior_probs : nullptr,
                                        a.interior_threshold);
    } else if (level_probs) {
      std::vector<double> sum(set.size() + 1, 0.0);
      for (std::size_t p = 0; p < set.instance_map.size(); ++p) {
        sum[set.instance_map[p]] += level_probs->layers[0][p];
      }
      for (auto& r : set.records) r.confidence = sum[r.id] / static_cast<double>(r.pixel_count);
    }

    write_array(to_npy(set.instance_map), out / (stem + ".npy"));
    write_text_file(out / (stem + ".csv"), instance_csv(set));
    std::optional<GeoTransform> georef = global_georef;
    const fs::path sidecar = in / (stem + "_georef.json");
    if (fs::exists(sidecar)) georef = read_geotransform(sidecar);
    write_geojson(polygonize(set), out / (stem + ".geojson"), georef);
    return fmt::format("instances {}: {} instances", stem, set.size());
  };
  return report(run_files(files.size(), c.workers, body,
                          [&](std::size_t i) { return files[i].string(); }));
}

int cmd_eval(const EvalArgs& a, const Common& c) {
  EvalOptions options;
  if (a.mode == "multiclass") {
    options.mode = EvalMode::kMulticlass;
  } else if (a.mode != "binary") {
    throw ValidationError("mode must be 'binary' or 'multiclass'");
  }
  if (a.interpolation == "coco101") {
    options.interpolation = ApInterpolation::kCoco101;
  } else if (a.interpolation != "all-points") {
    throw ValidationError("interpolation must be 'all-points' or 'coco101'");
  }
  options.main_classes = a.main_classes;
  options.all_classes = a.all_classes;
  ReportFormat format = ReportFormat::kJson;
  const std::string fmt_name =
      !a.format.empty() ? a.format : fs::path(a.output).extension() == ".csv" ? "csv" : "json";
  if (fmt_name == "csv") {
    format = ReportFormat::kCsv;
  } else if (fmt_name != "json") {
    throw ValidationError("format must be 'json' or 'csv'");
  }

  const auto preds = list_files(a.pred, ".npy");
  const auto gts = list_files(a.gt, ".npy");
  std::set<std::string> pred_stems, gt_stems;
  for (const auto& p : preds) pred_stems.insert(stem_of(p, ".npy"));
  for (const auto& g : gts) gt_stems.insert(stem_of(g, ".npy"));
  std::vector<FileResult> unpaired;
  for (const auto& s : pred_stems) {
    if (!gt_stems.contains(s)) {
      unpaired.push_back({{}, "validation", "prediction has no ground truth", s});
    }
  }
  for (const auto& s : gt_stems) {
    if (!pred_stems.contains(s)) {
      unpaired.push_back({{}, "validation", "ground truth has no prediction", s});
    }
  }
  if (!unpaired.empty()) return report(unpaired);

  const std::vector<std::string> stems(pred_stems.begin(), pred_stems.end());
  std::vector<Evaluation> partial(stems.size(), Evaluation(options));
  auto body = [&](std::size_t i) {
    const fs::path p(a.pred), g(a.gt);
    const InstanceSet pi = read_instances(p / (stems[i] + ".npy"), p / (stems[i] + ".csv"));
    const InstanceSet gi = read_instances(g / (stems[i] + ".npy"), g / (stems[i] + ".csv"));
    partial[i].add_image(pi, gi, i);
    return fmt::format("eval {}: {} predictions, {} ground truths", stems[i], pi.size(),
                       gi.size());
  };
  const auto results =
      run_files(stems.size(), c.workers, body, [&](std::size_t i) { return stems[i]; });
  const int code = report(results, a.output.empty() ? std::cerr : std::cout);
  if (code != 0) return code;

  Evaluation total(options);
  for (const auto& e : partial) total.merge(e);
  const MetricsReport rep = total.report();
  if (a.output.empty()) {
    std::cout << format_report(rep, format);
  } else {
    write_report(rep, a.output, format);
    std::cout << "report " << a.output << "\n";
  }
  return 0;
}

int cmd_split(const SplitArgs& a, const Common&) {
  if (a.fractions.size() != 3) throw ValidationError("fractions needs three values");
  const SplitFractions fractions{a.fractions[0], a.fractions[1], a.fractions[2]};
  const auto buildings = read_buildings(a.input);
  if (buildings.empty()) throw ValidationError("no buildings in " + a.input);
  const Grid grid = build_grid(footprint_extent(buildings), a.cell_size);
  GridSplit split =
      partition_cells(grid, cell_class_counts(buildings, grid), fractions, a.priority);
  leakage_masks(buildings, split);

  ensure_directory(a.output);
  const fs::path out(a.output);
  write_text_file(out / "split.json", split_to_json(split).dump(2) + "\n");
  write_text_file(out / "class_counts.csv", class_counts_csv(split));
  for (auto set : kSplitSets) {
    write_geojson(mask_polygons(split, set), out / fmt::format("mask_{}.geojson", set_name(set)));
  }
  std::cout << fmt::format("split {}: {} buildings, {} cells, {} mask pieces\n", a.input,
                           buildings.size(), grid.cell_count(), split.masks.size());
  return 0;
}

FeatureMap read_feature_map(const fs::path& path) {
  const NpyArray arr = read_array(path);
  if (arr.dtype != DType::kFloat32 || arr.shape.size() != 3) {
    throw ValidationError(path.string() + ": features must be float32 with shape (h, w, c)");
  }
  FeatureMap f(static_cast<int>(arr.shape[0]), static_cast<int>(arr.shape[1]),
               static_cast<int>(arr.shape[2]));
  f.values = arr.values<float>();
  f.validate();
  return f;
}

int cmd_probe(const ProbeArgs& a, const Common& c) {
  const PoolMode mode = parse_pool_mode(a.pool);
  if (a.folds < 2) throw ValidationError("folds must be >= 2");
  const auto rows = read_csv(a.labels);
  std::vector<std::string> stems;
  std::vector<int> y;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() < 2) throw FormatError(fmt::format("{}: malformed row {}", a.labels, i + 1));
    stems.push_back(rows[i][0]);
    try {
      y.push_back(std::stoi(rows[i][1]));
    } catch (const std::exception&) {
      throw FormatError(fmt::format("{}: malformed class in row {}", a.labels, i + 1));
    }
  }
  if (stems.empty()) throw ValidationError("no labelled samples in " + a.labels);

  Eigen::MatrixXd X;
  if (fs::is_regular_file(a.features)) {
    const auto arr = read_array(a.features);
    if (arr.dtype != DType::kFloat32 || arr.shape.size() != 2) {
      throw ValidationError(a.features + ": pooled features must be float32 (N, C)");
    }
    if (arr.shape[0] != stems.size()) {
      throw ValidationError(fmt::format("{}: {} rows but {} labels", a.features, arr.shape[0],
                                        stems.size()));
    }
    const auto v = arr.values<float>();
    X = Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            v.data(), static_cast<Eigen::Index>(arr.shape[0]),
            static_cast<Eigen::Index>(arr.shape[1]))
            .cast<double>();
  } else {
    if (mode != PoolMode::kNoMask && a.masks.empty()) {
      throw ValidationError("--masks is required unless --pool no-mask");
    }
    std::vector<Eigen::VectorXd> pooled(stems.size());
    auto body = [&](std::size_t i) {
      const FeatureMap f = read_feature_map(fs::path(a.features) / (stems[i] + ".npy"));
      Mask mask;
      if (mode != PoolMode::kNoMask) {
        mask = to_array2d<std::uint8_t>(read_array(fs::path(a.masks) / (stems[i] + ".npy")));
      }
      pooled[i] = pool_features(f, mask, mode);
      return std::string();
    };
    const int code = report(run_files(stems.size(), c.workers, body,
                                      [&](std::size_t i) { return stems[i]; }));
    if (code != 0) return code;

    const Eigen::Index d = pooled[0].size();
    X.resize(static_cast<Eigen::Index>(stems.size()), d);
    for (std::size_t i = 0; i < stems.size(); ++i) {
      if (pooled[i].size() != d) throw ValidationError("feature maps have different channel counts");
      X.row(static_cast<Eigen::Index>(i)) = pooled[i].transpose();
    }
  }

  CvOptions cv;
  cv.folds = a.folds;
  cv.seed = c.seed;
  cv.lambdas = a.lambdas;
  cv.ks = a.ks;
  cv.workers = c.workers;
  const CvResult result = cross_validate(X, y, cv);

  ensure_directory(a.output);
  const fs::path out(a.output);
  nlohmann::json cv_json = result.to_json();
  cv_json["pool"] = pool_mode_name(mode);
  cv_json["samples"] = stems.size();
  write_text_file(out / "cv.json", cv_json.dump(2) + "\n");

  const ConfigScore* best_logreg = nullptr;
  for (const auto& s : result.scores) {
    if (s.config.kind != ProbeConfig::Kind::kLogReg || std::isnan(s.mean_f1)) continue;
    if (!best_logreg || s.mean_f1 > best_logreg->mean_f1) best_logreg = &s;
  }
  if (best_logreg) {
    FitOptions fit;
    fit.lambda = best_logreg->config.lambda;
    write_text_file(out / "model.json", fit_logreg(X, y, fit).to_json().dump() + "\n");
  }
  std::cout << fmt::format("probe {}: {} samples, best {} (macro F1 {:.6f})\n", a.labels,
                           stems.size(), result.best_score().config.label(),
                           result.best_score().mean_f1);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Roof segmentation pipeline tools"};
  app.require_subcommand(1);
  app.fallthrough();
  Common common;
  app.add_option("--config", common.config, "JSON config file; flags override its values");
  app.add_option("--workers", common.workers, "Files processed in parallel")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", common.seed, "Random seed");

  ConfigBinder binder;

  TargetsArgs ta;
  auto* targets = app.add_subcommand("targets", "Gap-enforced labels, weight maps, ordinal levels");
  binder.add(targets, "--input", ta.input, "Directory of instance-id .npy files");
  binder.add(targets, "--output", ta.output, "Output directory");
  binder.add(targets, "--n-gap", ta.n_gap, "Minimum gap between instances in pixels");
  binder.add(targets, "--n-lev", ta.n_lev, "Number of ordinal levels");
  binder.add(targets, "--n-pix", ta.n_pix, "Pixels between ordinal levels");
  binder.add(targets, "--w0", ta.w0, "Boundary weight amplitude");
  binder.add(targets, "--sigma", ta.sigma, "Boundary weight width");
  binder.add(targets, "--weight-mode", ta.weight_mode, "additive (1 + w) or literal (w)");

  InstancesArgs ia;
  auto* instances = app.add_subcommand("instances", "Watershed instances from level stacks");
  binder.add(instances, "--input", ia.input, "Directory of <stem>_levels.npy stacks");
  binder.add(instances, "--output", ia.output, "Output directory");
  binder.add(instances, "--threshold", ia.threshold, "Level probability threshold");
  binder.add(instances, "--interior-threshold", ia.interior_threshold,
             "Interior foreground threshold");
  binder.add(instances, "--connectivity", ia.connectivity, "4 or 8");
  binder.add(instances, "--georef", ia.georef, "GeoTransform JSON applied to polygons");

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Pixel and object metrics over paired directories");
  binder.add(eval, "--pred", ea.pred, "Prediction directory");
  binder.add(eval, "--gt", ea.gt, "Ground-truth directory");
  binder.add(eval, "--output", ea.output, "Report file (stdout if omitted)");
  binder.add(eval, "--format", ea.format, "json or csv (default: from the output extension)");
  binder.add(eval, "--mode", ea.mode, "binary or multiclass");
  binder.add(eval, "--interpolation", ea.interpolation, "all-points or coco101");
  binder.add(eval, "--main-classes", ea.main_classes, "Classes of mIoU3 / mAP3");
  binder.add(eval, "--all-classes", ea.all_classes, "Classes of mIoU5 / mAP5");

  SplitArgs sa;
  auto* split = app.add_subcommand("split", "Stratified grid split of building footprints");
  binder.add(split, "--input", sa.input, "Buildings GeoJSON");
  binder.add(split, "--output", sa.output, "Output directory");
  binder.add(split, "--cell-size", sa.cell_size, "Grid cell size in map units");
  binder.add(split, "--fractions", sa.fractions, "Train, val and test fractions")
      ->expected(3);
  binder.add(split, "--priority", sa.priority, "Class priority, rarest first");

  ProbeArgs pa;
  auto* probe = app.add_subcommand("probe", "Masked-pooling linear probe with cross-validation");
  binder.add(probe, "--features", pa.features, "Directory of <stem>.npy feature maps (h, w, c), or one pooled (n, c) .npy");
  binder.add(probe, "--masks", pa.masks, "Directory of <stem>.npy building masks");
  binder.add(probe, "--labels", pa.labels, "CSV of stem,class");
  binder.add(probe, "--output", pa.output, "Output directory");
  binder.add(probe, "--pool", pa.pool, "upsample, no-mask or downsample-mask");
  binder.add(probe, "--folds", pa.folds, "Cross-validation folds");
  binder.add(probe, "--lambdas", pa.lambdas, "L2 strengths to try");
  binder.add(probe, "--ks", pa.ks, "Neighbour counts to try");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << error_json("validation", e.what()) << "\n";
    return 2;
  }

  try {
    nlohmann::json config = nlohmann::json::object();
    if (!common.config.empty()) {
      config = read_json_file(common.config);
      if (!config.is_object()) throw FormatError(common.config + ": config must be an object");
      const CLI::App* chosen = app.get_subcommands().front();
      if (config.contains("workers") && app.get_option("--workers")->count() == 0) {
        common.workers = config["workers"].get<int>();
      }
      if (config.contains("seed") && app.get_option("--seed")->count() == 0) {
        common.seed = config["seed"].get<std::uint64_t>();
      }
      const std::string name = chosen->get_name();
      binder.apply(config, chosen);
      if (config.contains(name) && config[name].is_object()) {
        binder.apply(config[name], chosen);
      }
    }
    if (common.workers < 1) throw ValidationError("workers must be >= 1");

    auto require = [](const std::string& value, const char* flag) {
      if (value.empty()) throw ValidationError(std::string(flag) + " is required");
    };
    if (targets->parsed()) {
      require(ta.input, "--input");
      require(ta.output, "--output");
      return cmd_targets(ta, common);
    }
    if (instances->parsed()) {
      require(ia.input, "--input");
      require(ia.output, "--output");
      return cmd_instances(ia, common);
    }
    if (eval->parsed()) {
      require(ea.pred, "--pred");
      require(ea.gt, "--gt");
      return cmd_eval(ea, common);
    }
    if (split->parsed()) {
      require(sa.input, "--input");
      require(sa.output, "--output");
      return cmd_split(sa, common);
    }
    require(pa.features, "--features");
    require(pa.labels, "--labels");
    require(pa.output, "--output");
    return cmd_probe(pa, common);
  } catch (const Error& e) {
    std::cerr << error_json(e.kind(), e.what()) << "\n";
    return exit_code_for(e.kind());
  } catch (const nlohmann::json::exception& e) {
    std::cerr << error_json("format", e.what()) << "\n";
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << error_json("io", e.what()) << "\n";
    return 3;
  }
}
