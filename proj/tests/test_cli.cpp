#include <gtest/gtest.h>
#include <sys/wait.h>

#include <array>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "roofkit/distance.hpp"
#include "roofkit/labels.hpp"
#include "roofkit/npy.hpp"

using namespace roofkit;
namespace fs = std::filesystem;

namespace {

void save(const NpyArray& a, const fs::path& p) {
  fs::create_directories(p.parent_path());
  write_array(a, p);
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("roofkit_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override {
    if (!HasFailure()) fs::remove_all(dir_);
  }

  fs::path at(const std::string& rel) const { return dir_ / rel; }

  int run(const std::string& args) {
    const std::string cmd = std::string("\"") + ROOFKIT_CLI_PATH + "\" " + args + " >\"" +
                            at("stdout.txt").string() + "\" 2>\"" + at("stderr.txt").string() +
                            "\"";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string slurp(const fs::path& p) const {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  void write_text(const fs::path& p, const std::string& text) const {
    fs::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << text;
  }

  nlohmann::json last_error() const {
    std::istringstream lines(slurp(dir_ / "stderr.txt"));
    std::string line;
    std::getline(lines, line);
    return nlohmann::json::parse(line);
  }

  fs::path dir_;
};

LabelImage touching_squares() {
  LabelImage ids(25, 46);
  for (int r = 0; r < 21; ++r) {
    for (int c = 0; c < 42; ++c) ids(r + 2, c + 2) = c < 21 ? 1 : 2;
  }
  return ids;
}

void expect_same_tree(const fs::path& a, const fs::path& b) {
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), a));
  }
  ASSERT_FALSE(files.empty());
  for (const auto& rel : files) {
    std::ifstream x(a / rel, std::ios::binary), y(b / rel, std::ios::binary);
    ASSERT_TRUE(y.good()) << rel;
    std::stringstream sx, sy;
    sx << x.rdbuf();
    sy << y.rdbuf();
    EXPECT_EQ(sx.str(), sy.str()) << rel;
  }
}

}  // namespace

TEST_F(Cli, TargetsEmptyDirectoryWritesNothing) {
  fs::create_directories(at("in"));
  EXPECT_EQ(run(fmt::format("targets --input {} --output {}", at("in").string(), at("out").string())), 0);
  EXPECT_TRUE(!fs::exists(at("out")) || fs::is_empty(at("out")));
}

TEST_F(Cli, TargetsSingleFile) {
  fs::create_directories(at("in"));
  save(to_npy(touching_squares()), at("in/tile.npy"));
  ASSERT_EQ(run(fmt::format("targets --input {} --output {} --n-lev 3 --n-pix 3",
                            at("in").string(), at("out").string())),
            0);
  const auto gap = to_label_image(read_array(at("out/tile_gap.npy")));
  EXPECT_GE(oracle::min_interinstance_sq(gap), 49);
  const auto levels = to_mask_stack(read_array(at("out/tile_levels.npy")));
  ASSERT_EQ(levels.size(), 3u);
  EXPECT_TRUE(is_nested(levels));
  EXPECT_EQ(read_array(at("out/tile_weights.npy")).shape, (std::vector<std::size_t>{25, 46}));
}

TEST_F(Cli, TargetsRejectsZeroSpacing) {
  fs::create_directories(at("in"));
  save(to_npy(touching_squares()), at("in/tile.npy"));
  EXPECT_EQ(run(fmt::format("targets --input {} --output {} --n-pix 0", at("in").string(),
                            at("out").string())),
            2);
  EXPECT_TRUE(last_error().contains("error"));
}

TEST_F(Cli, InstancesSplitTouchingSquares) {
  fs::create_directories(at("in"));
  save(to_npy(touching_squares()), at("in/tile.npy"));
  ASSERT_EQ(run(fmt::format("targets --input {} --output {} --n-gap 0 --n-lev 2 --n-pix 10",
                            at("in").string(), at("t").string())),
            0);
  ASSERT_EQ(run(fmt::format("instances --input {} --output {}", at("t").string(),
                            at("inst").string())),
            0);
  const std::string csv = slurp(at("inst/tile.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  const auto ids = to_label_image(read_array(at("inst/tile.npy")));
  EXPECT_EQ(ids, touching_squares());
}

TEST_F(Cli, InstancesRejectNonNestedStack) {
  const std::vector<std::uint8_t> v = {0, 0, 0, 0, 0, 0, 0, 1};
  save(NpyArray::from_values<std::uint8_t>({2, 2, 2}, v), at("in/x_levels.npy"));
  EXPECT_EQ(run(fmt::format("instances --input {} --output {}", at("in").string(),
                            at("out").string())),
            2);
  EXPECT_EQ(last_error()["file"], at("in/x_levels.npy").string());
}

TEST_F(Cli, EvalIdenticalInputsScoreOne) {
  const LabelImage ids = oracle::paint_boxes(32, 32, {{1, 1, 10, 10}, {15, 15, 30, 28}});
  for (const char* side : {"pred", "gt"}) {
    fs::create_directories(at(side));
    save(to_npy(ids), at(std::string(side) + "/a.npy"));
  }
  ASSERT_EQ(run(fmt::format("eval --pred {} --gt {}", at("pred").string(), at("gt").string())), 0);
  const auto j = nlohmann::json::parse(slurp(at("stdout.txt")));
  EXPECT_EQ(j["iou"], 1.0);
  EXPECT_EQ(j["ap50"], 1.0);
  EXPECT_EQ(j["ap50_95"], 1.0);
  EXPECT_EQ(j["tps"], 2);
}

TEST_F(Cli, EvalRejectsShapeMismatch) {
  fs::create_directories(at("pred"));
  fs::create_directories(at("gt"));
  save(to_npy(LabelImage(4, 4)), at("pred/a.npy"));
  save(to_npy(LabelImage(5, 5)), at("gt/a.npy"));
  EXPECT_EQ(run(fmt::format("eval --pred {} --gt {}", at("pred").string(), at("gt").string())), 2);
}

TEST_F(Cli, EvalRejectsUnpairedStem) {
  fs::create_directories(at("pred"));
  fs::create_directories(at("gt"));
  save(to_npy(LabelImage(4, 4)), at("pred/a.npy"));
  save(to_npy(LabelImage(4, 4)), at("gt/b.npy"));
  EXPECT_EQ(run(fmt::format("eval --pred {} --gt {}", at("pred").string(), at("gt").string())), 2);
}

TEST_F(Cli, EvalMatchesGoldenReport) {
  const fs::path data = fs::path(ROOFKIT_TEST_DATA) / "eval";
  ASSERT_EQ(run(fmt::format("eval --pred {} --gt {} --output {}", (data / "pred").string(),
                            (data / "gt").string(), at("report.json").string())),
            0);
  EXPECT_EQ(slurp(at("report.json")), slurp(data / "expected_report.json"));
}

TEST_F(Cli, SplitWritesAllOutputs) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> pos(0, 1200);
  nlohmann::json fc = {{"type", "FeatureCollection"}, {"features", nlohmann::json::array()}};
  for (int i = 0; i < 300; ++i) {
    const double x = pos(rng), y = pos(rng);
    fc["features"].push_back(
        {{"type", "Feature"},
         {"properties", {{"id", std::to_string(i)}, {"class", 1 + i % 5}}},
         {"geometry",
          {{"type", "Polygon"},
           {"coordinates", {{{x, y}, {x + 12, y}, {x + 12, y + 9}, {x, y + 9}, {x, y}}}}}}});
  }
  write_text(at("b.geojson"), fc.dump());
  ASSERT_EQ(run(fmt::format("split --input {} --output {}", at("b.geojson").string(),
                            at("out").string())),
            0);
  for (const char* f : {"split.json", "class_counts.csv", "mask_train.geojson",
                        "mask_val.geojson", "mask_test.geojson"}) {
    EXPECT_TRUE(fs::exists(at("out") / f)) << f;
  }
  const auto j = nlohmann::json::parse(slurp(at("out/split.json")));
  EXPECT_EQ(j["cells"].size(), 36u);
}

TEST_F(Cli, ConfigFileAndFlagPrecedence) {
  fs::create_directories(at("in"));
  save(to_npy(touching_squares()), at("in/tile.npy"));
  write_text(at("cfg.json"), R"({"targets": {"n_lev": 4, "n_pix": 2}})");
  ASSERT_EQ(run(fmt::format("--config {} targets --input {} --output {} --n-lev 2",
                            at("cfg.json").string(), at("in").string(), at("out").string())),
            0);
  EXPECT_EQ(read_array(at("out/tile_levels.npy")).shape[0], 2u);
}

TEST_F(Cli, OutputsIndependentOfWorkerCount) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> pos(0, 40), len(4, 14);
  for (int i = 0; i < 6; ++i) {
    std::vector<std::array<int, 4>> boxes;
    for (int k = 0; k < 6; ++k) {
      const int r = pos(rng), c = pos(rng);
      boxes.push_back({r, c, r + len(rng), c + len(rng)});
    }
    save(to_npy(oracle::paint_boxes(56, 56, boxes)), at(fmt::format("in/t{}.npy", i)));
  }
  std::normal_distribution<float> noise(0.0f, 1.0f);
  std::string labels = "stem,class\n";
  for (int i = 0; i < 24; ++i) {
    std::vector<float> feat(6 * 6 * 3);
    for (auto& v : feat) v = noise(rng) + static_cast<float>(i % 2);
    save(NpyArray::from_values<float>({6, 6, 3}, feat), at(fmt::format("feat/s{}.npy", i)));
    Mask m(12, 12);
    for (int r = 3; r < 9; ++r) {
      for (int c = 2; c < 7; ++c) m(r, c) = 1;
    }
    save(to_npy(m), at(fmt::format("mask/s{}.npy", i)));
    labels += fmt::format("s{},{}\n", i, i % 2);
  }
  write_text(at("labels.csv"), labels);

  for (int workers : {1, 4}) {
    const std::string w = fmt::format("--workers {}", workers);
    const fs::path o = at(fmt::format("w{}", workers));
    ASSERT_EQ(run(fmt::format("{} targets --input {} --output {}", w, at("in").string(),
                              (o / "t").string())),
              0);
    ASSERT_EQ(run(fmt::format("{} instances --input {} --output {}", w, (o / "t").string(),
                              (o / "inst").string())),
              0);
    fs::create_directories(o / "pred");
    fs::create_directories(o / "gtl");
    for (int i = 0; i < 6; ++i) {
      fs::copy_file(o / fmt::format("inst/t{}.npy", i), o / fmt::format("pred/t{}.npy", i));
      fs::copy_file(at(fmt::format("in/t{}.npy", i)), o / fmt::format("gtl/t{}.npy", i));
    }
    ASSERT_EQ(run(fmt::format("{} eval --pred {} --gt {} --output {}", w, (o / "pred").string(),
                              (o / "gtl").string(), (o / "report.json").string())),
              0);
    ASSERT_EQ(run(fmt::format("{} --seed 3 probe --features {} --masks {} --labels {} --output {} "
                              "--folds 4",
                              w, at("feat").string(), at("mask").string(),
                              at("labels.csv").string(), (o / "probe").string())),
              0);
  }
  expect_same_tree(at("w1"), at("w4"));
}

TEST_F(Cli, ProbeAcceptsPooledFeatures) {
  std::mt19937_64 rng(13);
  std::normal_distribution<float> noise(0.0f, 1.0f);
  std::string labels = "stem,class\n";
  std::vector<float> pooled;
  for (int i = 0; i < 20; ++i) {
    std::vector<float> feat(2 * 2 * 3);
    for (auto& v : feat) v = noise(rng) + 2.0f * static_cast<float>(i % 2);
    save(NpyArray::from_values<float>({2, 2, 3}, feat), at(fmt::format("feat/s{}.npy", i)));
    for (int k = 0; k < 3; ++k) {
      double sum = 0.0;
      for (int p = 0; p < 4; ++p) sum += feat[p * 3 + k];
      pooled.push_back(static_cast<float>(sum / 4.0));
    }
    labels += fmt::format("s{},{}\n", i, i % 2);
  }
  write_text(at("labels.csv"), labels);
  save(NpyArray::from_values<float>({20, 3}, pooled), at("pooled.npy"));
  ASSERT_EQ(run(fmt::format("probe --features {} --pool no-mask --labels {} --output {} --folds 4",
                            at("feat").string(), at("labels.csv").string(), at("a").string())),
            0);
  ASSERT_EQ(run(fmt::format("probe --features {} --labels {} --output {} --folds 4",
                            at("pooled.npy").string(), at("labels.csv").string(),
                            at("b").string())),
            0);
  const auto a = nlohmann::json::parse(slurp(at("a/cv.json")));
  const auto b = nlohmann::json::parse(slurp(at("b/cv.json")));
  EXPECT_EQ(a["best"], b["best"]);
  EXPECT_EQ(a["folds"], b["folds"]);
  EXPECT_NEAR(a["best_mean_f1"].get<double>(), b["best_mean_f1"].get<double>(), 1e-9);
  EXPECT_TRUE(fs::exists(at("b/model.json")));
  save(NpyArray::from_values<float>({2, 3}, std::vector<float>(6)), at("short.npy"));
  EXPECT_EQ(run(fmt::format("probe --features {} --labels {} --output {}",
                            at("short.npy").string(), at("labels.csv").string(),
                            at("c").string())),
            2);
}
