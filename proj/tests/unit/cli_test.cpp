#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "sinr/experiment.hpp"
#include "sinr/io.hpp"
#include "sinr/model.hpp"

namespace sinr {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class CliTest : public ::testing::Test {
 protected:
  fs::path dir = fs::temp_directory_path() /
                 ("sinr_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
  void SetUp() override { fs::create_directories(dir); }
  void TearDown() override { fs::remove_all(dir); }

  int run(const std::string& args) {
    const std::string cmd = std::string(SINR_CLI) + " " + args + " > " + (dir / "stdout.txt").string() +
                            " 2> " + (dir / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  static json read_json(const fs::path& path) {
    std::ifstream in(path);
    return json::parse(in);
  }

  std::string read_text(const fs::path& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }
};

const std::string kImage = SINR_DATA_DIR "/rgb96.png";
const std::string kSmall = "--k 6 --hidden 8 --layers 2 --steps 6 --log-interval 2";

TEST_F(CliTest, DenoiseWritesReloadableArtifacts) {
  const fs::path out = dir / "run";
  ASSERT_EQ(run("denoise --input " + kImage + " --sigma 0.15 --seed 7 " + kSmall + " --out " + out.string()), 0)
      << read_text(dir / "stderr.txt");
  const json report = read_json(out / "report.json");
  EXPECT_TRUE(report["metrics"].contains("psnr"));
  EXPECT_TRUE(report["observed_metrics"].contains("psnr"));
  EXPECT_EQ(report["loss_curve"].size(), 3u);
  EXPECT_EQ(report["config"]["sigma"], 0.15);
  EXPECT_EQ(report["config"]["seed"], 7);
  EXPECT_TRUE(report.contains("seconds"));

  const PointSet recovered = load_png(out / "recovered.png");
  EXPECT_EQ(recovered.grid, (GridShape{96, 96}));
  EXPECT_EQ(load_png(out / "observed.png").size(), 96u * 96u);
  EXPECT_EQ(load_png(out / "panel.png").value_dim(), 3u);
  const SInrModel model = load_checkpoint(out / "model.sinr");
  EXPECT_EQ(model.superpixel_count(), 6u);
  EXPECT_EQ(read_label_map(out / "labels.txt").labels.size(), 96u * 96u);

  const fs::path eval_out = dir / "eval";
  ASSERT_EQ(run("evaluate --truth " + kImage + " --checkpoint " + (out / "model.sinr").string() +
                " --labels " + (out / "labels.txt").string() + " --out " + eval_out.string()),
            0)
      << read_text(dir / "stderr.txt");
  EXPECT_TRUE(read_json(eval_out / "evaluate.json")["metrics"].contains("psnr"));
  ASSERT_EQ(run("evaluate --truth " + kImage + " --pred " + (out / "recovered.png").string() +
                " --out " + eval_out.string()),
            0);
}

TEST_F(CliTest, SegmentBundledImageGivesRequestedLabels) {
  ASSERT_EQ(run("segment --input " + kImage + " --k 25 --alpha 20 --out " + dir.string()), 0);
  const LabelMap map = read_label_map(dir / "labels.txt");
  EXPECT_EQ(map.k, 25u);
  EXPECT_EQ(std::set<std::uint32_t>(map.labels.begin(), map.labels.end()).size(), 25u);
  EXPECT_EQ(read_json(dir / "segment.json")["distinct_labels"], 25);
  EXPECT_TRUE(fs::exists(dir / "segments.png"));
}

TEST_F(CliTest, AblateWithoutComponentsRunsBaselines) {
  ASSERT_EQ(run("ablate --input " + kImage + " --no-dictionary --no-attention " + kSmall +
                " --out " + dir.string()),
            0)
      << read_text(dir / "stderr.txt");
  const json table = read_json(dir / "ablation.json");
  ASSERT_EQ(table["rows"].size(), 2u);
  EXPECT_EQ(table["rows"][0]["variant"], "pixel-inr");
  EXPECT_EQ(table["rows"][0]["k"], 1);
  EXPECT_EQ(table["rows"][1]["variant"], "superpixel-inr");
  EXPECT_EQ(table["rows"][1]["k"], 6);
  EXPECT_TRUE(fs::exists(dir / "pixel-inr" / "report.json"));
}

TEST_F(CliTest, ConfigFileIsOverriddenByFlags) {
  {
    std::ofstream cfg(dir / "cfg.json");
    cfg << R"({"k": 7, "hidden": 8, "layers": 2, "steps": 4, "lr": 0.002, "seed": 3})";
  }
  ASSERT_EQ(run("reconstruct --config " + (dir / "cfg.json").string() + " --input " + kImage +
                " --k 5 --log-interval 1 --out " + (dir / "out").string()),
            0)
      << read_text(dir / "stderr.txt");
  const json report = read_json(dir / "out" / "report.json");
  EXPECT_EQ(report["config"]["k"], 5);
  EXPECT_EQ(report["config"]["lr"], 0.002);
  EXPECT_EQ(report["config"]["seed"], 3);
  EXPECT_EQ(report["loss_curve"].size(), 4u);
}

TEST_F(CliTest, ErrorsAreMachineReadable) {
  EXPECT_NE(run("denoise --input " + (dir / "missing.png").string() + " --out " + dir.string()), 0);
  const json err = json::parse(read_text(dir / "stderr.txt"));
  EXPECT_EQ(err["error"]["kind"], "io");

  {
    std::ofstream cfg(dir / "cfg.json");
    cfg << R"({"bogus": 1})";
  }
  EXPECT_NE(run("denoise --config " + (dir / "cfg.json").string() + " --input " + kImage +
                " --out " + dir.string()), 0);
  EXPECT_EQ(json::parse(read_text(dir / "stderr.txt"))["error"]["kind"], "invalid_argument");

  EXPECT_NE(run("segment --input " + kImage + " --k 100000 --out " + dir.string()), 0);
  EXPECT_EQ(json::parse(read_text(dir / "stderr.txt"))["error"]["kind"], "invalid_argument");
}

TEST_F(CliTest, CompletionOnPointCloud) {
  ASSERT_EQ(run("complete --input " SINR_DATA_DIR "/surface2k.csv --rate 0.3 --k 5 --hidden 8 "
                "--layers 2 --steps 3 --out " + dir.string()),
            0)
      << read_text(dir / "stderr.txt");
  const json report = read_json(dir / "report.json");
  EXPECT_EQ(report["task"], "complete");
  EXPECT_TRUE(report["metrics"].contains("r_square"));
  EXPECT_EQ(load_point_csv(dir / "recovered.csv").size(), 2000u);
}

TEST_F(CliTest, SameSeedSameLossCurveAcrossThreadCounts) {
  const std::string base = "denoise --input " + kImage + " --seed 11 " + kSmall;
  ASSERT_EQ(run(base + " --threads 1 --out " + (dir / "a").string()), 0);
  ASSERT_EQ(run(base + " --threads 4 --out " + (dir / "b").string()), 0);
  EXPECT_EQ(read_json(dir / "a" / "report.json")["loss_curve"].dump(),
            read_json(dir / "b" / "report.json")["loss_curve"].dump());
}

TEST(ExperimentConfig, JsonRoundTrip) {
  ExperimentConfig cfg;
  cfg.k = 15;
  cfg.dict_factor = 3;
  cfg.no_attention = true;
  ExperimentConfig back;
  apply_json(back, to_json(cfg));
  EXPECT_EQ(to_json(back), to_json(cfg));
}

TEST(Ablation, PixelRowMatchesParameterBudget) {
  TrainConfig base;
  base.superpixels = 25;
  const auto rows = ablation_variants(false, false);
  ASSERT_EQ(rows.size(), 5u);
  const TrainConfig pixel = ablation_config(base, rows[0], 2, 3);
  const TrainConfig superpixel = ablation_config(base, rows[1], 2, 3);
  EXPECT_EQ(pixel.superpixels, 1u);
  const double a = static_cast<double>(parameter_count(pixel.arch, 1, 2, 3));
  const double b = static_cast<double>(parameter_count(superpixel.arch, 25, 2, 3));
  EXPECT_LT(std::abs(a - b) / b, 0.02);
  EXPECT_EQ(ablation_variants(true, true).size(), 2u);
  EXPECT_EQ(ablation_variants(false, true).size(), 3u);
}

}  // namespace
}  // namespace sinr
