#include <algorithm>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "cli.hpp"
#include "lfrect/io.hpp"
#include "support.hpp"

namespace lfrect {
namespace {

using nlohmann::json;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("lfrect_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "lfrect");
    err_.str("");
    return cli::run(args, err_);
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  json read_json(const std::string& name) const { return json::parse(read_text_file(dir_ / name)); }

  fs::path dir_;
  std::ostringstream err_;
};

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(run({}), cli::kConfigError);
  EXPECT_EQ(run({"frobnicate"}), cli::kConfigError);
  EXPECT_EQ(run({"bench", "spec.json"}), cli::kConfigError);  // --out missing
  EXPECT_EQ(run({"bench", "spec.json", "--out", "x", "--jobs", "0"}), cli::kConfigError);
  EXPECT_EQ(run({"--help"}), cli::kOk);
}

TEST_F(CliTest, MalformedConfigExitsTwoWithPosition) {
  write_text_file(dir_ / "bad.json", "{\n  \"sigma_px\": 0.1,\n  oops\n}\n");
  EXPECT_EQ(run({"simulate", path("bad.json"), "--out", path("o")}), cli::kConfigError);
  EXPECT_NE(err_.str().find("bad.json:3:"), std::string::npos) << err_.str();
  EXPECT_EQ(run({"simulate", path("missing.json"), "--out", path("o")}), cli::kConfigError);
}

TEST_F(CliTest, GenerationFailureExitsThree) {
  write_text_file(dir_ / "cfg.json",
                  R"({"board_poses": [{"euler_xyz_deg": [0, 0, 0], "center_mm": [0, 0, -400]}]})");
  EXPECT_EQ(run({"simulate", path("cfg.json"), "--out", path("o")}), cli::kGenerationError);
}

TEST_F(CliTest, SimulateThenEstimateRecoversTruth) {
  write_text_file(dir_ / "cfg.json",
                  R"({"pose": {"euler_xyz_deg": [5, 30, 5], "T": [100, 0, 0]}, "sigma_px": 0})");
  ASSERT_EQ(run({"simulate", path("cfg.json"), "--out", path("sim")}), cli::kOk) << err_.str();
  const std::string csv = read_text_file(dir_ / "sim" / "correspondences.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 7 * 11 * 3);
  ASSERT_EQ(run({"estimate", path("sim/correspondences.csv"), path("sim/intrinsics.json"), "--out",
                 path("pose.json")}),
            cli::kOk)
      << err_.str();
  const RelativePose est = load_pose(dir_ / "pose.json");
  const RelativePose truth = load_pose(dir_ / "sim" / "pose.json");
  EXPECT_LE(angular_error_rotation(truth.rotation, est.rotation), 1e-6);
  EXPECT_LE(angular_error_translation(truth.translation, est.translation), 1e-6);
  const json j = read_json("pose.json");
  EXPECT_EQ(j.at("singular_values").size(), 13u);
  EXPECT_FALSE(j.at("degeneracy").at("coplanar").get<bool>());
}

TEST_F(CliTest, RefinementNeverRaisesCost) {
  write_text_file(dir_ / "cfg.json", R"({"sigma_px": 0.3, "seed": 7})");
  ASSERT_EQ(run({"simulate", path("cfg.json"), "--out", path("sim")}), cli::kOk);
  ASSERT_EQ(run({"estimate", path("sim/correspondences.csv"), path("sim/intrinsics.json"),
                 "--no-refine", "--out", path("lin.json")}),
            cli::kOk);
  ASSERT_EQ(run({"estimate", path("sim/correspondences.csv"), path("sim/intrinsics.json"), "--out",
                 path("ref.json")}),
            cli::kOk);
  const double lin = read_json("lin.json").at("refinement").at("final_cost_px2").get<double>();
  const double ref = read_json("ref.json").at("refinement").at("final_cost_px2").get<double>();
  EXPECT_LE(ref, lin);
  EXPECT_EQ(read_json("lin.json").at("refinement").at("trace").size(), 0u);
}

TEST_F(CliTest, TrialReportHasSummary) {
  write_text_file(dir_ / "cfg.json", R"({"sigma_px": 0.1, "trials": 5})");
  ASSERT_EQ(run({"simulate", path("cfg.json"), "--report", "--out", path("sim")}), cli::kOk);
  const std::string csv = read_text_file(dir_ / "sim" / "trials.csv");
  EXPECT_NE(csv.find("\nmean,"), std::string::npos);
}

TEST_F(CliTest, CoplanarInputExitsFour) {
  std::mt19937_64 rng(3);
  std::vector<Vec3> pts;
  std::uniform_real_distribution<double> u(-200.0, 200.0);
  for (int i = 0; i < 30; ++i) pts.push_back(Vec3(u(rng), u(rng), 1000.0));
  const RelativePose pose{rotation_from_euler_xyz_deg(5, 15, 5), Vec3(50, 0, 0)};
  save_correspondences(dir_ / "c.csv", test::exact_set(pts, pose));
  save_intrinsics(dir_ / "k.json", {table1_camera1(), table1_camera2()});
  EXPECT_EQ(run({"estimate", path("c.csv"), path("k.json"), "--out", path("p.json")}),
            cli::kCoplanar);
  EXPECT_NE(err_.str().find("plane"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir_ / "p.json"));
}

TEST_F(CliTest, RectifyNoOverlapExitsFive) {
  save_sampled_lf(dir_ / "l", make_sampled_lf(table1_camera1().scaled(0.05), 3, 8, 6));
  RectifiedSetup s;
  s.t_r = Vec3(0, 100, 0);
  s.baseline = 100;
  save_setup(dir_ / "setup.json", s);
  EXPECT_EQ(run({"rectify", path("l"), path("l"), "--setup", path("setup.json"), "--out",
                 path("r")}),
            cli::kNoOverlap);
  EXPECT_NE(err_.str().find("hull"), std::string::npos);
}

TEST_F(CliTest, IdentityPoseCopiesLeftLightField) {
  SampledLF lf = make_sampled_lf(table1_camera1().scaled(0.05), 3, 8, 6);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Image& img : lf.images) {
    for (double& v : img.data) v = u(rng);
  }
  save_sampled_lf(dir_ / "l", lf);
  save_pose(dir_ / "id.json", RelativePose::identity());
  ASSERT_EQ(run({"rectify", path("id.json"), path("l"), path("l"), "--out", path("r")}), cli::kOk)
      << err_.str();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      EXPECT_EQ(read_text_file(dir_ / "r" / "lf" / sai_name(r, c, ".pgm")),
                read_text_file(dir_ / "l" / sai_name(r, c, ".pgm")));
    }
  }
  EXPECT_TRUE(fs::exists(dir_ / "r" / "grid.json"));
  EXPECT_TRUE(fs::exists(dir_ / "r" / "setup.json"));
}

TEST_F(CliTest, RenderedSceneRectifiesAndExportsEpi) {
  write_text_file(dir_ / "cfg.json", R"({"pose": {"euler_xyz_deg": [5, 20, 5], "T": [80, 5, 5]}})");
  ASSERT_EQ(run({"simulate", path("cfg.json"), "--render-lf", "--out", path("sim")}), cli::kOk)
      << err_.str();
  ASSERT_EQ(run({"rectify", path("sim/pose.json"), path("sim/left_lf"), path("sim/right_lf"),
                 "--scene", path("sim/scene.json"), "--jobs", "2", "--out", path("rect")}),
            cli::kOk)
      << err_.str();
  const json rep = read_json("rect/scanline.json");
  EXPECT_LE(rep.at("max_vertical_spread_px").get<double>(), 0.1);
  EXPECT_GT(rep.at("rows_checked").get<int>(), 0);
  EXPECT_GT(read_json("rect/grid.json").at("mixed_rows").get<int>(), 0);

  ASSERT_EQ(run({"epi", path("rect/lf"), "--line", "40", "--out", path("epi.pgm")}), cli::kOk);
  const Image epi = read_pgm16(dir_ / "epi.pgm");
  EXPECT_EQ(epi.height, load_sampled_lf(dir_ / "rect" / "lf").cols());
  EXPECT_TRUE(fs::exists(dir_ / "epi.pbm"));
  EXPECT_EQ(run({"epi", path("rect/lf"), "--line", "100000", "--out", path("e2.pgm")}),
            cli::kConfigError);
}

TEST_F(CliTest, BenchIsByteIdenticalAcrossRunsAndJobs) {
  write_text_file(dir_ / "spec.json", R"({"scenario": "table3", "trials": 4})");
  ASSERT_EQ(run({"bench", path("spec.json"), "--out", path("a.csv")}), cli::kOk);
  ASSERT_EQ(run({"bench", path("spec.json"), "--out", path("b.csv")}), cli::kOk);
  ASSERT_EQ(run({"bench", path("spec.json"), "--jobs", "3", "--out", path("c.csv")}), cli::kOk);
  const std::string a = read_text_file(dir_ / "a.csv");
  EXPECT_EQ(a, read_text_file(dir_ / "b.csv"));
  EXPECT_EQ(a, read_text_file(dir_ / "c.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "a.dat"));
  ASSERT_EQ(run({"bench", path("spec.json"), "--seed", "2", "--out", path("d.csv")}), cli::kOk);
  EXPECT_NE(a, read_text_file(dir_ / "d.csv"));
}

}  // namespace
}  // namespace lfrect
