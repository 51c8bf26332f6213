#include <algorithm>

#include <gtest/gtest.h>

#include "lfrect/bench.hpp"
#include "lfrect/errors.hpp"

namespace lfrect {
namespace {

TEST(Presets, MatchStatedConfigurations) {
  EXPECT_EQ(preset_rotation("R1"), Vec3(5, 15, 5));
  EXPECT_EQ(preset_rotation("R2"), Vec3(5, 30, 5));
  EXPECT_EQ(preset_translation("T1"), Vec3(50, 0, 0));
  EXPECT_EQ(preset_translation("T2"), Vec3(100, 0, 0));
  EXPECT_EQ(table2_pose().euler_xyz_deg, Vec3(5, 20, 5));
  EXPECT_EQ(table2_pose().translation_mm, Vec3(80, 5, 5));
  const auto t3 = table3_poses();
  ASSERT_EQ(t3.size(), 4u);
  EXPECT_EQ(t3[1].name, "R1T2");
  EXPECT_EQ(t3[2].euler_xyz_deg, Vec3(5, 30, 5));
  EXPECT_THROW((void)preset_rotation("R3"), Error);
}

TEST(BenchSpec, Defaults) {
  const BenchSpec t2 = BenchSpec::table2();
  EXPECT_EQ(t2.sigma_list, (std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.5, 2.0, 3.0}));
  EXPECT_EQ(t2.trials, 100);
  const BenchSpec t3 = BenchSpec::table3();
  EXPECT_EQ(t3.sigma_list, std::vector<double>{0.3});
  EXPECT_EQ(t3.pose_list.size(), 4u);
}

TEST(BenchSpec, Parsing) {
  const BenchSpec s = parse_bench_spec(
      R"({"scenario": "custom", "sigma_list": [0.1, 0.2], "pose_list": ["R2T1",
          {"name": "mine", "euler_xyz_deg": [1, 2, 3], "translation_mm": [60, 0, 0]}],
          "trials": 7, "seed": 5})",
      "mem");
  EXPECT_EQ(s.scenario, BenchSpec::Scenario::kCustom);
  ASSERT_EQ(s.pose_list.size(), 2u);
  EXPECT_EQ(s.pose_list[0].euler_xyz_deg, Vec3(5, 30, 5));
  EXPECT_EQ(s.pose_list[1].name, "mine");
  EXPECT_EQ(s.trials, 7);
  EXPECT_EQ(s.seed, 5u);
  for (const char* bad : {"{", R"({"scenario": "table9"})", R"({"pose_list": ["R9T1"]})",
                          R"({"trials": 0})", R"({"sigma_list": "x"})"}) {
    EXPECT_THROW((void)parse_bench_spec(bad, "mem"), Error) << bad;
  }
}

TEST(RunBench, RowSetsAndCsv) {
  BenchSpec t2 = BenchSpec::table2();
  t2.trials = 2;
  const auto rows2 = run_bench(t2);
  ASSERT_EQ(rows2.size(), 7u);
  EXPECT_EQ(rows2[0].label, "0.1");
  EXPECT_EQ(rows2[6].label, "3");

  BenchSpec t3 = BenchSpec::table3();
  t3.trials = 2;
  const auto rows3 = run_bench(t3);
  ASSERT_EQ(rows3.size(), 4u);
  EXPECT_EQ(rows3[0].label, "R1T1");
  EXPECT_EQ(rows3[3].label, "R2T2");

  const std::string csv = bench_csv(rows3);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "sigma_or_pose,mean_err_R,std_err_R,mean_err_T,std_err_T,trials,failures");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
  EXPECT_EQ(bench_gnuplot(rows3).front(), '#');
}

TEST(RunBench, DeterministicAcrossJobs) {
  BenchSpec s = BenchSpec::table3();
  s.trials = 6;
  EXPECT_EQ(bench_csv(run_bench(s, 1)), bench_csv(run_bench(s, 4)));
}

}  // namespace
}  // namespace lfrect
