#pragma once

// Monte-Carlo sweeps reproducing the noise-level and relative-pose tables.

#include <cstdint>
#include <string>
#include <vector>

#include "lfrect/simulator.hpp"

namespace lfrect {

struct PosePreset {
  std::string name;
  Vec3 euler_xyz_deg = Vec3::Zero();
  Vec3 translation_mm = Vec3::Zero();

  [[nodiscard]] RelativePose pose() const;
};

/// Rotation presets R1 = (5, 15, 5) and R2 = (5, 30, 5) degrees.
[[nodiscard]] Vec3 preset_rotation(const std::string& name);
/// Translation presets T1 = [50, 0, 0] and T2 = [100, 0, 0] mm.
[[nodiscard]] Vec3 preset_translation(const std::string& name);
/// (5, 20, 5) degrees with [80, 5, 5] mm.
[[nodiscard]] PosePreset table2_pose();
/// R1T1, R1T2, R2T1, R2T2 in that order.
[[nodiscard]] std::vector<PosePreset> table3_poses();

struct BenchSpec {
  enum class Scenario { kTable2, kTable3, kCustom };

  Scenario scenario = Scenario::kTable2;
  std::vector<double> sigma_list;  ///< px
  std::vector<PosePreset> pose_list;
  int trials = 100;
  std::uint64_t seed = 1;
  LfIntrinsics camera1 = table1_camera1();
  LfIntrinsics camera2 = table1_camera2();
  BoardSpec board;

  static BenchSpec table2();  ///< sigma 0.1 ... 0.5, 2, 3
  static BenchSpec table3();  ///< sigma 0.3

  void validate() const;
};

/// Throws kParseError / kInvalidArgument.
[[nodiscard]] BenchSpec parse_bench_spec(const std::string& text, const std::string& origin);

struct BenchRow {
  std::string label;  ///< sigma for table2, pose name for table3, "name@sigma" otherwise
  double sigma = 0.0;
  std::string pose;
  TrialReport report;
};

/// Rows in spec order: table2 iterates sigma, table3 iterates poses, custom
/// iterates poses then sigma.
[[nodiscard]] std::vector<BenchRow> run_bench(const BenchSpec& spec, int jobs = 1);

/// sigma_or_pose,mean_err_R,std_err_R,mean_err_T,std_err_T,trials,failures
[[nodiscard]] std::string bench_csv(const std::vector<BenchRow>& rows);
/// Whitespace-separated table for gnuplot with a commented header.
[[nodiscard]] std::string bench_gnuplot(const std::vector<BenchRow>& rows);

}  // namespace lfrect
