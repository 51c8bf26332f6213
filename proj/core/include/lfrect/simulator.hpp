#pragma once

// Synthetic ground truth: virtual plenoptic camera pairs observing
// checkerboards, per-sub-aperture projections with Gaussian noise, LF-point
// refitting, and Monte-Carlo trial runs of the pose estimator.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lfrect/geometry.hpp"
#include "lfrect/pose_solver.hpp"

namespace lfrect {

struct BoardSpec {
  int rows = 7;
  int cols = 11;
  double spacing_mm = 22.5;
};

/// Placement of a checkerboard in camera-1 coordinates. Corner (r, c) sits at
/// rotation * [(c - cols/2) s, (r - rows/2) s, 0] + center.
struct BoardPose {
  Mat3 rotation = Mat3::Identity();
  Vec3 center = Vec3(0.0, 0.0, 1000.0);
};

struct SimConfig {
  LfIntrinsics camera1;
  LfIntrinsics camera2;
  RelativePose pose;  ///< ground truth, camera 1 -> camera 2
  BoardSpec board;
  std::vector<BoardPose> board_poses;  ///< empty: default_board_poses()
  int sai_grid = 13;
  double sigma = 0.0;  ///< pixels
  int trials = 100;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Intrinsics of the two simulated cameras (pixel units, K1 dimensionless).
[[nodiscard]] LfIntrinsics table1_camera1();
[[nodiscard]] LfIntrinsics table1_camera2();

/// Default placement: three boards centred 800, 1000 and 1200 mm ahead on the
/// bisector of the two optical axes, yawed by +-40 degrees and pitched by 20.
[[nodiscard]] std::vector<BoardPose> default_board_poses(const RelativePose& pose);

struct CornerSet {
  std::vector<ScenePoint3D> camera1;  ///< all boards, board-major then row-major
  std::vector<ScenePoint3D> camera2;  ///< R X1 + T
};

/// Throws kBehindCamera if any corner has Z <= 0 in either frame.
[[nodiscard]] CornerSet generate_corners(const SimConfig& cfg);

/// Per-SAI pixel coordinates of one point, row-major over the grid x grid
/// sub-apertures: entry (i, j) = (u_c + (j - jc) lambda, v_c + (i - ic) lambda).
struct SaiObservations {
  int grid = 13;
  std::vector<Eigen::Vector2d> xy;
  std::vector<bool> observed;  ///< empty means all observed

  [[nodiscard]] int center() const { return grid / 2; }
  [[nodiscard]] const Eigen::Vector2d& at(int row, int col) const {
    return xy[static_cast<std::size_t>(row * grid + col)];
  }
};

[[nodiscard]] SaiObservations project_corner_observations(const ScenePoint3D& p,
                                                          const LfIntrinsics& k, int grid);

/// Adds i.i.d. N(0, sigma^2) to every coordinate; sigma = 0 is the identity.
[[nodiscard]] SaiObservations add_observation_noise(const SaiObservations& obs, double sigma,
                                                    std::mt19937_64& rng);

/// Least-squares (u_c, v_c, lambda) for the observation model above. Throws
/// kInsufficientObservations when fewer than 2 distinct sub-apertures are used.
[[nodiscard]] LfPoint refit_lfpoint(const SaiObservations& obs);

/// One noisy correspondence set as used by trial `trial_index`.
[[nodiscard]] CorrespondenceSet simulate_correspondences(const SimConfig& cfg, int trial_index);

/// Seed of trial `trial_index`: base_seed + trial_index.
[[nodiscard]] std::uint64_t trial_seed(std::uint64_t base_seed, int trial_index);

struct TrialResult {
  int trial = 0;
  double err_r_deg = 0.0;
  double err_t_deg = 0.0;
  bool converged = false;
  int iterations = 0;
  bool failed = false;
  std::string failure;
};

struct TrialReport {
  std::vector<TrialResult> trials;
  double mean_err_r = 0.0;
  double std_err_r = 0.0;
  double mean_err_t = 0.0;
  double std_err_t = 0.0;
  int failures = 0;
};

/// Runs cfg.trials independent trials (optionally on `jobs` threads). Failed
/// trials are recorded and excluded from the statistics. The report does not
/// depend on `jobs` or on scheduling.
[[nodiscard]] TrialReport run_trials(const SimConfig& cfg, int jobs = 1,
                                     const EstimateOptions& options = {});

}  // namespace lfrect
