#include "lfrect/simulator.hpp"

#include <cmath>
#include <numeric>

#include <Eigen/QR>

#include "lfrect/errors.hpp"
#include "lfrect/parallel.hpp"

namespace lfrect {

void SimConfig::validate() const {
  camera1.validate();
  camera2.validate();
  pose.validate();
  if (!(board.spacing_mm > 0.0) || board.rows < 1 || board.cols < 1) {
    fail(ErrorCode::kInvalidArgument, "board needs positive spacing and at least one corner");
  }
  if (trials < 1) fail(ErrorCode::kInvalidArgument, "trials must be >= 1");
  if (!(sigma >= 0.0)) fail(ErrorCode::kInvalidArgument, "sigma must be >= 0");
  if (sai_grid < 2) fail(ErrorCode::kInvalidArgument, "sai_grid must be >= 2");
}

LfIntrinsics table1_camera1() { return {572.720, 572.685, 270.916, 188.109, 0.030, 165.298}; }
LfIntrinsics table1_camera2() { return {538.374, 538.062, 283.471, 188.709, 0.028, 147.606}; }

std::vector<BoardPose> default_board_poses(const RelativePose& pose) {
  // Staggered depths keep the inverse-depth spread wide enough that noise in
  // the camera-1 disparity does not shrink the translation estimate.
  constexpr double kDistances[3] = {800.0, 1000.0, 1200.0};
  constexpr double kYawTilt = 40.0;
  constexpr double kPitchTilt = 20.0;
  const Vec3 axis1 = Vec3::UnitZ();
  const Vec3 axis2 = pose.rotation.transpose() * Vec3::UnitZ();
  const Vec3 center2 = -(pose.rotation.transpose() * pose.translation);
  const auto center = [&](double d) -> Vec3 {
    return 0.5 * (d * axis1 + center2 + d * axis2);
  };

  const Vec3 bz = (axis1 + axis2).normalized();
  const Vec3 bx = (Vec3::UnitX() - Vec3::UnitX().dot(bz) * bz).normalized();
  const Vec3 by = bz.cross(bx);
  Mat3 base;
  base << bx, by, bz;

  return {
      {base * rotation_from_euler_xyz_deg(0.0, kYawTilt, 0.0), center(kDistances[0])},
      {base * rotation_from_euler_xyz_deg(0.0, -kYawTilt, 0.0), center(kDistances[1])},
      {base * rotation_from_euler_xyz_deg(kPitchTilt, 0.0, 0.0), center(kDistances[2])},
  };
}

CornerSet generate_corners(const SimConfig& cfg) {
  const std::vector<BoardPose> poses =
      cfg.board_poses.empty() ? default_board_poses(cfg.pose) : cfg.board_poses;
  CornerSet out;
  // Board frame origin sits between corners so tilts about board axes never
  // map a corner of one pose onto a corner of another.
  const double r0 = 0.5 * cfg.board.rows;
  const double c0 = 0.5 * cfg.board.cols;
  for (const auto& bp : poses) {
    for (int r = 0; r < cfg.board.rows; ++r) {
      for (int c = 0; c < cfg.board.cols; ++c) {
        const Vec3 local((c - c0) * cfg.board.spacing_mm, (r - r0) * cfg.board.spacing_mm, 0.0);
        const Vec3 x1 = bp.rotation * local + bp.center;
        const Vec3 x2 = cfg.pose.apply(x1);
        if (!(x1.z() > 0.0) || !(x2.z() > 0.0)) {
          fail(ErrorCode::kBehindCamera, "checkerboard corner lies behind a camera");
        }
        out.camera1.push_back(x1);
        out.camera2.push_back(x2);
      }
    }
  }
  return out;
}

SaiObservations project_corner_observations(const ScenePoint3D& p, const LfIntrinsics& k,
                                            int grid) {
  const LfPoint lp = project_to_lfpoint(p, k);
  SaiObservations obs;
  obs.grid = grid;
  obs.xy.reserve(static_cast<std::size_t>(grid * grid));
  const int center = obs.center();
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      obs.xy.emplace_back(lp.u_c + (j - center) * lp.lambda, lp.v_c + (i - center) * lp.lambda);
    }
  }
  return obs;
}

SaiObservations add_observation_noise(const SaiObservations& obs, double sigma,
                                      std::mt19937_64& rng) {
  if (!(sigma >= 0.0)) fail(ErrorCode::kInvalidArgument, "sigma must be >= 0");
  SaiObservations out = obs;
  if (sigma == 0.0) return out;
  std::normal_distribution<double> noise(0.0, sigma);
  for (auto& xy : out.xy) {
    xy.x() += noise(rng);
    xy.y() += noise(rng);
  }
  return out;
}

LfPoint refit_lfpoint(const SaiObservations& obs) {
  const int center = obs.center();
  std::vector<int> used;
  for (int idx = 0; idx < obs.grid * obs.grid; ++idx) {
    if (obs.observed.empty() || obs.observed[static_cast<std::size_t>(idx)]) used.push_back(idx);
  }
  if (used.size() < 2) {
    fail(ErrorCode::kInsufficientObservations, "lambda needs at least two sub-apertures");
  }
  const auto n = static_cast<Eigen::Index>(used.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * n, 3);
  Eigen::VectorXd b(2 * n);
  for (Eigen::Index e = 0; e < n; ++e) {
    const int idx = used[static_cast<std::size_t>(e)];
    const int i = idx / obs.grid;
    const int j = idx % obs.grid;
    const auto& xy = obs.xy[static_cast<std::size_t>(idx)];
    a(2 * e, 0) = 1.0;
    a(2 * e, 2) = j - center;
    b(2 * e) = xy.x();
    a(2 * e + 1, 1) = 1.0;
    a(2 * e + 1, 2) = i - center;
    b(2 * e + 1) = xy.y();
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  if (qr.rank() < 3) {
    fail(ErrorCode::kInsufficientObservations, "observed sub-apertures do not constrain lambda");
  }
  return LfPoint::from_vec(qr.solve(b));
}

std::uint64_t trial_seed(std::uint64_t base_seed, int trial_index) {
  return base_seed + static_cast<std::uint64_t>(trial_index);
}

CorrespondenceSet simulate_correspondences(const SimConfig& cfg, int trial_index) {
  cfg.validate();
  const CornerSet corners = generate_corners(cfg);
  std::mt19937_64 rng(trial_seed(cfg.seed, trial_index));
  CorrespondenceSet corr;
  corr.camera1 = cfg.camera1;
  corr.camera2 = cfg.camera2;
  corr.pairs.reserve(corners.camera1.size());
  for (std::size_t i = 0; i < corners.camera1.size(); ++i) {
    const auto o1 = project_corner_observations(corners.camera1[i], cfg.camera1, cfg.sai_grid);
    const auto o2 = project_corner_observations(corners.camera2[i], cfg.camera2, cfg.sai_grid);
    const LfPoint p1 = refit_lfpoint(add_observation_noise(o1, cfg.sigma, rng));
    const LfPoint p2 = refit_lfpoint(add_observation_noise(o2, cfg.sigma, rng));
    corr.pairs.push_back({p1, p2});
  }
  return corr;
}

TrialReport run_trials(const SimConfig& cfg, int jobs, const EstimateOptions& options) {
  cfg.validate();
  TrialReport report;
  report.trials.resize(static_cast<std::size_t>(cfg.trials));
  parallel_for(report.trials.size(), jobs, [&](std::size_t i) {
    TrialResult& tr = report.trials[i];
    tr.trial = static_cast<int>(i);
    try {
      const CorrespondenceSet corr = simulate_correspondences(cfg, tr.trial);
      const PoseEstimate est = estimate_pose(corr, options);
      tr.err_r_deg = angular_error_rotation(cfg.pose.rotation, est.pose.rotation);
      tr.err_t_deg = angular_error_translation(cfg.pose.translation, est.pose.translation);
      tr.converged = options.refine ? est.refinement.converged : true;
      tr.iterations = est.refinement.iterations;
    } catch (const Error& e) {
      tr.failed = true;
      tr.failure = e.what();
    }
  });

  // Fixed reduction order (by trial index) keeps the statistics bitwise reproducible.
  double sum_r = 0.0;
  double sum_t = 0.0;
  int ok = 0;
  for (const auto& tr : report.trials) {
    if (tr.failed) {
      ++report.failures;
      continue;
    }
    sum_r += tr.err_r_deg;
    sum_t += tr.err_t_deg;
    ++ok;
  }
  if (ok > 0) {
    report.mean_err_r = sum_r / ok;
    report.mean_err_t = sum_t / ok;
    double var_r = 0.0;
    double var_t = 0.0;
    for (const auto& tr : report.trials) {
      if (tr.failed) continue;
      var_r += (tr.err_r_deg - report.mean_err_r) * (tr.err_r_deg - report.mean_err_r);
      var_t += (tr.err_t_deg - report.mean_err_t) * (tr.err_t_deg - report.mean_err_t);
    }
    report.std_err_r = ok > 1 ? std::sqrt(var_r / (ok - 1)) : 0.0;
    report.std_err_t = ok > 1 ? std::sqrt(var_t / (ok - 1)) : 0.0;
  }
  return report;
}

}  // namespace lfrect
