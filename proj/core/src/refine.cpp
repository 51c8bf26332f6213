#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "lfrect/errors.hpp"
#include "lfrect/pose_solver.hpp"

namespace lfrect {

namespace {

struct Prepared {
  Vec3 ray;       // [x, y, 1] of the camera-1 LF-point
  double inv_z;   // 1 / Z
  Vec3 observed;  // camera-2 LF-point
};

std::vector<Prepared> prepare(const CorrespondenceSet& corr) {
  const Mat4 h1_inv = corr.camera1.matrix_h_inverse();
  std::vector<Prepared> out;
  out.reserve(corr.size());
  for (const auto& c : corr.pairs) {
    const Vec4 q = h1_inv * c.first.homogeneous();
    out.push_back({q.head<3>(), q[3], c.second.vec()});
  }
  return out;
}

// Predicted camera-2 LF-point for X = R ray + inv_z T, i.e. H' [X; inv_z]
// de-homogenised by its last component X_z.
Vec3 predict(const LfIntrinsics& k, const Vec3& x, double inv_z) {
  return {k.fx * x.x() / x.z() + k.cx, k.fy * x.y() / x.z() + k.cy, -k.k1 - k.k2 * inv_z / x.z()};
}

Eigen::VectorXd residuals(const std::vector<Prepared>& pts, const LfIntrinsics& k,
                          const RelativePose& pose) {
  Eigen::VectorXd r(3 * static_cast<Eigen::Index>(pts.size()));
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec3 x = pose.rotation * pts[i].ray + pts[i].inv_z * pose.translation;
    r.segment<3>(3 * static_cast<Eigen::Index>(i)) = pts[i].observed - predict(k, x, pts[i].inv_z);
  }
  return r;
}

Eigen::MatrixXd jacobian(const std::vector<Prepared>& pts, const LfIntrinsics& k,
                         const RelativePose& pose) {
  Eigen::MatrixXd j(3 * static_cast<Eigen::Index>(pts.size()), 6);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec3 rotated = pose.rotation * pts[i].ray;
    const Vec3 x = rotated + pts[i].inv_z * pose.translation;
    const double iz = 1.0 / x.z();
    const double iz2 = iz * iz;
    Mat3 de_dx;
    de_dx << k.fx * iz, 0.0, -k.fx * x.x() * iz2,
             0.0, k.fy * iz, -k.fy * x.y() * iz2,
             0.0, 0.0, k.k2 * pts[i].inv_z * iz2;
    // d(exp([w]x) R ray)/dw = -[R ray]x at w = 0; residual = observed - predicted.
    const auto row = 3 * static_cast<Eigen::Index>(i);
    j.block<3, 3>(row, 0) = de_dx * skew(rotated);
    j.block<3, 3>(row, 3) = -de_dx * pts[i].inv_z;
  }
  return j;
}

RelativePose retract(const RelativePose& pose, const Eigen::Matrix<double, 6, 1>& delta) {
  RelativePose out;
  out.rotation = so3_exp(delta.head<3>()) * pose.rotation;
  out.translation = pose.translation + delta.tail<3>();
  return out;
}

}  // namespace

Eigen::VectorXd reprojection_residuals(const CorrespondenceSet& corr, const RelativePose& pose) {
  return residuals(prepare(corr), corr.camera2, pose);
}

double reprojection_cost(const CorrespondenceSet& corr, const RelativePose& pose) {
  return reprojection_residuals(corr, pose).squaredNorm();
}

Eigen::MatrixXd reprojection_jacobian(const CorrespondenceSet& corr, const RelativePose& pose) {
  return jacobian(prepare(corr), corr.camera2, pose);
}

RefineResult refine_pose(const CorrespondenceSet& corr, const RelativePose& init,
                         const RefineOptions& options) {
  init.validate();
  const std::vector<Prepared> pts = prepare(corr);
  const LfIntrinsics& k = corr.camera2;

  RefineResult result;
  result.pose = init;
  Eigen::VectorXd r = residuals(pts, k, init);
  double cost = r.squaredNorm();
  if (!std::isfinite(cost)) {
    fail(ErrorCode::kNumericalFailure, "initial reprojection cost is not finite");
  }
  result.initial_cost = cost;
  double damping = options.initial_damping;

  while (result.iterations < options.max_iterations) {
    const Eigen::MatrixXd j = jacobian(pts, k, result.pose);
    const Eigen::Matrix<double, 6, 1> g = j.transpose() * r;
    if (g.lpNorm<Eigen::Infinity>() < options.gradient_tolerance) {
      result.converged = true;
      result.stop_reason = "gradient";
      break;
    }
    const Eigen::Matrix<double, 6, 6> h = j.transpose() * j;
    const double diag_floor = 1e-12 * h.diagonal().maxCoeff();
    Eigen::Matrix<double, 6, 6> a = h;
    for (int d = 0; d < 6; ++d) a(d, d) += damping * std::max(h(d, d), diag_floor);
    const Eigen::Matrix<double, 6, 1> delta = a.ldlt().solve(-g);
    ++result.iterations;

    const double x_norm = result.pose.translation.norm() + 1.0;
    if (delta.norm() < options.step_tolerance * x_norm) {
      result.converged = true;
      result.stop_reason = "step";
      break;
    }

    const RelativePose candidate = retract(result.pose, delta);
    const Eigen::VectorXd r_new = residuals(pts, k, candidate);
    const double new_cost = r_new.squaredNorm();
    RefineIteration it{cost, new_cost, damping, false};
    if (std::isfinite(new_cost) && new_cost < cost) {
      it.accepted = true;
      result.trace.push_back(it);
      const double rel = (cost - new_cost) / cost;
      result.pose = candidate;
      r = r_new;
      cost = new_cost;
      damping = std::max(damping / options.damping_factor, 1e-15);
      if (rel < options.relative_cost_tolerance) {
        result.converged = true;
        result.stop_reason = "relative decrease";
        break;
      }
    } else {
      result.trace.push_back(it);
      damping *= options.damping_factor;
      if (damping > 1e20) {
        if (!std::isfinite(new_cost) && !std::isfinite(cost)) {
          fail(ErrorCode::kNumericalFailure, "reprojection cost became non-finite");
        }
        result.converged = true;
        result.stop_reason = "damping";
        break;
      }
    }
  }
  if (result.stop_reason.empty()) result.stop_reason = "max iterations";
  // Keep the rotation exactly orthonormal after repeated retractions.
  result.pose.rotation = project_to_so3(result.pose.rotation);
  result.final_cost = reprojection_cost(corr, result.pose);
  if (!std::isfinite(result.final_cost)) {
    fail(ErrorCode::kNumericalFailure, "final reprojection cost is not finite");
  }
  if (result.final_cost > result.initial_cost) {
    // Re-orthonormalisation can only move the cost by round-off; never report worse than init.
    result.pose = init;
    result.final_cost = result.initial_cost;
  }
  return result;
}

}  // namespace lfrect
