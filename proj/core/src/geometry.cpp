#include "lfrect/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "lfrect/errors.hpp"

namespace lfrect {

namespace {

constexpr double kRadToDeg = 180.0 / std::numbers::pi;

}  // namespace

bool LfPoint::is_finite() const {
  return std::isfinite(u_c) && std::isfinite(v_c) && std::isfinite(lambda);
}

bool Ray4D::is_finite() const {
  return std::isfinite(s) && std::isfinite(t) && std::isfinite(u) && std::isfinite(v);
}

void LfIntrinsics::validate() const {
  if (!(std::isfinite(fx) && std::isfinite(fy) && std::isfinite(cx) && std::isfinite(cy) &&
        std::isfinite(k1) && std::isfinite(k2))) {
    fail(ErrorCode::kInvalidArgument, "intrinsics must be finite");
  }
  if (!(fx > 0.0) || !(fy > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "focal lengths must be positive");
  }
  if (k2 == 0.0) {
    fail(ErrorCode::kInvalidArgument, "K2 must be non-zero");
  }
}

Mat4 LfIntrinsics::matrix_h() const {
  Mat4 h;
  h << fx, 0.0, cx, 0.0,
       0.0, fy, cy, 0.0,
       0.0, 0.0, -k1, -k2,
       0.0, 0.0, 1.0, 0.0;
  return h;
}

Mat4 LfIntrinsics::matrix_h_inverse() const {
  Mat4 h;
  h << 1.0 / fx, 0.0, 0.0, -cx / fx,
       0.0, 1.0 / fy, 0.0, -cy / fy,
       0.0, 0.0, 0.0, 1.0,
       0.0, 0.0, -1.0 / k2, -k1 / k2;
  return h;
}

LfIntrinsics LfIntrinsics::scaled(double factor) const {
  return {fx * factor, fy * factor, cx * factor, cy * factor, k1 * factor, k2 * factor};
}

bool RelativePose::is_valid(double tol) const {
  if (!rotation.allFinite() || !translation.allFinite()) return false;
  const double ortho = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
  return ortho <= tol && std::abs(rotation.determinant() - 1.0) <= tol;
}

void RelativePose::validate(double tol) const {
  if (!is_valid(tol)) {
    fail(ErrorCode::kInvalidArgument, "pose rotation is not a proper rotation matrix");
  }
}

RelativePose RelativePose::inverse() const {
  RelativePose inv;
  inv.rotation = rotation.transpose();
  inv.translation = -(inv.rotation * translation);
  return inv;
}

Mat4 RelativePose::matrix() const {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = rotation;
  m.topRightCorner<3, 1>() = translation;
  return m;
}

Mat3 rotation_from_euler_xyz_deg(double ax, double ay, double az) {
  const double d = std::numbers::pi / 180.0;
  const Eigen::AngleAxisd rx(ax * d, Vec3::UnitX());
  const Eigen::AngleAxisd ry(ay * d, Vec3::UnitY());
  const Eigen::AngleAxisd rz(az * d, Vec3::UnitZ());
  return (rx * ry * rz).toRotationMatrix();
}

Mat3 skew(const Vec3& w) {
  Mat3 m;
  m << 0.0, -w.z(), w.y(),
       w.z(), 0.0, -w.x(),
       -w.y(), w.x(), 0.0;
  return m;
}

Mat3 so3_exp(const Vec3& w) {
  const double theta = w.norm();
  if (theta < 1e-12) {
    return Mat3::Identity() + skew(w);
  }
  return Eigen::AngleAxisd(theta, w / theta).toRotationMatrix();
}

double rotation_angle(const Mat3& r) {
  // atan2 form: well conditioned at both 0 and pi, unlike a bare acos.
  const Vec3 axis_sin(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  const double sin_theta = 0.5 * axis_sin.norm();
  const double cos_theta = std::clamp(0.5 * (r.trace() - 1.0), -1.0, 1.0);
  return std::atan2(sin_theta, cos_theta);
}

LfPoint project_to_lfpoint(const ScenePoint3D& p, const LfIntrinsics& k) {
  if (!(p.z() > 0.0)) {
    fail(ErrorCode::kNonPositiveDepth, "scene point depth must be positive, got Z=" +
                                           std::to_string(p.z()));
  }
  const double z = p.z();
  return {(k.fx * p.x() + k.cx * z) / z, (k.fy * p.y() + k.cy * z) / z, (-k.k1 * z - k.k2) / z};
}

ScenePoint3D backproject_lfpoint(const LfPoint& lp, const LfIntrinsics& k) {
  const double denom = lp.lambda + k.k1;
  if (std::abs(denom) < 1e-12) {
    fail(ErrorCode::kDegenerateDisparity, "lambda + K1 vanishes; depth is unbounded");
  }
  const double z = -k.k2 / denom;
  if (!(z > 0.0)) {
    fail(ErrorCode::kNonPositiveDepth, "recovered depth is not positive: Z=" + std::to_string(z));
  }
  return {z * (lp.u_c - k.cx) / k.fx, z * (lp.v_c - k.cy) / k.fy, z};
}

double angular_error_rotation(const Mat3& r_true, const Mat3& r_est) {
  return kRadToDeg * rotation_angle(r_true * r_est.transpose());
}

double angular_error_translation(const Vec3& t_true, const Vec3& t_est) {
  const double n_true = t_true.norm();
  const double n_est = t_est.norm();
  if (n_true < 1e-12 || n_est < 1e-12) {
    fail(ErrorCode::kZeroVector, "translation angular error needs non-zero vectors");
  }
  const Vec3 a = t_true / n_true;
  const Vec3 b = t_est / n_est;
  const double cos_angle = std::clamp(a.dot(b), -1.0, 1.0);
  return kRadToDeg * std::atan2(a.cross(b).norm(), cos_angle);
}

}  // namespace lfrect
