#pragma once

// Core value types shared by the pose solver, rectifier, resampler and
// simulator. Units are fixed project-wide: millimetres for scene and ray
// coordinates, pixels for image coordinates and disparities, degrees for
// reported angular errors.

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace lfrect {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// Camera-frame scene point (mm).
using ScenePoint3D = Eigen::Vector3d;

/// LF feature: projection (u_c, v_c) in the central sub-aperture image plus the
/// disparity lambda between any two adjacent sub-aperture images. All pixels.
struct LfPoint {
  double u_c = 0.0;
  double v_c = 0.0;
  double lambda = 0.0;

  [[nodiscard]] Vec4 homogeneous() const { return {u_c, v_c, lambda, 1.0}; }
  [[nodiscard]] Vec3 vec() const { return {u_c, v_c, lambda}; }
  [[nodiscard]] bool is_finite() const;
  static LfPoint from_vec(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

  friend bool operator==(const LfPoint&, const LfPoint&) = default;
};

/// Plenoptic intrinsics. fx, fy, cx, cy and K2 in pixels, K1 dimensionless.
struct LfIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  double k1 = 0.0;
  double k2 = 0.0;

  /// Throws kInvalidArgument unless fx > 0, fy > 0, K2 != 0 and all finite.
  void validate() const;

  /// The 4x4 matrix mapping [X, Y, Z, 1] to Z * [u_c, v_c, lambda, 1].
  [[nodiscard]] Mat4 matrix_h() const;
  /// Closed-form inverse of matrix_h().
  [[nodiscard]] Mat4 matrix_h_inverse() const;

  /// Intrinsics of the same camera after all image coordinates (and hence
  /// disparities) are multiplied by `factor`.
  [[nodiscard]] LfIntrinsics scaled(double factor) const;

  /// Sub-aperture spacing along s and t (mm) implied by the disparity model.
  [[nodiscard]] double aperture_pitch_s() const { return k2 / fx; }
  [[nodiscard]] double aperture_pitch_t() const { return k2 / fy; }

  friend bool operator==(const LfIntrinsics&, const LfIntrinsics&) = default;
};

/// Rigid transform taking camera-1 coordinates to camera-2 coordinates:
/// X2 = rotation * X1 + translation.
struct RelativePose {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static RelativePose identity() { return {}; }

  /// R^T R = I and det R = +1 within `tol`, translation finite.
  [[nodiscard]] bool is_valid(double tol = 1e-9) const;
  /// Throws kInvalidArgument when is_valid(tol) is false.
  void validate(double tol = 1e-9) const;

  [[nodiscard]] RelativePose inverse() const;
  [[nodiscard]] Vec3 apply(const Vec3& x) const { return rotation * x + translation; }
  /// 4x4 homogeneous [R T; 0 1].
  [[nodiscard]] Mat4 matrix() const;
};

/// Ray in a two-plane parameterization: (s, t) is the intersection with the
/// ST plane z = 0, (u, v) the offset of the intersection with the UV plane
/// z = 1 (mm) relative to (s, t).
struct Ray4D {
  double s = 0.0;
  double t = 0.0;
  double u = 0.0;
  double v = 0.0;

  [[nodiscard]] bool is_finite() const;
  [[nodiscard]] Eigen::Vector4d vec() const { return {s, t, u, v}; }
};

/// Rotation from intrinsic x-y-z Euler angles in degrees:
/// R = Rx(a) * Ry(b) * Rz(c).
[[nodiscard]] Mat3 rotation_from_euler_xyz_deg(double ax, double ay, double az);

[[nodiscard]] Mat3 skew(const Vec3& w);
/// Exponential map so(3) -> SO(3).
[[nodiscard]] Mat3 so3_exp(const Vec3& w);
/// Rotation angle (radians) of a rotation matrix, via the axis-angle form.
[[nodiscard]] double rotation_angle(const Mat3& r);

/// (1/Z) H [X, Y, Z, 1]^T de-homogenised. Throws kNonPositiveDepth if Z <= 0.
[[nodiscard]] LfPoint project_to_lfpoint(const ScenePoint3D& p, const LfIntrinsics& k);

/// Inverse of project_to_lfpoint: Z = -K2 / (lambda + K1).
/// Throws kDegenerateDisparity when lambda + K1 vanishes and
/// kNonPositiveDepth when the recovered depth is not positive.
[[nodiscard]] ScenePoint3D backproject_lfpoint(const LfPoint& lp, const LfIntrinsics& k);

/// Angle (degrees) of R_true * R_est^T. The acos argument is clamped.
[[nodiscard]] double angular_error_rotation(const Mat3& r_true, const Mat3& r_est);

/// Angle (degrees) between two translation directions. Throws kZeroVector if
/// either vector has norm below 1e-12.
[[nodiscard]] double angular_error_translation(const Vec3& t_true, const Vec3& t_est);

}  // namespace lfrect
