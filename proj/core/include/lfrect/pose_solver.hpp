#pragma once

// Relative pose between two plenoptic cameras from LF-point correspondences.
//
// The LF-point of a scene point in camera 2 is a projective image of its
// LF-point in camera 1:  P' ~ W P  with  W = H' [R T; 0 1] H^-1.
// The solver normalises both point sets, builds a DLT system for the
// normalised transform W', restricts W' to the 13-dimensional subspace in
// which its third row is tied to the fourth by the intrinsics, solves by SVD,
// de-normalises, projects the rotation onto SO(3), re-solves the translation
// linearly and finally refines (R, T) with Levenberg-Marquardt on SO(3) x R^3.
//
// vec(W') is stacked row-major throughout: w1..w4 is the first row of W'.

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lfrect/geometry.hpp"

namespace lfrect {

struct Correspondence {
  LfPoint first;   ///< camera 1
  LfPoint second;  ///< camera 2
};

struct CorrespondenceSet {
  std::vector<Correspondence> pairs;
  LfIntrinsics camera1;
  LfIntrinsics camera2;

  /// At least 4 pairs, all finite, no exact duplicates, valid intrinsics.
  void validate() const;
  [[nodiscard]] std::size_t size() const { return pairs.size(); }
};

/// Anisotropic normalisation  P_bar = N P  with
/// N = [v1 0 0 x1; 0 v2 0 x2; 0 0 v3 x3; 0 0 0 1].
struct NormalizationTransform {
  Vec3 scale = Vec3::Ones();    ///< v1, v2, v3
  Vec3 offset = Vec3::Zero();   ///< x1, x2, x3 (pixels)

  [[nodiscard]] Mat4 matrix() const;
  [[nodiscard]] Mat4 inverse_matrix() const;
  [[nodiscard]] LfPoint apply(const LfPoint& p) const;
};

struct NormalizedPoints {
  std::vector<LfPoint> points;
  NormalizationTransform transform;
};

/// Moves the centroid to the origin and scales each coordinate to unit RMS.
/// Throws kInvalidArgument for fewer than 2 points and kDegenerateSpread
/// when any coordinate has zero variance.
[[nodiscard]] NormalizedPoints normalize_points(std::span<const LfPoint> points);

/// DLT design matrix (6 rows per pair, 16 columns) for  P_bar' ~ W' P_bar.
/// Pairs are normalised with `n1` (camera 1) and `n2` (camera 2) first.
[[nodiscard]] Eigen::MatrixXd build_dlt_system(const CorrespondenceSet& corr,
                                               const NormalizationTransform& n1,
                                               const NormalizationTransform& n2);

/// 16 x 13 matrix Q with vec(W'16) = Q vec(W'13), where
/// vec(W'13) = [w1..w8, w13..w16, w0].
[[nodiscard]] Eigen::Matrix<double, 16, 13> constraint_matrix(const LfIntrinsics& k1,
                                                              const LfIntrinsics& k2,
                                                              const NormalizationTransform& n1,
                                                              const NormalizationTransform& n2);

/// Reduced 13-vector of a full row-major vec(W'16); w0 = -w11 + alpha' w15.
[[nodiscard]] Eigen::Matrix<double, 13, 1> reduce_to_13(const Eigen::Matrix<double, 16, 1>& w16,
                                                        double alpha_prime);

/// alpha = x3 - K1 v3 for one camera's intrinsics and normalisation.
[[nodiscard]] double constraint_alpha(const LfIntrinsics& k, const NormalizationTransform& n);

/// Row-major stacking helpers for 4x4 matrices.
[[nodiscard]] Eigen::Matrix<double, 16, 1> vec_row_major(const Mat4& m);
[[nodiscard]] Mat4 unvec_row_major(const Eigen::Matrix<double, 16, 1>& v);

struct ProjectiveSolution {
  Mat4 w_normalized = Mat4::Zero();  ///< W', unit Frobenius norm of its 13-vector
  Mat4 w = Mat4::Zero();             ///< N'^-1 W' N
  Mat4 extrinsic = Mat4::Identity(); ///< H'^-1 W H scaled to a unit (4,4) entry
  double mu = 1.0;                   ///< extrinsic = mu * H'^-1 W H
  double c = 1.0;                    ///< (4,4) entry before scaling; W' = c N' W_true N^-1
  bool sign_flipped = false;         ///< rotation block negated to make det > 0
  NormalizationTransform n1;
  NormalizationTransform n2;
  Eigen::VectorXd singular_values;   ///< spectrum of A Q, descending
};

/// Constrained linear solve. Throws kRankDeficient when the null space of AQ
/// is not one-dimensional.
[[nodiscard]] ProjectiveSolution solve_linear(const CorrespondenceSet& corr);

/// Orthogonal-Procrustes projection onto SO(3):  U diag(1, 1, det(U V^T)) V^T.
/// Throws kSingularInput when the smallest singular value is below 1e-12.
[[nodiscard]] Mat3 project_to_so3(const Mat3& m);

/// Homogeneous linear system  A_R vec(R) + A_T T = 0  (vec(R) column-stacked),
/// three rows per pair.
struct TranslationSystem {
  Eigen::MatrixXd a_r;  ///< 3n x 9
  Eigen::MatrixXd a_t;  ///< 3n x 3
};

[[nodiscard]] TranslationSystem build_translation_system(const CorrespondenceSet& corr);

/// Minimum-norm least squares  T = -A_T^+ A_R vec(R). Throws kIllConditioned
/// when cond(A_T) exceeds 1e12.
[[nodiscard]] Vec3 solve_translation(const CorrespondenceSet& corr, const Mat3& rotation);

struct DegeneracyReport {
  bool coplanar = false;
  Vec3 plane_normal = Vec3::UnitZ();  ///< unit normal n
  double plane_distance = 0.0;        ///< n . x = d over the fitted plane (mm)
  double residual_rms = 0.0;          ///< orthogonal RMS distance to the plane (mm)
  double scene_diameter = 0.0;        ///< largest pairwise distance (mm)
};

/// Relative plane-fit residual below which a point set counts as coplanar.
inline constexpr double kCoplanarityThreshold = 1e-3;

/// Total-least-squares plane through the camera-1 back-projections.
[[nodiscard]] DegeneracyReport detect_degeneracy(const CorrespondenceSet& corr);

struct RefineOptions {
  double initial_damping = 1e-3;
  double damping_factor = 10.0;
  int max_iterations = 100;
  double relative_cost_tolerance = 1e-12;
  double gradient_tolerance = 1e-10;
  double step_tolerance = 1e-14;
};

struct RefineIteration {
  double cost_before = 0.0;
  double cost_after = 0.0;
  double damping = 0.0;
  bool accepted = false;
};

struct RefineResult {
  RelativePose pose;
  double initial_cost = 0.0;
  double final_cost = 0.0;  ///< pixels^2
  int iterations = 0;
  bool converged = false;
  std::string stop_reason;
  std::vector<RefineIteration> trace;
};

/// Residuals  P'_observed - P'_predicted  (3 per pair, pixels).
[[nodiscard]] Eigen::VectorXd reprojection_residuals(const CorrespondenceSet& corr,
                                                     const RelativePose& pose);

/// Sum of squared residuals (pixels^2).
[[nodiscard]] double reprojection_cost(const CorrespondenceSet& corr, const RelativePose& pose);

/// Jacobian of the residuals w.r.t. (omega, delta T), where the rotation is
/// perturbed as  exp([omega]x) R  and the translation additively.
[[nodiscard]] Eigen::MatrixXd reprojection_jacobian(const CorrespondenceSet& corr,
                                                    const RelativePose& pose);

/// Levenberg-Marquardt on SO(3) x R^3. The returned cost never exceeds the
/// initial one. Throws kNumericalFailure if the cost becomes non-finite.
[[nodiscard]] RefineResult refine_pose(const CorrespondenceSet& corr, const RelativePose& init,
                                       const RefineOptions& options = {});

struct EstimateOptions {
  bool refine = true;
  RefineOptions refine_options;
};

struct PoseEstimate {
  RelativePose pose;         ///< final (refined unless disabled)
  RelativePose linear_pose;  ///< after SO(3) projection and linear translation
  ProjectiveSolution linear;
  DegeneracyReport degeneracy;
  RefineResult refinement;   ///< empty trace when refinement is disabled
  double linear_cost = 0.0;
};

/// Full pipeline. Throws kCoplanarDegeneracy for coplanar scenes plus any
/// error of the component steps. Deterministic for a fixed input.
[[nodiscard]] PoseEstimate estimate_pose(const CorrespondenceSet& corr,
                                         const EstimateOptions& options = {});

}  // namespace lfrect
