#include "lfrect/pose_solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include <Eigen/SVD>

#include "lfrect/errors.hpp"

namespace lfrect {

namespace {

using Vec16 = Eigen::Matrix<double, 16, 1>;

std::vector<LfPoint> firsts(const CorrespondenceSet& corr) {
  std::vector<LfPoint> out;
  out.reserve(corr.size());
  for (const auto& c : corr.pairs) out.push_back(c.first);
  return out;
}

std::vector<LfPoint> seconds(const CorrespondenceSet& corr) {
  std::vector<LfPoint> out;
  out.reserve(corr.size());
  for (const auto& c : corr.pairs) out.push_back(c.second);
  return out;
}

}  // namespace

void CorrespondenceSet::validate() const {
  camera1.validate();
  camera2.validate();
  if (pairs.size() < 4) {
    fail(ErrorCode::kInvalidArgument,
         "at least 4 correspondences are required, got " + std::to_string(pairs.size()));
  }
  for (const auto& c : pairs) {
    if (!c.first.is_finite() || !c.second.is_finite()) {
      fail(ErrorCode::kInvalidArgument, "correspondence contains non-finite values");
    }
  }
  std::vector<std::array<double, 6>> keys;
  keys.reserve(pairs.size());
  for (const auto& c : pairs) {
    keys.push_back({c.first.u_c, c.first.v_c, c.first.lambda, c.second.u_c, c.second.v_c,
                    c.second.lambda});
  }
  std::sort(keys.begin(), keys.end());
  if (std::adjacent_find(keys.begin(), keys.end()) != keys.end()) {
    fail(ErrorCode::kInvalidArgument, "duplicate correspondence pairs");
  }
}

Mat4 NormalizationTransform::matrix() const {
  Mat4 n = Mat4::Identity();
  n.diagonal().head<3>() = scale;
  n.topRightCorner<3, 1>() = offset;
  return n;
}

Mat4 NormalizationTransform::inverse_matrix() const {
  Mat4 n = Mat4::Identity();
  n.diagonal().head<3>() = scale.cwiseInverse();
  n.topRightCorner<3, 1>() = -offset.cwiseQuotient(scale);
  return n;
}

LfPoint NormalizationTransform::apply(const LfPoint& p) const {
  return LfPoint::from_vec(scale.cwiseProduct(p.vec()) + offset);
}

NormalizedPoints normalize_points(std::span<const LfPoint> points) {
  if (points.size() < 2) {
    fail(ErrorCode::kInvalidArgument, "normalisation needs at least 2 points");
  }
  const double n = static_cast<double>(points.size());
  Vec3 centroid = Vec3::Zero();
  for (const auto& p : points) centroid += p.vec();
  centroid /= n;
  Vec3 sq = Vec3::Zero();
  for (const auto& p : points) sq += (p.vec() - centroid).cwiseAbs2();
  const Vec3 rms = (sq / n).cwiseSqrt();

  NormalizedPoints out;
  for (int i = 0; i < 3; ++i) {
    const double magnitude = std::max(1.0, std::abs(centroid[i]));
    if (!(rms[i] > 1e-14 * magnitude)) {
      fail(ErrorCode::kDegenerateSpread, "coordinate " + std::to_string(i) + " has zero variance");
    }
    out.transform.scale[i] = 1.0 / rms[i];
    out.transform.offset[i] = -out.transform.scale[i] * centroid[i];
  }
  out.points.reserve(points.size());
  for (const auto& p : points) out.points.push_back(out.transform.apply(p));
  return out;
}

Eigen::MatrixXd build_dlt_system(const CorrespondenceSet& corr, const NormalizationTransform& n1,
                                 const NormalizationTransform& n2) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(6 * static_cast<Eigen::Index>(corr.size()), 16);
  Eigen::Index row = 0;
  for (const auto& c : corr.pairs) {
    const Vec4 p = n1.apply(c.first).homogeneous();
    const Vec4 q = n2.apply(c.second).homogeneous();
    // q_i (W'p)_j - q_j (W'p)_i = 0 for every i < j.
    for (int i = 0; i < 4; ++i) {
      for (int j = i + 1; j < 4; ++j) {
        for (int k = 0; k < 4; ++k) {
          a(row, 4 * j + k) += q[i] * p[k];
          a(row, 4 * i + k) -= q[j] * p[k];
        }
        ++row;
      }
    }
  }
  return a;
}

double constraint_alpha(const LfIntrinsics& k, const NormalizationTransform& n) {
  return n.offset.z() - k.k1 * n.scale.z();
}

Eigen::Matrix<double, 16, 13> constraint_matrix(const LfIntrinsics& k1, const LfIntrinsics& k2,
                                                const NormalizationTransform& n1,
                                                const NormalizationTransform& n2) {
  const double alpha = constraint_alpha(k1, n1);
  const double alpha_p = constraint_alpha(k2, n2);
  Eigen::Matrix<double, 16, 13> q = Eigen::Matrix<double, 16, 13>::Zero();
  for (int i = 0; i < 8; ++i) q(i, i) = 1.0;
  q(8, 8) = alpha_p;   // w9  = a' w13
  q(9, 9) = alpha_p;   // w10 = a' w14
  q(10, 10) = alpha_p; // w11 = a' w15 - w0
  q(10, 12) = -1.0;
  q(11, 11) = alpha_p; // w12 = a' w16 + a w0
  q(11, 12) = alpha;
  for (int i = 0; i < 4; ++i) q(12 + i, 8 + i) = 1.0;
  return q;
}

Eigen::Matrix<double, 13, 1> reduce_to_13(const Vec16& w16, double alpha_prime) {
  Eigen::Matrix<double, 13, 1> w13;
  w13.head<8>() = w16.head<8>();
  w13.segment<4>(8) = w16.tail<4>();
  w13(12) = -w16(10) + alpha_prime * w16(14);
  return w13;
}

Vec16 vec_row_major(const Mat4& m) {
  Vec16 v;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) v(4 * r + c) = m(r, c);
  }
  return v;
}

Mat4 unvec_row_major(const Vec16& v) {
  Mat4 m;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) m(r, c) = v(4 * r + c);
  }
  return m;
}

ProjectiveSolution solve_linear(const CorrespondenceSet& corr) {
  corr.validate();
  const std::vector<LfPoint> p1 = firsts(corr);
  const std::vector<LfPoint> p2 = seconds(corr);

  ProjectiveSolution sol;
  sol.n1 = normalize_points(p1).transform;
  sol.n2 = normalize_points(p2).transform;

  const Eigen::MatrixXd a = build_dlt_system(corr, sol.n1, sol.n2);
  const Eigen::Matrix<double, 16, 13> q = constraint_matrix(corr.camera1, corr.camera2, sol.n1, sol.n2);
  const Eigen::MatrixXd aq = a * q;

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(aq, Eigen::ComputeThinV);
  sol.singular_values = svd.singularValues();
  const auto& s = sol.singular_values;
  const double s_max = s(0);
  const double s_min = s(12);
  const double s_next = s(11);
  if (!(s_max > 0.0) || s_next <= 1e-10 * s_max || s_min / s_next > 1.0 - 1e-6) {
    std::ostringstream msg;
    msg << "ambiguous null space of AQ (smallest singular values " << s_min << ", " << s_next
        << ", largest " << s_max << ")";
    fail(ErrorCode::kRankDeficient, msg.str());
  }

  const Eigen::Matrix<double, 13, 1> w13 = svd.matrixV().col(12);
  sol.w_normalized = unvec_row_major(q * w13);
  sol.w = sol.n2.inverse_matrix() * sol.w_normalized * sol.n1.matrix();

  const Mat4 m = corr.camera2.matrix_h_inverse() * sol.w * corr.camera1.matrix_h();
  sol.c = m(3, 3);
  if (!std::isfinite(sol.c) || std::abs(sol.c) <= 1e-300) {
    fail(ErrorCode::kRankDeficient, "de-normalised transform has a vanishing (4,4) entry");
  }
  sol.mu = 1.0 / sol.c;
  sol.extrinsic = m * sol.mu;
  if (sol.extrinsic.topLeftCorner<3, 3>().determinant() < 0.0) {
    sol.extrinsic.topLeftCorner<3, 3>() *= -1.0;
    sol.sign_flipped = true;
  }
  return sol;
}

Mat3 project_to_so3(const Mat3& m) {
  const Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (!(svd.singularValues()(2) >= 1e-12)) {
    fail(ErrorCode::kSingularInput, "matrix is singular; cannot project onto SO(3)");
  }
  const Mat3 u = svd.matrixU();
  const Mat3 v = svd.matrixV();
  Mat3 d = Mat3::Identity();
  d(2, 2) = (u * v.transpose()).determinant() > 0.0 ? 1.0 : -1.0;
  return u * d * v.transpose();
}

TranslationSystem build_translation_system(const CorrespondenceSet& corr) {
  const auto n = static_cast<Eigen::Index>(corr.size());
  TranslationSystem sys{Eigen::MatrixXd::Zero(3 * n, 9), Eigen::MatrixXd::Zero(3 * n, 3)};
  const Mat4 h1_inv = corr.camera1.matrix_h_inverse();
  const Mat4 h2_inv = corr.camera2.matrix_h_inverse();
  Eigen::Index row = 0;
  for (const auto& c : corr.pairs) {
    // Normalised rays [x, y, 1, 1/Z] of both LF-points.
    const Vec4 q1 = h1_inv * c.first.homogeneous();
    const Vec4 q2 = h2_inv * c.second.homogeneous();
    const Mat3 cross = skew(q2.head<3>());
    // [q2]x (R q1 + q1_4 T) = 0, with R q1 = (q1^T kron I3) vec(R).
    for (int j = 0; j < 3; ++j) {
      sys.a_r.block<3, 3>(row, 3 * j) = cross * q1[j];
    }
    sys.a_t.block<3, 3>(row, 0) = cross * q1[3];
    row += 3;
  }
  return sys;
}

Vec3 solve_translation(const CorrespondenceSet& corr, const Mat3& rotation) {
  if (corr.size() < 2) {
    fail(ErrorCode::kInvalidArgument, "translation recovery needs at least 2 pairs");
  }
  const TranslationSystem sys = build_translation_system(corr);
  const Eigen::Map<const Eigen::Matrix<double, 9, 1>> vec_r(rotation.data());  // column-major
  const Eigen::VectorXd rhs = -(sys.a_r * vec_r);
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.a_t, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  if (!(s(2) > 0.0) || s(0) / s(2) > 1e12) {
    fail(ErrorCode::kIllConditioned, "translation system is ill-conditioned");
  }
  return svd.solve(rhs);
}

DegeneracyReport detect_degeneracy(const CorrespondenceSet& corr) {
  std::vector<Vec3> pts;
  pts.reserve(corr.size());
  for (const auto& c : corr.pairs) {
    try {
      pts.push_back(backproject_lfpoint(c.first, corr.camera1));
    } catch (const Error&) {
      // Points without a finite positive depth carry no plane information.
    }
  }
  DegeneracyReport report;
  if (pts.size() < 3) {
    report.coplanar = true;
    return report;
  }
  Vec3 centroid = Vec3::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());

  Eigen::MatrixXd centered(static_cast<Eigen::Index>(pts.size()), 3);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    centered.row(static_cast<Eigen::Index>(i)) = (pts[i] - centroid).transpose();
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  Vec3 normal = svd.matrixV().col(2);
  double distance = normal.dot(centroid);
  if (distance < 0.0) {
    normal = -normal;
    distance = -distance;
  }
  double diameter = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      diameter = std::max(diameter, (pts[i] - pts[j]).norm());
    }
  }
  report.plane_normal = normal;
  report.plane_distance = distance;
  report.residual_rms = svd.singularValues()(2) / std::sqrt(static_cast<double>(pts.size()));
  report.scene_diameter = diameter;
  report.coplanar = !(diameter > 0.0) || report.residual_rms / diameter < kCoplanarityThreshold;
  return report;
}

PoseEstimate estimate_pose(const CorrespondenceSet& corr, const EstimateOptions& options) {
  corr.validate();
  PoseEstimate est;
  est.degeneracy = detect_degeneracy(corr);
  if (est.degeneracy.coplanar) {
    std::ostringstream msg;
    const auto& d = est.degeneracy;
    msg << "scene points are coplanar: plane n=[" << d.plane_normal.x() << ", "
        << d.plane_normal.y() << ", " << d.plane_normal.z() << "], d=" << d.plane_distance
        << " mm, rms=" << d.residual_rms << " mm";
    fail(ErrorCode::kCoplanarDegeneracy, msg.str());
  }
  est.linear = solve_linear(corr);
  est.linear_pose.rotation = project_to_so3(est.linear.extrinsic.topLeftCorner<3, 3>());
  est.linear_pose.translation = solve_translation(corr, est.linear_pose.rotation);
  est.linear_cost = reprojection_cost(corr, est.linear_pose);
  if (options.refine) {
    est.refinement = refine_pose(corr, est.linear_pose, options.refine_options);
    est.pose = est.refinement.pose;
  } else {
    est.pose = est.linear_pose;
    est.refinement.pose = est.linear_pose;
    est.refinement.initial_cost = est.linear_cost;
    est.refinement.final_cost = est.linear_cost;
    est.refinement.stop_reason = "disabled";
  }
  return est;
}

}  // namespace lfrect
