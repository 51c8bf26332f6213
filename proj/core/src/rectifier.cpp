#include "lfrect/rectifier.hpp"

#include <cmath>

#include "lfrect/errors.hpp"

namespace lfrect {

Ray4D warp_ray(const Ray4D& r, const RelativePose& pose) {
  const Mat3& m = pose.rotation;
  const Vec3& t = pose.translation;

  const double den = m(2, 2) + m(2, 0) * r.u + m(2, 1) * r.v;
  if (!(std::abs(den) > kParallelRayThreshold)) {
    fail(ErrorCode::kParallelRay, "warped ray is parallel to the target planes");
  }
  const double dx = m(0, 2) + m(0, 0) * r.u + m(0, 1) * r.v;
  const double dy = m(1, 2) + m(1, 0) * r.u + m(1, 1) * r.v;
  const double z1 = t(2) + m(2, 0) * r.s + m(2, 1) * r.t;

  Ray4D out;
  out.s = t(0) + m(0, 0) * r.s + m(0, 1) * r.t - z1 * dx / den;
  out.t = t(1) + m(1, 0) * r.s + m(1, 1) * r.t - z1 * dy / den;
  out.u = dx / den;
  out.v = dy / den;
  return out;
}

Ray4D warp_ray_geometric(const Ray4D& r, const RelativePose& pose) {
  const Vec3 p1 = pose.apply(Vec3(r.s, r.t, 0.0));
  const Vec3 p2 = pose.apply(Vec3(r.s + r.u, r.t + r.v, 1.0));
  const double dz = p1.z() - p2.z();
  if (!(std::abs(dz) > kParallelRayThreshold)) {
    fail(ErrorCode::kDegenerateSegment, "transformed ray segment has no depth extent");
  }
  const double l1 = p1.z() / dz;
  const double l2 = (p1.z() - 1.0) / dz;
  const Vec3 p3 = p1 + l1 * (p2 - p1);
  const Vec3 p4 = p1 + l2 * (p2 - p1);
  return {p3.x(), p3.y(), p4.x() - p3.x(), p4.y() - p3.y()};
}

Mat3 rectifying_rotation(const RelativePose& pose) {
  const Vec3& t = pose.translation;
  const double norm = t.norm();
  if (!(norm > 1e-9)) {
    fail(ErrorCode::kZeroBaseline, "translation too small to define a baseline");
  }
  const Mat3& m = pose.rotation;
  const Vec3 e1 = t / norm;
  const Vec3 raw(-m(1, 2) * t(2) + t(1) * (m(2, 2) + 1.0),
                 m(0, 2) * t(2) - t(0) * (m(2, 2) + 1.0),
                 -m(0, 2) * t(1) + m(1, 2) * t(0));
  if (!(raw.norm() > 1e-9)) {
    fail(ErrorCode::kCollinearConstruction,
         "translation is parallel to the sum of the principal rays");
  }
  const Vec3 e2 = raw.normalized();
  const Vec3 e3 = e1.cross(e2);

  Mat3 out;
  out.row(0) = e1.transpose();
  out.row(1) = e2.transpose();
  out.row(2) = e3.transpose();
  return out;
}

RelativePose RectifiedSetup::to_common(LfSide side) const {
  return side == LfSide::kLeft ? RelativePose{r_l, t_l} : RelativePose{r_r, t_r};
}

RelativePose RectifiedSetup::from_common(LfSide side) const {
  return to_common(side).inverse();
}

RectifiedSetup RectifiedSetup::identity() { return {}; }

bool RectifiedSetup::is_identity() const {
  return r_l == Mat3::Identity() && r_r == Mat3::Identity() && t_l.isZero(0.0) &&
         t_r.isZero(0.0);
}

RectifiedSetup build_rectified_setup(const RelativePose& pose) {
  RectifiedSetup out;
  out.r_rect = rectifying_rotation(pose);
  out.r_l = out.r_rect;
  out.r_r = out.r_rect * pose.rotation;
  out.t_l = Vec3::Zero();
  out.t_r = out.r_rect * pose.translation;
  out.baseline = pose.translation.norm();
  return out;
}

Ray4D warp_lf_to_common(const Ray4D& r, LfSide side, const RectifiedSetup& setup) {
  return warp_ray(r, setup.to_common(side));
}

Ray4D warp_common_to_lf(const Ray4D& q, LfSide side, const RectifiedSetup& setup) {
  return warp_ray(q, setup.from_common(side));
}

}  // namespace lfrect
