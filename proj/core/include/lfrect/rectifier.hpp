#pragma once

// Ray warping between two-plane parameterizations and the rectifying rotation
// that puts both cameras' sub-apertures on one horizontal baseline.
//
// Conventions: the relative pose maps camera 1 into camera 2. Camera 2 is the
// reference ("left") camera of the rectified pair, camera 1 the "right" one,
// so that R_l = R_rect, R_r = R_rect R and T_r = R_rect T.

#include "lfrect/geometry.hpp"

namespace lfrect {

enum class LfSide { kLeft, kRight };

inline constexpr double kParallelRayThreshold = 1e-12;

/// Closed-form warp of `r` into the TPP of the frame reached by `pose`.
/// Throws kParallelRay when the transformed ray is parallel to the target
/// planes.
[[nodiscard]] Ray4D warp_ray(const Ray4D& r, const RelativePose& pose);

/// Same warp by explicit construction: transform the points at z = 0 and
/// z = 1 and intersect their line with the target planes. Throws
/// kDegenerateSegment when both transformed points have equal depth.
[[nodiscard]] Ray4D warp_ray_geometric(const Ray4D& r, const RelativePose& pose);

/// Rows e1 = T/|T|, e2 from the sum of the two principal rays, e3 = e1 x e2.
/// Throws kZeroBaseline for |T| <= 1e-9 and kCollinearConstruction when e2
/// vanishes before normalisation.
[[nodiscard]] Mat3 rectifying_rotation(const RelativePose& pose);

struct RectifiedSetup {
  Mat3 r_rect = Mat3::Identity();
  Mat3 r_l = Mat3::Identity();
  Mat3 r_r = Mat3::Identity();
  Vec3 t_l = Vec3::Zero();
  Vec3 t_r = Vec3::Zero();
  double baseline = 0.0;  ///< mm

  /// Transform from the given camera's frame into the common frame.
  [[nodiscard]] RelativePose to_common(LfSide side) const;
  /// Transform from the common frame back into the given camera's frame.
  [[nodiscard]] RelativePose from_common(LfSide side) const;

  /// Setup that leaves both cameras where they are. Used when the two light
  /// fields already share a parameterization (zero baseline).
  static RectifiedSetup identity();
  [[nodiscard]] bool is_identity() const;
};

[[nodiscard]] RectifiedSetup build_rectified_setup(const RelativePose& pose);

/// Ray of camera `side` expressed in the common third TPP.
[[nodiscard]] Ray4D warp_lf_to_common(const Ray4D& r, LfSide side, const RectifiedSetup& setup);

/// Inverse of warp_lf_to_common.
[[nodiscard]] Ray4D warp_common_to_lf(const Ray4D& q, LfSide side, const RectifiedSetup& setup);

}  // namespace lfrect
