#pragma once

// Ray-traced light fields of textured planes, used as ground truth for the
// rectification and EPI checks.

#include <cstdint>
#include <vector>

#include "lfrect/geometry.hpp"
#include "lfrect/resampler.hpp"

namespace lfrect {

/// Procedural texture over plane coordinates (a, b) in mm. Values lie in [0, 1]
/// for the checker and noise kinds; the gradient is affine and unclamped.
struct Texture {
  enum class Kind { kChecker, kGradient, kNoise };

  Kind kind = Kind::kChecker;
  double period = 22.5;    ///< checker square size or noise wavelength (mm)
  double sharpness = 1.5;  ///< checker edge steepness, larger is crisper
  double offset = 0.5;     ///< gradient value at the plane origin
  double grad_a = 0.0;     ///< gradient slope along a (per mm)
  double grad_b = 0.0;
  std::uint64_t seed = 0;  ///< noise phases
  std::vector<Vec3> waves;  ///< noise components (k_a, k_b, phase), set by noise()

  static Texture checker(double period, double sharpness = 1.5);
  static Texture gradient(double offset, double grad_a, double grad_b);
  static Texture noise(double period, std::uint64_t seed);

  [[nodiscard]] double value(double a, double b) const;
};

/// Plane through `origin` spanned by the orthonormal axes a and b. Half
/// extents of 0 leave the plane unbounded in that direction.
struct TexturedPlane {
  Vec3 origin = Vec3(0.0, 0.0, 1000.0);
  Vec3 axis_a = Vec3::UnitX();
  Vec3 axis_b = Vec3::UnitY();
  double half_extent_a = 0.0;
  double half_extent_b = 0.0;
  Texture texture;

  [[nodiscard]] Vec3 normal() const { return axis_a.cross(axis_b); }
  [[nodiscard]] Vec3 point(double a, double b) const { return origin + a * axis_a + b * axis_b; }
};

struct Scene {
  std::vector<TexturedPlane> planes;
};

/// Fronto-parallel plane at depth z in world coordinates.
[[nodiscard]] TexturedPlane fronto_parallel_plane(double z, const Texture& texture);

/// Checker corners of `plane` with |index| <= half_a along a and <= half_b along b.
[[nodiscard]] std::vector<Vec3> checker_corners(const TexturedPlane& plane, int half_a, int half_b);

/// Luminance of the ray with origin o and direction d (world frame): the
/// texture of the nearest plane hit in front of the origin, nullopt on a miss.
[[nodiscard]] std::optional<double> trace_ray(const Scene& scene, const Vec3& o, const Vec3& d);

/// Light field of a plenoptic camera (see make_sampled_lf) whose pose maps
/// world coordinates into camera coordinates. Rays that miss every plane get
/// value 0 and are masked.
[[nodiscard]] SampledLF render_synthetic_lf(const Scene& scene, const LfIntrinsics& k,
                                            const RelativePose& world_to_camera, int grid,
                                            int width, int height, int jobs = 1);

}  // namespace lfrect
