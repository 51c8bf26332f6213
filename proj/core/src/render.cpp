#include "lfrect/render.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "lfrect/errors.hpp"
#include "lfrect/parallel.hpp"

namespace lfrect {
namespace {

constexpr int kNoiseWaves = 12;

}  // namespace

Texture Texture::checker(double period, double sharpness) {
  Texture t;
  t.kind = Kind::kChecker;
  t.period = period;
  t.sharpness = sharpness;
  return t;
}

Texture Texture::gradient(double offset, double grad_a, double grad_b) {
  Texture t;
  t.kind = Kind::kGradient;
  t.offset = offset;
  t.grad_a = grad_a;
  t.grad_b = grad_b;
  return t;
}

Texture Texture::noise(double period, std::uint64_t seed) {
  Texture t;
  t.kind = Kind::kNoise;
  t.period = period;
  t.seed = seed;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> scale(0.5, 1.0);
  for (int i = 0; i < kNoiseWaves; ++i) {
    const double dir = angle(rng);
    const double k = 2.0 * std::numbers::pi * scale(rng) / period;
    t.waves.emplace_back(k * std::cos(dir), k * std::sin(dir), angle(rng));
  }
  return t;
}

double Texture::value(double a, double b) const {
  switch (kind) {
    case Kind::kChecker: {
      const double w = std::numbers::pi / period;
      const double norm = std::tanh(sharpness);
      return 0.5 + 0.5 * std::tanh(sharpness * std::sin(w * a)) *
                       std::tanh(sharpness * std::sin(w * b)) / (norm * norm);
    }
    case Kind::kGradient:
      return offset + grad_a * a + grad_b * b;
    case Kind::kNoise: {
      if (waves.empty()) return 0.5;
      double sum = 0.0;
      for (const Vec3& w : waves) sum += std::cos(w.x() * a + w.y() * b + w.z());
      return 0.5 + 0.5 * sum / static_cast<double>(waves.size());
    }
  }
  return 0.0;
}

TexturedPlane fronto_parallel_plane(double z, const Texture& texture) {
  TexturedPlane p;
  p.origin = Vec3(0.0, 0.0, z);
  p.texture = texture;
  return p;
}

std::vector<Vec3> checker_corners(const TexturedPlane& plane, int half_a, int half_b) {
  std::vector<Vec3> out;
  for (int j = -half_b; j <= half_b; ++j) {
    for (int i = -half_a; i <= half_a; ++i) {
      out.push_back(plane.point(i * plane.texture.period, j * plane.texture.period));
    }
  }
  return out;
}

std::optional<double> trace_ray(const Scene& scene, const Vec3& o, const Vec3& d) {
  double best = std::numeric_limits<double>::infinity();
  std::optional<double> value;
  for (const TexturedPlane& plane : scene.planes) {
    const Vec3 n = plane.normal();
    const double den = n.dot(d);
    if (std::abs(den) < 1e-15) continue;
    const double tau = n.dot(plane.origin - o) / den;
    if (!(tau > 0.0) || !(tau < best)) continue;
    const Vec3 rel = o + tau * d - plane.origin;
    const double a = rel.dot(plane.axis_a);
    const double b = rel.dot(plane.axis_b);
    if (plane.half_extent_a > 0.0 && std::abs(a) > plane.half_extent_a) continue;
    if (plane.half_extent_b > 0.0 && std::abs(b) > plane.half_extent_b) continue;
    best = tau;
    value = plane.texture.value(a, b);
  }
  return value;
}

SampledLF render_synthetic_lf(const Scene& scene, const LfIntrinsics& k,
                              const RelativePose& world_to_camera, int grid, int width, int height,
                              int jobs) {
  world_to_camera.validate();
  SampledLF lf = make_sampled_lf(k, grid, width, height);
  const RelativePose to_world = world_to_camera.inverse();
  const int cols = lf.cols();

  parallel_for(lf.images.size(), jobs, [&](std::size_t idx) {
    const int row = static_cast<int>(idx) / cols;
    const int col = static_cast<int>(idx) % cols;
    const double s = lf.s[static_cast<std::size_t>(col)];
    const double t = lf.t[static_cast<std::size_t>(row)];
    const Vec3 o = to_world.apply(Vec3(s, t, 0.0));
    Image& img = lf.images[idx];
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const Vec3 d = to_world.rotation * Vec3(lf.mapping.u(x, s), lf.mapping.v(y, t), 1.0);
        if (const auto v = trace_ray(scene, o, d)) {
          img.set(x, y, *v);
        } else {
          img.invalidate(x, y);
        }
      }
    }
  });
  return lf;
}

}  // namespace lfrect
