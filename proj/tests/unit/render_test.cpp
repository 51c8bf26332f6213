#include <cmath>

#include <gtest/gtest.h>

#include "lfrect/render.hpp"
#include "lfrect/simulator.hpp"

namespace lfrect {
namespace {

TEST(Texture, Ranges) {
  const Texture c = Texture::checker(20.0);
  EXPECT_NEAR(c.value(0.0, 7.0), 0.5, 1e-15);
  EXPECT_NEAR(c.value(10.0, 10.0), 1.0, 1e-12);
  EXPECT_NEAR(c.value(30.0, 10.0), 0.0, 1e-12);
  const Texture n = Texture::noise(15.0, 4);
  const Texture n2 = Texture::noise(15.0, 4);
  for (double a = -100; a < 100; a += 7.3) {
    const double v = n.value(a, 0.5 * a);
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    EXPECT_EQ(v, n2.value(a, 0.5 * a));
  }
  EXPECT_NEAR(Texture::gradient(0.5, 0.01, -0.02).value(10.0, 5.0), 0.5, 1e-15);
}

TEST(TraceRay, NearestPlaneInFront) {
  Scene scene;
  scene.planes.push_back(fronto_parallel_plane(1000.0, Texture::gradient(0.1, 0.0, 0.0)));
  scene.planes.push_back(fronto_parallel_plane(500.0, Texture::gradient(0.2, 0.0, 0.0)));
  scene.planes.push_back(fronto_parallel_plane(-100.0, Texture::gradient(0.3, 0.0, 0.0)));
  EXPECT_EQ(trace_ray(scene, Vec3::Zero(), Vec3::UnitZ()), 0.2);
  EXPECT_EQ(trace_ray(scene, Vec3::Zero(), -Vec3::UnitZ()), 0.3);
  EXPECT_FALSE(trace_ray(scene, Vec3::Zero(), Vec3::UnitX()).has_value());
  scene.planes[1].half_extent_a = 10.0;
  scene.planes[1].half_extent_b = 10.0;
  EXPECT_EQ(trace_ray(scene, Vec3(50, 0, 0), Vec3::UnitZ()), 0.1);
}

TEST(CheckerCorners, Layout) {
  const TexturedPlane p = fronto_parallel_plane(700.0, Texture::checker(30.0));
  const auto c = checker_corners(p, 2, 1);
  ASSERT_EQ(c.size(), 15u);
  EXPECT_EQ(c.front(), Vec3(-60.0, -30.0, 700.0));
  EXPECT_EQ(c.back(), Vec3(60.0, 30.0, 700.0));
}

// An affine texture on a fronto-parallel plane makes every sub-aperture image
// affine, so neighbouring views differ by exactly the LF-point disparity.
TEST(RenderSyntheticLf, DisparityMatchesLfPointModel) {
  const LfIntrinsics k = table1_camera1().scaled(0.1);
  const double z = 900.0;
  Scene scene;
  scene.planes.push_back(fronto_parallel_plane(z, Texture::gradient(0.3, 0.004, -0.003)));
  const int w = 40, h = 30;
  const SampledLF lf = render_synthetic_lf(scene, k, RelativePose::identity(), 5, w, h);
  const double lambda = project_to_lfpoint(Vec3(0, 0, z), k).lambda;
  const Image& c = lf.image(2, 2);
  double worst = 0.0;
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      const Image& img = lf.image(i, j);
      for (int y = 1; y < h - 1; y += 3) {
        for (int x = 1; x < w - 1; x += 3) {
          const double gx = c.at(x + 1, y) - c.at(x, y);
          const double gy = c.at(x, y + 1) - c.at(x, y);
          // I_ij(x, y) = I_c(x - (j - 2) lambda, y - (i - 2) lambda)
          const double expect = c.at(x, y) - (j - 2) * lambda * gx - (i - 2) * lambda * gy;
          worst = std::max(worst, std::abs(img.at(x, y) - expect));
        }
      }
    }
  }
  EXPECT_LE(worst, 1e-9);
}

TEST(RenderSyntheticLf, MissesAreMasked) {
  Scene scene;
  TexturedPlane p = fronto_parallel_plane(800.0, Texture::checker(40.0));
  p.half_extent_a = 50.0;
  p.half_extent_b = 50.0;
  scene.planes.push_back(p);
  const LfIntrinsics k = table1_camera1().scaled(0.1);
  const SampledLF lf = render_synthetic_lf(scene, k, RelativePose::identity(), 3, 54, 37);
  const Image& img = lf.image(1, 1);
  EXPECT_FALSE(img.valid(0, 0));
  EXPECT_TRUE(img.valid(static_cast<int>(k.cx), static_cast<int>(k.cy)));
  EXPECT_LT(img.valid_count(), img.data.size());
}

TEST(RenderSyntheticLf, JobsDoNotChangePixels) {
  Scene scene;
  scene.planes.push_back(fronto_parallel_plane(800.0, Texture::noise(25.0, 9)));
  const LfIntrinsics k = table1_camera2().scaled(0.1);
  const RelativePose pose{rotation_from_euler_xyz_deg(1, 2, 3), Vec3(10, 0, 0)};
  const SampledLF a = render_synthetic_lf(scene, k, pose, 5, 56, 37, 1);
  const SampledLF b = render_synthetic_lf(scene, k, pose, 5, 56, 37, 3);
  for (std::size_t i = 0; i < a.images.size(); ++i) EXPECT_EQ(a.images[i].data, b.images[i].data);
}

}  // namespace
}  // namespace lfrect
