#include <random>

#include <benchmark/benchmark.h>

#include "lfrect/bench.hpp"
#include "lfrect/pose_solver.hpp"
#include "lfrect/rectifier.hpp"
#include "lfrect/render.hpp"
#include "lfrect/resampler.hpp"
#include "lfrect/simulator.hpp"

namespace lfrect {
namespace {

SimConfig noisy_config(double sigma) {
  SimConfig cfg;
  cfg.camera1 = table1_camera1();
  cfg.camera2 = table1_camera2();
  cfg.pose = table2_pose().pose();
  cfg.sigma = sigma;
  return cfg;
}

void BM_LinearSolve(benchmark::State& state) {
  const CorrespondenceSet set = simulate_correspondences(noisy_config(0.3), 0);
  for (auto _ : state) benchmark::DoNotOptimize(solve_linear(set));
}
BENCHMARK(BM_LinearSolve);

void BM_EstimatePose(benchmark::State& state) {
  const CorrespondenceSet set = simulate_correspondences(noisy_config(0.3), 0);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_pose(set));
}
BENCHMARK(BM_EstimatePose);

void BM_WarpRay(benchmark::State& state) {
  const RelativePose pose = table2_pose().pose();
  Ray4D r{1.0, -2.0, 0.05, -0.03};
  for (auto _ : state) {
    r = warp_ray(r, pose);
    benchmark::DoNotOptimize(r);
    r = warp_ray(r, pose.inverse());
  }
}
BENCHMARK(BM_WarpRay);

void BM_SampleLf(benchmark::State& state) {
  SampledLF lf = make_sampled_lf(table1_camera1().scaled(0.25), 13, 141, 94);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (Image& img : lf.images) {
    for (double& v : img.data) v = u(rng);
  }
  std::vector<Ray4D> rays;
  std::uniform_real_distribution<double> fs(lf.s.front(), lf.s.back());
  std::uniform_real_distribution<double> ft(lf.t.front(), lf.t.back());
  for (int i = 0; i < 1024; ++i) {
    rays.push_back({fs(rng), ft(rng), lf.mapping.u(10.0 + 120.0 * u(rng), 0.0),
                    lf.mapping.v(10.0 + 70.0 * u(rng), 0.0)});
  }
  for (auto _ : state) {
    for (const Ray4D& r : rays) benchmark::DoNotOptimize(sample_lf(lf, r));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(rays.size()));
}
BENCHMARK(BM_SampleLf);

void BM_RenderAlignedSais(benchmark::State& state) {
  const RelativePose pose = table2_pose().pose();
  Scene scene;
  scene.planes.push_back(fronto_parallel_plane(800.0, Texture::checker(60.0)));
  const LfIntrinsics kl = table1_camera2().scaled(0.25);
  const LfIntrinsics kr = table1_camera1().scaled(0.25);
  const SampledLF left = render_synthetic_lf(scene, kl, RelativePose::identity(), 13, 141, 94, 1);
  const SampledLF right = render_synthetic_lf(scene, kr, pose.inverse(), 13, 141, 94, 1);
  const RectifiedSetup setup = build_rectified_setup(pose);
  const AlignedGrid grid = plan_aligned_grid(setup, left, right);
  for (auto _ : state) benchmark::DoNotOptimize(render_aligned_sais(left, right, setup, grid, 1));
}
BENCHMARK(BM_RenderAlignedSais)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace lfrect

BENCHMARK_MAIN();
