#pragma once

#include <random>
#include <vector>

#include "lfrect/geometry.hpp"
#include "lfrect/pose_solver.hpp"
#include "lfrect/simulator.hpp"

namespace lfrect::test {

inline RelativePose random_pose(std::mt19937_64& rng, double max_deg = 30.0,
                                double max_t = 150.0) {
  std::uniform_real_distribution<double> a(-max_deg, max_deg);
  std::uniform_real_distribution<double> t(-max_t, max_t);
  return {rotation_from_euler_xyz_deg(a(rng), a(rng), a(rng)), Vec3(t(rng), t(rng), t(rng))};
}

/// Points in front of both cameras, spread over a volume (non-coplanar).
inline std::vector<Vec3> random_points(std::mt19937_64& rng, const RelativePose& pose,
                                       std::size_t n) {
  std::uniform_real_distribution<double> xy(-250.0, 250.0);
  std::uniform_real_distribution<double> z(700.0, 1300.0);
  std::vector<Vec3> out;
  while (out.size() < n) {
    const Vec3 p(xy(rng), xy(rng), z(rng));
    if (pose.apply(p).z() > 100.0) out.push_back(p);
  }
  return out;
}

inline CorrespondenceSet exact_set(const std::vector<Vec3>& pts, const RelativePose& pose,
                                   const LfIntrinsics& k1 = table1_camera1(),
                                   const LfIntrinsics& k2 = table1_camera2()) {
  CorrespondenceSet set;
  set.camera1 = k1;
  set.camera2 = k2;
  for (const Vec3& p : pts) {
    set.pairs.push_back({project_to_lfpoint(p, k1), project_to_lfpoint(pose.apply(p), k2)});
  }
  return set;
}

}  // namespace lfrect::test
