// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cli.hpp"
#include "lfrect/bench.hpp"
#include "lfrect/io.hpp"
#include "lfrect/pose_solver.hpp"
#include "lfrect/rectifier.hpp"
#include "lfrect/resampler.hpp"
#include "lfrect/simulator.hpp"
#include "scenario.hpp"
#include "support.hpp"

namespace lfrect {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + std::string("FAILED ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

SimConfig config_for(const PosePreset& p, double sigma, int trials) {
  SimConfig cfg;
  cfg.camera1 = table1_camera1();
  cfg.camera2 = table1_camera2();
  cfg.pose = p.pose();
  cfg.sigma = sigma;
  cfg.trials = trials;
  cfg.seed = 1;
  return cfg;
}

std::vector<PosePreset> all_presets() {
  std::vector<PosePreset> out{table2_pose()};
  for (const PosePreset& p : table3_poses()) out.push_back(p);
  return out;
}

// 1 ---------------------------------------------------------------------
Outcome zero_noise() {
  Outcome o;
  double worst_r = 0.0, worst_t = 0.0, worst_time = 0.0;
  for (const PosePreset& p : all_presets()) {
    const auto t0 = Clock::now();
    const SimConfig cfg = config_for(p, 0.0, 1);
    const PoseEstimate e = estimate_pose(simulate_correspondences(cfg, 0));
    const double secs = seconds_since(t0);
    const double er = angular_error_rotation(cfg.pose.rotation, e.pose.rotation);
    const double et = angular_error_translation(cfg.pose.translation, e.pose.translation);
    o.check(er <= 1e-6 && et <= 1e-6, p.name + " error");
    o.check(secs <= 1.0, p.name + " runtime");
    worst_r = std::max(worst_r, er);
    worst_t = std::max(worst_t, et);
    worst_time = std::max(worst_time, secs);
  }
  o.note(fmt("worst Err_R %.2e deg, Err_T %.2e deg, slowest %.3f s", worst_r, worst_t, worst_time));
  return o;
}

bool within_factor(double v, double ref, double f = 2.0) { return v >= ref / f && v <= ref * f; }

// 2 ---------------------------------------------------------------------
Outcome table2() {
  Outcome o;
  const std::vector<double> sigmas{0.1, 0.2, 0.3, 0.4, 0.5};
  std::vector<TrialReport> reps;
  double slowest = 0.0;
  for (double s : sigmas) {
    const auto t0 = Clock::now();
    reps.push_back(run_trials(config_for(table2_pose(), s, 100)));
    slowest = std::max(slowest, seconds_since(t0));
  }
  for (std::size_t i = 1; i < reps.size(); ++i) {
    o.check(reps[i].mean_err_r >= reps[i - 1].mean_err_r, fmt("Err_R monotone at sigma %g", sigmas[i]));
    o.check(reps[i].mean_err_t >= reps[i - 1].mean_err_t, fmt("Err_T monotone at sigma %g", sigmas[i]));
  }
  o.check(within_factor(reps[0].mean_err_r, 0.0275), "sigma 0.1 Err_R band");
  o.check(within_factor(reps[0].mean_err_t, 0.1355), "sigma 0.1 Err_T band");
  o.check(within_factor(reps[4].mean_err_r, 0.2024), "sigma 0.5 Err_R band");
  o.check(within_factor(reps[4].mean_err_t, 0.7511), "sigma 0.5 Err_T band");
  o.check(slowest <= 120.0, "runtime");
  std::string row;
  for (std::size_t i = 0; i < reps.size(); ++i) {
    row += fmt("%s%g: %.4f/%.4f", i ? ", " : "", sigmas[i], reps[i].mean_err_r, reps[i].mean_err_t);
  }
  o.note("sigma: Err_R/Err_T deg " + row);
  o.note(fmt("reference 0.1: 0.0275/0.1355, 0.5: 0.2024/0.7511; slowest sigma %.1f s", slowest));
  return o;
}

// 3 ---------------------------------------------------------------------
Outcome table3() {
  Outcome o;
  const double reference[4][2] = {{0.0713, 0.5083}, {0.1340, 0.4649}, {0.0628, 0.5162}, {0.1237, 0.4730}};
  const auto poses = table3_poses();
  std::vector<TrialReport> reps;
  std::string row;
  for (std::size_t i = 0; i < poses.size(); ++i) {
    reps.push_back(run_trials(config_for(poses[i], 0.3, 100)));
    o.check(within_factor(reps[i].mean_err_r, reference[i][0]), poses[i].name + " Err_R band");
    o.check(within_factor(reps[i].mean_err_t, reference[i][1]), poses[i].name + " Err_T band");
    row += fmt("%s%s %.4f/%.4f (reference %.4f/%.4f)", i ? ", " : "", poses[i].name.c_str(),
               reps[i].mean_err_r, reps[i].mean_err_t, reference[i][0], reference[i][1]);
  }
  // Rotation error grows from T1 to T2 at fixed R.
  o.check(reps[1].mean_err_r > reps[0].mean_err_r, "R1 rotation ordering T1 < T2");
  o.check(reps[3].mean_err_r > reps[2].mean_err_r, "R2 rotation ordering T1 < T2");
  o.note(row);
  return o;
}

// 4 ---------------------------------------------------------------------
Outcome solver_internals() {
  Outcome o;
  double q_res = 0.0, dlt_res = 0.0, t_res = 0.0, jac_rel = 0.0;
  bool monotone = true;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::mt19937_64 rng(seed);
    const RelativePose pose = test::random_pose(rng);
    const CorrespondenceSet set = test::exact_set(test::random_points(rng, pose, 60), pose);
    std::vector<LfPoint> a, b;
    for (const auto& c : set.pairs) {
      a.push_back(c.first);
      b.push_back(c.second);
    }
    const NormalizationTransform n1 = normalize_points(a).transform;
    const NormalizationTransform n2 = normalize_points(b).transform;
    const Mat4 w = n2.matrix() * set.camera2.matrix_h() * pose.matrix() *
                   set.camera1.matrix_h_inverse() * n1.inverse_matrix();
    const Eigen::Matrix<double, 16, 1> wv = vec_row_major(w);
    const Eigen::MatrixXd q = constraint_matrix(set.camera1, set.camera2, n1, n2);
    const Eigen::VectorXd x = q.colPivHouseholderQr().solve(wv);
    q_res = std::max(q_res, (q * x - wv).norm() / wv.norm());

    const Eigen::MatrixXd dlt = build_dlt_system(set, n1, n2);
    dlt_res = std::max(dlt_res, (dlt * wv).norm() / (dlt.norm() * wv.norm()));

    const TranslationSystem ts = build_translation_system(set);
    const Eigen::Map<const Eigen::Matrix<double, 9, 1>> vr(pose.rotation.data());
    t_res = std::max(t_res, (ts.a_r * vr + ts.a_t * pose.translation).norm() /
                                (ts.a_r.norm() + ts.a_t.norm() * pose.translation.norm()));

    RelativePose p = pose;
    p.rotation = so3_exp(Vec3(0.01, -0.02, 0.015)) * p.rotation;
    p.translation += Vec3(3.0, -2.0, 4.0);
    const Eigen::MatrixXd jac = reprojection_jacobian(set, p);
    const double h = 1e-6;
    for (int k = 0; k < 6; ++k) {
      RelativePose pa = p, pb = p;
      if (k < 3) {
        Vec3 dw = Vec3::Zero();
        dw(k) = h;
        pa.rotation = so3_exp(dw) * p.rotation;
        pb.rotation = so3_exp(-dw) * p.rotation;
      } else {
        pa.translation(k - 3) += h;
        pb.translation(k - 3) -= h;
      }
      const Eigen::VectorXd fd =
          (reprojection_residuals(set, pa) - reprojection_residuals(set, pb)) / (2 * h);
      jac_rel = std::max(jac_rel, (jac.col(k) - fd).norm() / fd.norm());
    }

    CorrespondenceSet noisy = set;
    std::normal_distribution<double> nd(0.0, 0.3);
    for (auto& c : noisy.pairs) {
      c.second.u_c += nd(rng);
      c.second.v_c += nd(rng);
    }
    const RefineResult r = refine_pose(noisy, p);
    for (const RefineIteration& it : r.trace) {
      if (it.accepted && it.cost_after > it.cost_before) monotone = false;
    }
    if (r.final_cost > r.initial_cost) monotone = false;
  }
  o.check(q_res <= 1e-10, "Q consistency");
  o.check(dlt_res <= 1e-10, "DLT residual");
  o.check(t_res <= 1e-10, "A_R/A_T residual");
  o.check(jac_rel <= 1e-5, "Jacobian");
  o.check(monotone, "LM monotonicity");
  o.note(fmt("Q %.1e, DLT %.1e, A_R/A_T %.1e, Jacobian %.1e rel, LM monotone %s", q_res, dlt_res,
             t_res, jac_rel, monotone ? "yes" : "no"));
  return o;
}

// 5 ---------------------------------------------------------------------
Outcome rectifier_suite() {
  Outcome o;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> st(-20.0, 20.0), uv(-0.5, 0.5);
  double closed = 0.0, trip = 0.0, ortho = 0.0, det = 0.0, horiz = 0.0, tri = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const RelativePose pose = test::random_pose(rng);
    const Ray4D r{st(rng), st(rng), uv(rng), uv(rng)};
    const Ray4D a = warp_ray(r, pose);
    closed = std::max(closed, (a.vec() - warp_ray_geometric(r, pose).vec()).cwiseAbs().maxCoeff());
    trip = std::max(trip, (warp_ray(a, pose.inverse()).vec() - r.vec()).cwiseAbs().maxCoeff());
    if (pose.translation.norm() < 1.0) continue;
    const Mat3 rr = rectifying_rotation(pose);
    ortho = std::max(ortho, (rr * rr.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff());
    det = std::max(det, std::abs(rr.determinant() - 1.0));
    const Vec3 rt = rr * pose.translation;
    horiz = std::max(horiz, std::hypot(rt.y(), rt.z()) / pose.translation.norm());
  }
  for (int i = 0; i < 50; ++i) {
    const RelativePose pose = test::random_pose(rng, 25.0, 120.0);
    if (pose.translation.norm() < 1.0) continue;
    const RectifiedSetup s = build_rectified_setup(pose);
    const Vec3 x2(0.3 * st(rng) * 10, 0.3 * st(rng) * 10, 900.0 + 5 * st(rng));
    const Vec3 x1 = pose.inverse().apply(x2);
    if (x1.z() < 100.0) continue;
    const Vec3 target = s.to_common(LfSide::kLeft).apply(x2);
    for (int j = -3; j <= 3; ++j) {
      for (LfSide side : {LfSide::kLeft, LfSide::kRight}) {
        const Vec3 x = side == LfSide::kLeft ? x2 : x1;
        const Vec3 org(0.3 * j, -0.2 * j, 0.0);
        const Vec3 d = (x - org) / x.z();
        const Ray4D q = warp_lf_to_common({org.x(), org.y(), d.x(), d.y()}, side, s);
        const Vec3 o3(q.s, q.t, 0.0);
        const Vec3 dir = Vec3(q.u, q.v, 1.0).normalized();
        tri = std::max(tri, ((target - o3) - dir * dir.dot(target - o3)).norm());
      }
    }
  }
  o.check(closed <= 1e-10, "closed form vs geometric");
  o.check(trip <= 1e-9, "round trip");
  o.check(ortho <= 1e-9 && det <= 1e-9, "R_rect orthonormal");
  o.check(horiz <= 1e-9, "R_rect T horizontal");
  o.check(tri <= 1e-8, "triangulation");
  o.note(fmt("closed/geometric %.1e, round trip %.1e, orthonormality %.1e, det %.1e, "
             "horizontality %.1e, triangulation %.1e mm",
             closed, trip, ortho, det, horiz, tri));
  return o;
}

// 6 ---------------------------------------------------------------------
Outcome resampler_suite() {
  Outcome o;
  SampledLF lf = make_sampled_lf(table1_camera1().scaled(0.05), 4, 12, 10);
  lf.s = {-1.0, -0.3, 0.4, 2.0};
  lf.t = {-0.8, 0.1, 0.5, 1.7};
  const Eigen::Vector4d g(0.7, -1.3, 2.1, 0.45);
  const auto field = [&](const Ray4D& r) { return 0.2 + g.dot(r.vec()); };
  for (int r = 0; r < lf.rows(); ++r) {
    for (int c = 0; c < lf.cols(); ++c) {
      const double s = lf.s[static_cast<std::size_t>(c)], t = lf.t[static_cast<std::size_t>(r)];
      for (int y = 0; y < lf.height; ++y) {
        for (int x = 0; x < lf.width; ++x) {
          lf.image(r, c).set(x, y, field({s, t, lf.mapping.u(x, s), lf.mapping.v(y, t)}));
        }
      }
    }
  }
  bool nodes = true;
  for (int r = 0; r < lf.rows(); ++r) {
    for (int c = 0; c < lf.cols(); ++c) {
      const double s = lf.s[static_cast<std::size_t>(c)], t = lf.t[static_cast<std::size_t>(r)];
      for (int y = 0; y < lf.height; ++y) {
        for (int x = 0; x < lf.width; ++x) {
          const auto v = sample_lf(lf, {s, t, lf.mapping.u(x, s), lf.mapping.v(y, t)});
          nodes = nodes && v && *v == lf.image(r, c).at(x, y);
        }
      }
    }
  }
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> us(-1.0, 2.0), ut(-0.8, 1.7), ux(0.5, 10.0), uy(0.5, 8.0);
  double affine = 0.0;
  for (int i = 0; i < 5000; ++i) {
    const Ray4D q{us(rng), ut(rng), lf.mapping.u(ux(rng), 0.0), lf.mapping.v(uy(rng), 0.0)};
    if (const auto v = sample_lf(lf, q)) affine = std::max(affine, std::abs(*v - field(q)));
  }
  o.check(nodes, "node reproduction");
  o.check(affine <= 1e-12, "affine exactness");

  double spread = 0.0, epi_res = 0.0, epi_slope = 0.0;
  int rows = 0, fits_total = 0, fits_wide = 0;
  for (const RelativePose& pose : {RelativePose{rotation_from_euler_xyz_deg(5, 20, 5), Vec3(80, 5, 5)},
                                   RelativePose{rotation_from_euler_xyz_deg(5, 15, 5), Vec3(50, 0, 0)}}) {
    const test::RectScenario sc = test::make_rect_scenario(pose);
    const ScanlineReport rep = measure_scanline_alignment(sc.rect, test::common_corners(sc));
    spread = std::max(spread, rep.max_spread);
    rows += rep.rows_checked;
    o.check(rep.rows_checked > 0, "scan-line rows tracked");
    for (int row_v : {sc.rect.height / 3, sc.rect.height / 2, 2 * sc.rect.height / 3}) {
      for (const auto& f : test::epi_edge_fits(sc, sc.rect.rows() / 2, row_v)) {
        epi_res = std::max(epi_res, f.max_residual);
        ++fits_total;
        if (f.span < 0.5 * (sc.rect.s.back() - sc.rect.s.front())) continue;
        epi_slope = std::max(epi_slope, std::abs(f.slope / f.analytic_slope - 1.0));
        ++fits_wide;
      }
    }
  }
  o.check(spread <= 0.1, "scan-line residual");
  o.check(fits_total > 0, "EPI lines found");
  o.check(fits_wide > 0, "EPI lines spanning both light fields");
  o.check(epi_res <= 0.5, "EPI line fit");
  o.check(epi_slope <= 0.02, "EPI slope");
  o.note(fmt("nodes exact %s, affine %.1e, scan-line spread %.3f px over %d rows, "
             "EPI residual %.3f px over %d lines, slope error %.2f%% over %d two-camera lines",
             nodes ? "yes" : "no", affine, spread, rows, epi_res, fits_total, 100 * epi_slope, fits_wide));
  return o;
}

// 7 ---------------------------------------------------------------------
Outcome determinism() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / "lfrect_acceptance_bench";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_text_file(dir / "spec.json", "{\"scenario\": \"table2\", \"seed\": 11}\n");
  std::ostringstream err;
  std::vector<std::string> outs;
  for (const char* jobs : {"1", "1", "4"}) {
    const std::string out = (dir / ("run" + std::to_string(outs.size()) + ".csv")).string();
    const int rc = cli::run({"lfrect", "bench", (dir / "spec.json").string(), "--jobs", jobs,
                             "--out", out},
                            err);
    o.check(rc == 0, "bench exit code");
    outs.push_back(rc == 0 ? read_text_file(out) : std::string());
  }
  o.check(!outs[0].empty() && outs[0] == outs[1], "identical across runs");
  o.check(!outs[0].empty() && outs[0] == outs[2], "identical across --jobs");
  o.note(fmt("3 table2 runs (jobs 1, 1, 4), %zu bytes each", outs[0].size()));
  fs::remove_all(dir);
  return o;
}

}  // namespace
}  // namespace lfrect

int main() {
  using namespace lfrect;
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"1 zero-noise exactness", zero_noise},
      {"2 noise-level table reproduction", table2},
      {"3 relative-pose table reproduction", table3},
      {"4 solver-internals oracles", solver_internals},
      {"5 rectifier properties", rectifier_suite},
      {"6 resampler properties", resampler_suite},
      {"7 bench determinism", determinism},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s criterion %s (%.1f s): %s\n", o.pass ? "PASS" : "FAIL", c.name,
                seconds_since(t0), o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
