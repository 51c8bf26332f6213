#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "lfrect/bench.hpp"
#include "lfrect/errors.hpp"
#include "lfrect/io.hpp"
#include "lfrect/pose_solver.hpp"
#include "lfrect/rectifier.hpp"
#include "lfrect/render.hpp"
#include "lfrect/resampler.hpp"
#include "lfrect/simulator.hpp"

namespace lfrect::cli {
namespace {

using nlohmann::json;

struct Common {
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::string out;
  bool verbose = false;
};

void add_common(CLI::App* cmd, Common& c, bool out_required = true) {
  cmd->add_option("--seed", c.seed, "Base seed (overrides the input file)");
  cmd->add_option("--jobs", c.jobs, "Worker threads")->check(CLI::PositiveNumber);
  auto* out = cmd->add_option("--out", c.out, "Output path");
  if (out_required) out->required();
  cmd->add_flag("--verbose", c.verbose, "Progress on stderr");
}

bool is_config_error(ErrorCode code) {
  return code == ErrorCode::kParseError || code == ErrorCode::kIoError ||
         code == ErrorCode::kInvalidArgument;
}

json vec_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json pose_block(const RelativePose& p) {
  json r = json::array();
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) r.push_back(p.rotation(i, k));
  }
  return {{"R", r}, {"T", vec_json(p.translation)}};
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  Common common;
  std::string config;
  int trial = 0;
  bool report = false;
  bool render = false;
  double render_scale = 0.25;
  double plane_depth = 800.0;
  double checker_mm = 60.0;
};

int simulate(const SimulateArgs& a, std::ostream& err) {
  SimConfig cfg;
  try {
    cfg = load_sim_config(a.config);
    if (a.common.seed) cfg.seed = *a.common.seed;
    if (cfg.board_poses.empty()) cfg.board_poses = default_board_poses(cfg.pose);
    if (a.trial < 0) fail(ErrorCode::kInvalidArgument, "--trial must be >= 0");
    if (a.render && !(a.render_scale > 0.0 && a.plane_depth > 0.0 && a.checker_mm > 0.0)) {
      fail(ErrorCode::kInvalidArgument, "render parameters must be positive");
    }
  } catch (const Error& e) {
    err << "simulate: " << e.what() << "\n";
    return is_config_error(e.code()) ? kConfigError : kFailure;
  }

  const fs::path out = a.common.out;
  try {
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) fail(ErrorCode::kIoError, "cannot create " + out.string() + ": " + ec.message());
    save_intrinsics(out / "intrinsics.json", {cfg.camera1, cfg.camera2});
    write_text_file(out / "ground_truth.json", sim_config_to_json(cfg));
    save_pose(out / "pose.json", cfg.pose);
  } catch (const Error& e) {
    err << "simulate: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    const CorrespondenceSet set = simulate_correspondences(cfg, a.trial);
    save_correspondences(out / "correspondences.csv", set);
    if (a.common.verbose) {
      err << "simulate: " << set.size() << " correspondences, sigma " << cfg.sigma << " px\n";
    }
    if (a.report) {
      const TrialReport rep = run_trials(cfg, a.common.jobs);
      write_text_file(out / "trials.csv", trial_report_csv(rep));
      if (a.common.verbose) {
        err << "simulate: mean err_R " << rep.mean_err_r << " deg, err_T " << rep.mean_err_t
            << " deg over " << rep.trials.size() - static_cast<std::size_t>(rep.failures)
            << " trials\n";
      }
    }
    if (a.render) {
      const LfIntrinsics k2 = cfg.camera2.scaled(a.render_scale);
      const LfIntrinsics k1 = cfg.camera1.scaled(a.render_scale);
      Scene scene;
      scene.planes.push_back(fronto_parallel_plane(a.plane_depth, Texture::checker(a.checker_mm)));
      const int g = cfg.sai_grid;
      const SampledLF left = render_synthetic_lf(scene, k2, RelativePose::identity(), g,
                                                 static_cast<int>(2.0 * k2.cx),
                                                 static_cast<int>(2.0 * k2.cy), a.common.jobs);
      const SampledLF right = render_synthetic_lf(scene, k1, cfg.pose.inverse(), g,
                                                  static_cast<int>(2.0 * k1.cx),
                                                  static_cast<int>(2.0 * k1.cy), a.common.jobs);
      save_sampled_lf(out / "left_lf", left);
      save_sampled_lf(out / "right_lf", right);
      save_scene(out / "scene.json", scene);
      if (a.common.verbose) {
        err << "simulate: rendered " << g << "x" << g << " light fields of " << left.width << "x"
            << left.height << " and " << right.width << "x" << right.height << " px\n";
      }
    }
  } catch (const Error& e) {
    err << "simulate: " << e.what() << "\n";
    return e.code() == ErrorCode::kIoError ? kConfigError : kGenerationError;
  }
  return kOk;
}

// ---------------------------------------------------------------- estimate

struct EstimateArgs {
  Common common;
  std::string points;
  std::string intrinsics;
  bool no_refine = false;
};

int estimate(const EstimateArgs& a, std::ostream& err) {
  CorrespondenceSet set;
  try {
    set = load_correspondences(a.points, load_intrinsics(a.intrinsics));
    set.validate();
  } catch (const Error& e) {
    err << "estimate: " << e.what() << "\n";
    return is_config_error(e.code()) ? kConfigError : kFailure;
  }

  PoseEstimate est;
  try {
    const DegeneracyReport deg = detect_degeneracy(set);
    if (deg.coplanar) {
      err << "estimate: correspondences are coplanar: plane n = [" << deg.plane_normal.x() << ", "
          << deg.plane_normal.y() << ", " << deg.plane_normal.z() << "], n.x = "
          << deg.plane_distance << " mm, rms " << deg.residual_rms << " mm\n";
      return kCoplanar;
    }
    EstimateOptions opt;
    opt.refine = !a.no_refine;
    est = estimate_pose(set, opt);
  } catch (const Error& e) {
    err << "estimate: " << e.what() << "\n";
    return e.code() == ErrorCode::kCoplanarDegeneracy ? kCoplanar : kFailure;
  }

  json j = json::parse(pose_to_json(est.pose));
  const DegeneracyReport& d = est.degeneracy;
  j["degeneracy"] = {{"coplanar", d.coplanar},
                     {"plane_normal", vec_json(d.plane_normal)},
                     {"plane_distance_mm", d.plane_distance},
                     {"residual_rms_mm", d.residual_rms},
                     {"scene_diameter_mm", d.scene_diameter}};
  j["singular_values"] = vec_json(est.linear.singular_values);
  j["linear"] = pose_block(est.linear_pose);
  j["linear_cost_px2"] = est.linear_cost;
  const RefineResult& r = est.refinement;
  json trace = json::array();
  for (const RefineIteration& it : r.trace) {
    trace.push_back({{"cost_before", it.cost_before},
                     {"cost_after", it.cost_after},
                     {"damping", it.damping},
                     {"accepted", it.accepted}});
  }
  j["refinement"] = {{"enabled", !a.no_refine},
                     {"initial_cost_px2", r.initial_cost},
                     {"final_cost_px2", a.no_refine ? est.linear_cost : r.final_cost},
                     {"iterations", r.iterations},
                     {"converged", r.converged},
                     {"stop_reason", r.stop_reason},
                     {"trace", trace}};
  try {
    write_text_file(a.common.out, j.dump(2) + "\n");
  } catch (const Error& e) {
    err << "estimate: " << e.what() << "\n";
    return kConfigError;
  }
  if (a.common.verbose) {
    err << "estimate: " << set.size() << " pairs, linear cost " << est.linear_cost
        << " px^2, final cost " << (a.no_refine ? est.linear_cost : r.final_cost) << " px^2\n";
  }
  return kOk;
}

// ----------------------------------------------------------------- rectify

struct RectifyArgs {
  Common common;
  std::vector<std::string> inputs;
  std::string setup;
  std::string scene;
};

std::vector<Vec3> scene_corners(const Scene& scene, const RectifiedSetup& setup) {
  std::vector<Vec3> out;
  const RelativePose to_common = setup.to_common(LfSide::kLeft);
  for (const TexturedPlane& p : scene.planes) {
    if (p.texture.kind != Texture::Kind::kChecker) continue;
    const auto half = [&](double extent) {
      if (extent <= 0.0) return 8;
      return static_cast<int>(std::floor(extent / p.texture.period));
    };
    for (const Vec3& c : checker_corners(p, half(p.half_extent_a), half(p.half_extent_b))) {
      out.push_back(to_common.apply(c));
    }
  }
  return out;
}

int rectify(const RectifyArgs& a, std::ostream& err) {
  const bool have_setup = !a.setup.empty();
  const std::size_t want = have_setup ? 2 : 3;
  if (a.inputs.size() != want) {
    err << "rectify: expected " << (have_setup ? "LEFT RIGHT" : "POSE LEFT RIGHT") << "\n";
    return kConfigError;
  }
  RectifiedSetup setup;
  SampledLF left;
  SampledLF right;
  std::optional<Scene> scene;
  try {
    if (have_setup) {
      setup = load_setup(a.setup);
    } else {
      const RelativePose pose = load_pose(a.inputs[0]);
      pose.validate();
      try {
        setup = build_rectified_setup(pose);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kZeroBaseline) throw;
        setup = RectifiedSetup::identity();
        if (a.common.verbose) err << "rectify: zero baseline, keeping both parameterizations\n";
      }
    }
    left = load_sampled_lf(a.inputs[want - 2]);
    right = load_sampled_lf(a.inputs[want - 1]);
    if (!a.scene.empty()) scene = load_scene(a.scene);
  } catch (const Error& e) {
    err << "rectify: " << e.what() << "\n";
    return is_config_error(e.code()) ? kConfigError : kFailure;
  }

  try {
    const AlignedGrid grid = plan_aligned_grid(setup, left, right);
    if (a.common.verbose) {
      err << "rectify: " << grid.rows.size() << " x " << grid.columns.size()
          << " aligned sub-apertures, " << grid.mixed_rows() << " mixed rows\n";
    }
    const SampledLF rect = render_aligned_sais(left, right, setup, grid, a.common.jobs);
    const fs::path out = a.common.out;
    save_sampled_lf(out / "lf", rect);
    write_text_file(out / "grid.json", grid_to_json(grid));
    save_setup(out / "setup.json", setup);
    if (scene) {
      const ScanlineReport rep = measure_scanline_alignment(rect, scene_corners(*scene, setup));
      const json j = {{"max_vertical_spread_px", rep.max_spread},
                      {"tracked_detections", rep.tracked},
                      {"rows_checked", rep.rows_checked}};
      write_text_file(out / "scanline.json", j.dump(2) + "\n");
      err << "rectify: scan-line spread " << rep.max_spread << " px over " << rep.rows_checked
          << " rows (" << rep.tracked << " detections)\n";
    }
  } catch (const Error& e) {
    err << "rectify: " << e.what() << "\n";
    if (e.code() == ErrorCode::kNoOverlap) return kNoOverlap;
    return e.code() == ErrorCode::kIoError ? kConfigError : kFailure;
  }
  return kOk;
}

// --------------------------------------------------------------------- epi

struct EpiArgs {
  Common common;
  std::string dir;
  std::optional<int> row;
  int line = 0;
};

int epi(const EpiArgs& a, std::ostream& err) {
  SampledLF lf;
  try {
    lf = load_sampled_lf(a.dir);
  } catch (const Error& e) {
    err << "epi: " << e.what() << "\n";
    return is_config_error(e.code()) ? kConfigError : kFailure;
  }
  try {
    const Image img = extract_epi(lf, a.row.value_or(lf.rows() / 2), a.line);
    fs::path out = a.common.out;
    write_pgm16(out, img);
    write_pbm(fs::path(out).replace_extension(".pbm"), img);
  } catch (const Error& e) {
    err << "epi: " << e.what() << "\n";
    return e.code() == ErrorCode::kIndexOutOfRange || is_config_error(e.code()) ? kConfigError
                                                                                 : kFailure;
  }
  return kOk;
}

// ------------------------------------------------------------------- bench

struct BenchArgs {
  Common common;
  std::string spec;
};

int bench(const BenchArgs& a, std::ostream& err) {
  BenchSpec spec;
  try {
    spec = parse_bench_spec(read_text_file(a.spec), a.spec);
    if (a.common.seed) spec.seed = *a.common.seed;
  } catch (const Error& e) {
    err << "bench: " << e.what() << "\n";
    return is_config_error(e.code()) ? kConfigError : kFailure;
  }
  try {
    const std::vector<BenchRow> rows = run_bench(spec, a.common.jobs);
    const fs::path out = a.common.out;
    write_text_file(out, bench_csv(rows));
    write_text_file(fs::path(out).replace_extension(".dat"), bench_gnuplot(rows));
    if (a.common.verbose) {
      for (const BenchRow& r : rows) {
        err << "bench: " << r.label << " err_R " << r.report.mean_err_r << " err_T "
            << r.report.mean_err_t << " failures " << r.report.failures << "\n";
      }
    }
  } catch (const Error& e) {
    err << "bench: " << e.what() << "\n";
    return e.code() == ErrorCode::kIoError ? kConfigError : kGenerationError;
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& err) {
  CLI::App app{"Relative pose estimation and rectification of two plenoptic cameras", "lfrect"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Synthetic correspondences (and light fields)");
  c_sim->add_option("config", sim.config, "Simulation config JSON")->required();
  c_sim->add_option("--trial", sim.trial, "Trial index whose noise draw is written");
  c_sim->add_flag("--report", sim.report, "Also run all trials and write trials.csv");
  c_sim->add_flag("--render-lf", sim.render, "Render left_lf/, right_lf/ and scene.json");
  c_sim->add_option("--render-scale", sim.render_scale, "Image scale of the rendered light fields");
  c_sim->add_option("--plane-depth", sim.plane_depth, "Depth of the rendered checker plane (mm)");
  c_sim->add_option("--checker-mm", sim.checker_mm, "Checker square size (mm)");
  add_common(c_sim, sim.common);

  EstimateArgs est;
  auto* c_est = app.add_subcommand("estimate", "Relative pose from LF-point correspondences");
  c_est->add_option("points", est.points, "Correspondence CSV")->required();
  c_est->add_option("intrinsics", est.intrinsics, "Intrinsics JSON")->required();
  c_est->add_flag("--no-refine", est.no_refine, "Stop after the linear solution");
  add_common(c_est, est.common);

  RectifyArgs rec;
  auto* c_rec = app.add_subcommand("rectify", "Row-aligned sub-apertures of two light fields");
  c_rec->add_option("inputs", rec.inputs, "POSE LEFT RIGHT, or LEFT RIGHT with --setup")
      ->required();
  c_rec->add_option("--setup", rec.setup, "Rectified setup JSON instead of a pose");
  c_rec->add_option("--scene", rec.scene, "Scene JSON (left frame) for the scan-line report");
  add_common(c_rec, rec.common);

  EpiArgs ep;
  auto* c_epi = app.add_subcommand("epi", "Epipolar-plane image of a rectified light field");
  c_epi->add_option("dir", ep.dir, "Light-field directory")->required();
  c_epi->add_option("--row", ep.row, "Sub-aperture row (default: central)");
  c_epi->add_option("--line", ep.line, "Pixel row")->required();
  add_common(c_epi, ep.common);

  BenchArgs be;
  auto* c_bench = app.add_subcommand("bench", "Monte-Carlo error tables");
  c_bench->add_option("spec", be.spec, "Bench spec JSON")->required();
  add_common(c_bench, be.common);

  std::vector<std::string> rev(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(rev.begin(), rev.end());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    err << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    err << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "lfrect: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    if (c_sim->parsed()) return simulate(sim, err);
    if (c_est->parsed()) return estimate(est, err);
    if (c_rec->parsed()) return rectify(rec, err);
    if (c_epi->parsed()) return epi(ep, err);
    if (c_bench->parsed()) return bench(be, err);
  } catch (const std::exception& e) {
    err << "lfrect: " << e.what() << "\n";
  }
  return kFailure;
}

}  // namespace lfrect::cli
