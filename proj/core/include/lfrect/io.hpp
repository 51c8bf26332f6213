#pragma once

// File formats: JSON for intrinsics, poses, rectified setups, simulation
// configs and scenes; CSV for correspondences and trial reports; 16-bit PGM
// sub-aperture images with PBM validity masks.
//
// Rotations are stored row-major as 9 numbers. Euler angles, where accepted,
// are intrinsic x-y-z in degrees: R = Rx(a) Ry(b) Rz(c).

#include <filesystem>
#include <string>

#include "lfrect/geometry.hpp"
#include "lfrect/pose_solver.hpp"
#include "lfrect/rectifier.hpp"
#include "lfrect/render.hpp"
#include "lfrect/resampler.hpp"
#include "lfrect/simulator.hpp"

namespace lfrect {

namespace fs = std::filesystem;

/// Throws kIoError.
[[nodiscard]] std::string read_text_file(const fs::path& path);
void write_text_file(const fs::path& path, const std::string& content);

struct IntrinsicsPair {
  LfIntrinsics camera1;
  LfIntrinsics camera2;
};

/// JSON parse failures throw kParseError with "path:line:column: reason".
[[nodiscard]] IntrinsicsPair load_intrinsics(const fs::path& path);
void save_intrinsics(const fs::path& path, const IntrinsicsPair& pair);

/// Accepts {"R": [9], "T": [3]} or {"euler_xyz_deg": [3], "T": [3]}.
[[nodiscard]] RelativePose load_pose(const fs::path& path);
void save_pose(const fs::path& path, const RelativePose& pose);
[[nodiscard]] std::string pose_to_json(const RelativePose& pose);

[[nodiscard]] SimConfig load_sim_config(const fs::path& path);
[[nodiscard]] SimConfig parse_sim_config(const std::string& text, const std::string& origin);
[[nodiscard]] std::string sim_config_to_json(const SimConfig& cfg);

/// Header u_c,v_c,lambda,u_c_prime,v_c_prime,lambda_prime; one pair per row.
[[nodiscard]] CorrespondenceSet load_correspondences(const fs::path& csv,
                                                     const IntrinsicsPair& intrinsics);
void save_correspondences(const fs::path& csv, const CorrespondenceSet& set);

[[nodiscard]] std::string setup_to_json(const RectifiedSetup& setup);
void save_setup(const fs::path& path, const RectifiedSetup& setup);
[[nodiscard]] RectifiedSetup load_setup(const fs::path& path);

[[nodiscard]] std::string grid_to_json(const AlignedGrid& grid);

[[nodiscard]] Scene load_scene(const fs::path& path);
void save_scene(const fs::path& path, const Scene& scene);

/// Values are clamped to [0, 1] and quantised to 16 bits. Masked pixels are 0.
void write_pgm16(const fs::path& path, const Image& img);
/// All pixels valid; values scaled back to [0, 1].
[[nodiscard]] Image read_pgm16(const fs::path& path);
void write_pbm(const fs::path& path, const Image& img);
/// Applies the PBM mask (1 = valid) to `img`.
void read_pbm_mask(const fs::path& path, Image& img);

/// Directory layout: lf.json plus sai_r{row}_c{col}.pgm / .pbm per aperture.
void save_sampled_lf(const fs::path& dir, const SampledLF& lf);
[[nodiscard]] SampledLF load_sampled_lf(const fs::path& dir);
[[nodiscard]] std::string sai_name(int row, int col, const char* ext);

/// trial,err_R_deg,err_T_deg,converged,iterations plus a summary row
/// "mean,<mean err_R>,<mean err_T>,<converged trials>,<failed trials>".
[[nodiscard]] std::string trial_report_csv(const TrialReport& report);

}  // namespace lfrect
