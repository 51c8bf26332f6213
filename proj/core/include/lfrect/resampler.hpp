#pragma once

// Sampled light fields, the aligned sub-aperture grid of the common TPP,
// quadrilinear resampling of row-aligned SAIs, and EPI extraction.

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "lfrect/geometry.hpp"
#include "lfrect/rectifier.hpp"

namespace lfrect {

/// Single-channel image with a validity mask. Invalid pixels hold 0.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<double> data;
  std::vector<std::uint8_t> mask;  ///< 1 = valid

  Image() = default;
  Image(int w, int h, double fill = 0.0, bool valid = true);

  [[nodiscard]] std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
           static_cast<std::size_t>(x);
  }
  [[nodiscard]] double at(int x, int y) const { return data[index(x, y)]; }
  [[nodiscard]] bool valid(int x, int y) const { return mask[index(x, y)] != 0; }
  void set(int x, int y, double value) {
    data[index(x, y)] = value;
    mask[index(x, y)] = 1;
  }
  void invalidate(int x, int y) {
    data[index(x, y)] = 0.0;
    mask[index(x, y)] = 0;
  }
  [[nodiscard]] std::size_t valid_count() const;
};

/// Pixel (x, y) of the sub-aperture at (s, t) sees direction
///   u = u0 + du x + u_shear s,   v = v0 + dv y + v_shear t   (mm per mm).
/// The shear terms carry the per-aperture principal point shift of a
/// plenoptic camera; rectified light fields use zero shear.
struct SpatialMapping {
  double u0 = 0.0;
  double du = 1.0;
  double u_shear = 0.0;
  double v0 = 0.0;
  double dv = 1.0;
  double v_shear = 0.0;

  [[nodiscard]] double u(double x, double s) const { return u0 + du * x + u_shear * s; }
  [[nodiscard]] double v(double y, double t) const { return v0 + dv * y + v_shear * t; }
  [[nodiscard]] double x_of(double u, double s) const { return (u - u0 - u_shear * s) / du; }
  [[nodiscard]] double y_of(double v, double t) const { return (v - v0 - v_shear * t) / dv; }
};

/// Light field sampled on a rectangular lattice of sub-apertures. Columns are
/// the ascending s positions, rows the ascending t positions (mm on the ST
/// plane). Images are stored row-major over (row, column).
struct SampledLF {
  std::vector<double> s;
  std::vector<double> t;
  int width = 0;
  int height = 0;
  SpatialMapping mapping;
  std::vector<Image> images;

  [[nodiscard]] int cols() const { return static_cast<int>(s.size()); }
  [[nodiscard]] int rows() const { return static_cast<int>(t.size()); }
  [[nodiscard]] const Image& image(int row, int col) const {
    return images[static_cast<std::size_t>(row * cols() + col)];
  }
  [[nodiscard]] Image& image(int row, int col) {
    return images[static_cast<std::size_t>(row * cols() + col)];
  }
  /// Median spacing of the columns (mm), 0 for a single column.
  [[nodiscard]] double angular_pitch() const;

  /// Throws kInvalidArgument on unsorted positions or inconsistent images.
  void validate() const;
};

/// Empty light field of a plenoptic camera with a grid x grid aperture array
/// and width x height sub-aperture images: apertures at multiples of K2/fx,
/// K2/fy around the centre, pixel directions from (fx, fy, cx, cy) and the
/// K1/K2 shear. All images are allocated, zero and valid.
[[nodiscard]] SampledLF make_sampled_lf(const LfIntrinsics& k, int grid, int width, int height);

enum class Provenance : std::uint8_t { kNone = 0, kLeft = 1, kRight = 2 };

struct AlignedGrid {
  std::vector<double> rows;           ///< t of each target row (mm), ascending
  std::vector<double> columns;        ///< s of each target column (mm), ascending
  std::vector<double> left_columns;   ///< subset of columns on the left lattice
  std::vector<double> right_columns;  ///< subset of columns on the right lattice
  std::vector<Provenance> provenance; ///< row-major over (row, column)
  double pitch_s = 0.0;
  double pitch_t = 0.0;
  std::array<Eigen::Vector2d, 4> left_hull;
  std::array<Eigen::Vector2d, 4> right_hull;

  [[nodiscard]] Provenance at(int row, int col) const {
    return provenance[static_cast<std::size_t>(row) * columns.size() +
                      static_cast<std::size_t>(col)];
  }
  [[nodiscard]] int mixed_rows() const;  ///< rows holding both sources
};

/// Aperture centre of `lf` (row, col) placed in the common frame and
/// projected onto its ST plane.
[[nodiscard]] Eigen::Vector2d warped_aperture(const SampledLF& lf, LfSide side,
                                              const RectifiedSetup& setup, int row, int col);

/// Target lattice on the left pitch, anchored at the warped left central
/// aperture. Throws kNoOverlap when no row holds sub-apertures of both
/// light fields.
[[nodiscard]] AlignedGrid plan_aligned_grid(const RectifiedSetup& setup, const SampledLF& left,
                                            const SampledLF& right);

/// Quadrilinear interpolation of `lf` at a ray of its own TPP. Returns
/// nullopt when any sample with non-zero weight is outside the lattice or
/// masked.
[[nodiscard]] std::optional<double> sample_lf(const SampledLF& lf, const Ray4D& r);

/// Luminance of common-frame ray `q` taken from the light field of `side`.
/// Throws kOutOfAperture when the back-warped ray leaves the sampled hull.
[[nodiscard]] double interpolate_ray(const SampledLF& lf, const RectifiedSetup& setup,
                                     LfSide side, const Ray4D& q);

/// Pixel mapping of the rectified light field: axis aligned, pitch and
/// orientation taken from the warped central view of `left`. The identity
/// setup keeps the left mapping unchanged.
[[nodiscard]] SpatialMapping rectified_mapping(const RectifiedSetup& setup, const SampledLF& left,
                                               int& width, int& height);

/// One image per target sub-aperture; unsupported pixels are masked.
[[nodiscard]] SampledLF render_aligned_sais(const SampledLF& left, const SampledLF& right,
                                            const RectifiedSetup& setup, const AlignedGrid& grid,
                                            int jobs = 1);

/// Pixel row `row_v` of every SAI in aperture row `row_t`, one EPI row per
/// column ordered by s. Throws kIndexOutOfRange.
[[nodiscard]] Image extract_epi(const SampledLF& lf, int row_t, int row_v);

/// Sub-pixel saddle point of a smooth checkerboard near (x0, y0): quadratic
/// fit on a (2h+1)^2 window, re-centred until it settles. nullopt when the
/// window leaves the valid area or the fit is not a saddle.
[[nodiscard]] std::optional<Eigen::Vector2d> locate_checker_corner(const Image& img, double x0,
                                                                   double y0, int h = 3);

/// Predicted pixel of common-frame point `p` in sub-aperture (row, col).
[[nodiscard]] std::optional<Eigen::Vector2d> project_to_sai(const SampledLF& lf, int row, int col,
                                                            const Vec3& p);

struct ScanlineReport {
  double max_spread = 0.0;  ///< px, worst vertical spread of one corner in one row
  int tracked = 0;          ///< corner detections used
  int rows_checked = 0;
};

/// Detects each checkerboard corner (common-frame points) in every valid SAI
/// and measures how much its vertical coordinate varies along each row.
[[nodiscard]] ScanlineReport measure_scanline_alignment(const SampledLF& lf,
                                                        const std::vector<Vec3>& corners);

}  // namespace lfrect
