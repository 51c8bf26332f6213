#include "lfrect/resampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include <Eigen/Dense>

#include "lfrect/errors.hpp"
#include "lfrect/parallel.hpp"

namespace lfrect {
namespace {

// Sample weights closer than this to a node are snapped onto it, so that
// queries reconstructed from node coordinates reproduce the node exactly.
constexpr double kSnap = 1e-9;

struct Bracket {
  int i0 = 0;
  int i1 = 0;
  double w = 0.0;  // weight of i1
};

Bracket snapped(int k, double w) {
  if (w <= kSnap) return {k, k, 0.0};
  if (w >= 1.0 - kSnap) return {k + 1, k + 1, 0.0};
  return {k, k + 1, w};
}

std::optional<Bracket> bracket_sorted(const std::vector<double>& p, double a) {
  const int n = static_cast<int>(p.size());
  if (n == 0 || !std::isfinite(a)) return std::nullopt;
  if (n == 1) {
    if (std::abs(a - p[0]) <= kSnap) return Bracket{};
    return std::nullopt;
  }
  if (a < p.front() - kSnap || a > p.back() + kSnap) return std::nullopt;
  auto it = std::upper_bound(p.begin(), p.end(), a);
  int k = static_cast<int>(it - p.begin()) - 1;
  k = std::clamp(k, 0, n - 2);
  const double w = std::clamp((a - p[k]) / (p[k + 1] - p[k]), 0.0, 1.0);
  return snapped(k, w);
}

std::optional<Bracket> bracket_pixel(int n, double a) {
  if (n <= 0 || !std::isfinite(a)) return std::nullopt;
  if (n == 1) {
    if (std::abs(a) <= kSnap) return Bracket{};
    return std::nullopt;
  }
  if (a < -kSnap || a > (n - 1) + kSnap) return std::nullopt;
  const int k = std::clamp(static_cast<int>(std::floor(a)), 0, n - 2);
  return snapped(k, std::clamp(a - k, 0.0, 1.0));
}

bool inside_convex(const std::array<Eigen::Vector2d, 4>& poly, const Eigen::Vector2d& p,
                   double eps) {
  bool pos = false;
  bool neg = false;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Eigen::Vector2d a = poly[i];
    const Eigen::Vector2d b = poly[(i + 1) % poly.size()];
    const Eigen::Vector2d e = b - a;
    const double len = e.norm();
    if (len == 0.0) continue;
    const double cross = (e.x() * (p.y() - a.y()) - e.y() * (p.x() - a.x())) / len;
    if (cross > eps) pos = true;
    if (cross < -eps) neg = true;
  }
  return !(pos && neg);
}

std::array<Eigen::Vector2d, 4> warped_hull(const SampledLF& lf, LfSide side,
                                           const RectifiedSetup& setup) {
  const int r1 = lf.rows() - 1;
  const int c1 = lf.cols() - 1;
  return {warped_aperture(lf, side, setup, 0, 0), warped_aperture(lf, side, setup, 0, c1),
          warped_aperture(lf, side, setup, r1, c1), warped_aperture(lf, side, setup, r1, 0)};
}

std::string describe_hull(const std::array<Eigen::Vector2d, 4>& hull) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < hull.size(); ++i) {
    os << (i ? ", " : "") << '(' << hull[i].x() << ", " << hull[i].y() << ')';
  }
  os << ']';
  return os.str();
}

}  // namespace

Image::Image(int w, int h, double fill, bool valid)
    : width(w),
      height(h),
      data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), valid ? fill : 0.0),
      mask(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), valid ? 1 : 0) {}

std::size_t Image::valid_count() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), std::uint8_t{1}));
}

double SampledLF::angular_pitch() const {
  if (s.size() < 2) return 0.0;
  std::vector<double> d;
  d.reserve(s.size() - 1);
  for (std::size_t i = 1; i < s.size(); ++i) d.push_back(s[i] - s[i - 1]);
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2), d.end());
  return d[d.size() / 2];
}

void SampledLF::validate() const {
  const auto ascending = [](const std::vector<double>& p) {
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (!std::isfinite(p[i])) return false;
      if (i > 0 && !(p[i] > p[i - 1])) return false;
    }
    return !p.empty();
  };
  if (!ascending(s) || !ascending(t)) {
    fail(ErrorCode::kInvalidArgument, "aperture positions must be finite and strictly ascending");
  }
  if (width <= 0 || height <= 0) {
    fail(ErrorCode::kInvalidArgument, "image dimensions must be positive");
  }
  if (mapping.du == 0.0 || mapping.dv == 0.0) {
    fail(ErrorCode::kInvalidArgument, "spatial mapping has zero pixel pitch");
  }
  if (images.size() != s.size() * t.size()) {
    fail(ErrorCode::kInvalidArgument, "image count does not match the aperture lattice");
  }
  const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  for (const Image& img : images) {
    if (img.width != width || img.height != height || img.data.size() != n ||
        img.mask.size() != n) {
      fail(ErrorCode::kInvalidArgument, "sub-aperture images differ in size");
    }
  }
}

SampledLF make_sampled_lf(const LfIntrinsics& k, int grid, int width, int height) {
  k.validate();
  if (grid < 1 || width < 1 || height < 1) {
    fail(ErrorCode::kInvalidArgument, "grid and image size must be positive");
  }
  SampledLF lf;
  const int c = grid / 2;
  for (int j = 0; j < grid; ++j) {
    lf.s.push_back((j - c) * k.aperture_pitch_s());
    lf.t.push_back((j - c) * k.aperture_pitch_t());
  }
  if (lf.s.front() > lf.s.back()) std::reverse(lf.s.begin(), lf.s.end());
  if (lf.t.front() > lf.t.back()) std::reverse(lf.t.begin(), lf.t.end());
  lf.width = width;
  lf.height = height;
  lf.mapping.u0 = -k.cx / k.fx;
  lf.mapping.du = 1.0 / k.fx;
  lf.mapping.u_shear = k.k1 / k.k2;
  lf.mapping.v0 = -k.cy / k.fy;
  lf.mapping.dv = 1.0 / k.fy;
  lf.mapping.v_shear = k.k1 / k.k2;
  lf.images.assign(static_cast<std::size_t>(grid * grid), Image(width, height));
  return lf;
}

int AlignedGrid::mixed_rows() const {
  int count = 0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    bool l = false;
    bool rr = false;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const Provenance p = provenance[r * columns.size() + c];
      l = l || p == Provenance::kLeft;
      rr = rr || p == Provenance::kRight;
    }
    count += (l && rr) ? 1 : 0;
  }
  return count;
}

Eigen::Vector2d warped_aperture(const SampledLF& lf, LfSide side, const RectifiedSetup& setup,
                                int row, int col) {
  const Vec3 p = setup.to_common(side).apply(
      Vec3(lf.s[static_cast<std::size_t>(col)], lf.t[static_cast<std::size_t>(row)], 0.0));
  return p.head<2>();
}

AlignedGrid plan_aligned_grid(const RectifiedSetup& setup, const SampledLF& left,
                              const SampledLF& right) {
  left.validate();
  right.validate();
  const int nt = left.rows();
  const int ns = left.cols();
  if (nt * ns < 2) {
    fail(ErrorCode::kInvalidArgument, "left light field needs at least two sub-apertures");
  }

  const Eigen::Vector2d anchor = warped_aperture(left, LfSide::kLeft, setup, nt / 2, ns / 2);
  Eigen::Vector2d a = Eigen::Vector2d::Zero();
  Eigen::Vector2d b = Eigen::Vector2d::Zero();
  if (ns > 1) {
    a = (warped_aperture(left, LfSide::kLeft, setup, nt / 2, ns - 1) -
         warped_aperture(left, LfSide::kLeft, setup, nt / 2, 0)) /
        (ns - 1);
  }
  if (nt > 1) {
    b = (warped_aperture(left, LfSide::kLeft, setup, nt - 1, ns / 2) -
         warped_aperture(left, LfSide::kLeft, setup, 0, ns / 2)) /
        (nt - 1);
  }

  AlignedGrid grid;
  grid.pitch_s = std::max(std::abs(a.x()), std::abs(b.x()));
  grid.pitch_t = std::max(std::abs(a.y()), std::abs(b.y()));
  if (grid.pitch_s <= 0.0) grid.pitch_s = grid.pitch_t;
  if (grid.pitch_t <= 0.0) grid.pitch_t = grid.pitch_s;
  grid.left_hull = warped_hull(left, LfSide::kLeft, setup);
  grid.right_hull = warped_hull(right, LfSide::kRight, setup);

  const auto extent = [&](const SampledLF& lf, LfSide side) {
    Eigen::Vector2d lo = Eigen::Vector2d::Constant(std::numeric_limits<double>::infinity());
    Eigen::Vector2d hi = -lo;
    for (int r = 0; r < lf.rows(); ++r) {
      for (int c = 0; c < lf.cols(); ++c) {
        const Eigen::Vector2d p = warped_aperture(lf, side, setup, r, c);
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
      }
    }
    return std::pair{lo, hi};
  };
  const auto lattice = [](double lo, double hi, double origin, double pitch) {
    const auto k0 = static_cast<long>(std::ceil((lo - origin) / pitch - 1e-6));
    const auto k1 = static_cast<long>(std::floor((hi - origin) / pitch + 1e-6));
    return std::pair{k0, k1};
  };
  const auto key = [&](double s) { return std::lround((s - anchor.x()) / grid.pitch_s); };

  const auto [llo, lhi] = extent(left, LfSide::kLeft);
  const auto [rlo, rhi] = extent(right, LfSide::kRight);

  std::map<long, double> columns;
  std::map<long, bool> from_left;
  std::map<long, bool> from_right;
  if (setup.is_identity()) {
    grid.rows = left.t;
    for (double s : left.s) {
      columns.emplace(key(s), s);
      from_left[key(s)] = true;
    }
  } else {
    const auto [t0, t1] = lattice(llo.y(), lhi.y(), anchor.y(), grid.pitch_t);
    for (long k = t0; k <= t1; ++k) grid.rows.push_back(anchor.y() + k * grid.pitch_t);
    const auto [s0, s1] = lattice(llo.x(), lhi.x(), anchor.x(), grid.pitch_s);
    for (long k = s0; k <= s1; ++k) {
      columns.emplace(k, anchor.x() + k * grid.pitch_s);
      from_left[k] = true;
    }
  }
  {
    const auto [s0, s1] = lattice(rlo.x(), rhi.x(), anchor.x(), grid.pitch_s);
    for (long k = s0; k <= s1; ++k) {
      columns.emplace(k, anchor.x() + k * grid.pitch_s);
      from_right[k] = true;
    }
  }
  for (const auto& [k, s] : columns) {
    grid.columns.push_back(s);
    if (from_left.count(k)) grid.left_columns.push_back(s);
    if (from_right.count(k)) grid.right_columns.push_back(s);
  }

  const double eps = 1e-7 * std::max(grid.pitch_s, grid.pitch_t);
  grid.provenance.assign(grid.rows.size() * grid.columns.size(), Provenance::kNone);
  for (std::size_t r = 0; r < grid.rows.size(); ++r) {
    for (std::size_t c = 0; c < grid.columns.size(); ++c) {
      const Eigen::Vector2d p(grid.columns[c], grid.rows[r]);
      Provenance& out = grid.provenance[r * grid.columns.size() + c];
      if (inside_convex(grid.left_hull, p, eps)) {
        out = Provenance::kLeft;
      } else if (inside_convex(grid.right_hull, p, eps)) {
        out = Provenance::kRight;
      }
    }
  }
  if (!setup.is_identity() && grid.mixed_rows() == 0) {
    fail(ErrorCode::kNoOverlap, "no target row holds sub-apertures of both light fields; left hull " +
                                    describe_hull(grid.left_hull) + ", right hull " +
                                    describe_hull(grid.right_hull));
  }
  return grid;
}

std::optional<double> sample_lf(const SampledLF& lf, const Ray4D& r) {
  const auto bs = bracket_sorted(lf.s, r.s);
  const auto bt = bracket_sorted(lf.t, r.t);
  if (!bs || !bt) return std::nullopt;

  double sum = 0.0;
  for (int a = 0; a < 2; ++a) {
    const double wa = a ? bt->w : 1.0 - bt->w;
    if (wa == 0.0) continue;
    const int row = a ? bt->i1 : bt->i0;
    const double t = lf.t[static_cast<std::size_t>(row)];
    const auto by = bracket_pixel(lf.height, lf.mapping.y_of(r.v, t));
    if (!by) return std::nullopt;
    for (int b = 0; b < 2; ++b) {
      const double wb = b ? bs->w : 1.0 - bs->w;
      if (wb == 0.0) continue;
      const int col = b ? bs->i1 : bs->i0;
      const double s = lf.s[static_cast<std::size_t>(col)];
      const auto bx = bracket_pixel(lf.width, lf.mapping.x_of(r.u, s));
      if (!bx) return std::nullopt;
      const Image& img = lf.image(row, col);
      for (int c = 0; c < 2; ++c) {
        const double wc = c ? by->w : 1.0 - by->w;
        if (wc == 0.0) continue;
        const int y = c ? by->i1 : by->i0;
        for (int d = 0; d < 2; ++d) {
          const double wd = d ? bx->w : 1.0 - bx->w;
          if (wd == 0.0) continue;
          const int x = d ? bx->i1 : bx->i0;
          if (!img.valid(x, y)) return std::nullopt;
          sum += wa * wb * wc * wd * img.at(x, y);
        }
      }
    }
  }
  return sum;
}

double interpolate_ray(const SampledLF& lf, const RectifiedSetup& setup, LfSide side,
                       const Ray4D& q) {
  const Ray4D src = warp_common_to_lf(q, side, setup);
  const auto value = sample_lf(lf, src);
  if (!value) {
    fail(ErrorCode::kOutOfAperture, "back-warped ray lies outside the sampled light field");
  }
  return *value;
}

SpatialMapping rectified_mapping(const RectifiedSetup& setup, const SampledLF& left, int& width,
                                 int& height) {
  if (setup.is_identity()) {
    width = left.width;
    height = left.height;
    return left.mapping;
  }
  const double s = left.s[left.s.size() / 2];
  const double t = left.t[left.t.size() / 2];
  const double xc = 0.5 * (left.width - 1);
  const double yc = 0.5 * (left.height - 1);
  const auto warp = [&](double x, double y) {
    const Ray4D q = warp_lf_to_common(
        {s, t, left.mapping.u(x, s), left.mapping.v(y, t)}, LfSide::kLeft, setup);
    return Eigen::Vector2d(q.u, q.v);
  };
  const Eigen::Vector2d c = warp(xc, yc);
  const Eigen::Vector2d jx = 0.5 * (warp(xc + 1.0, yc) - warp(xc - 1.0, yc));
  const Eigen::Vector2d jy = 0.5 * (warp(xc, yc + 1.0) - warp(xc, yc - 1.0));

  SpatialMapping m;
  m.u_shear = 0.0;
  m.v_shear = 0.0;
  const bool transposed =
      std::abs(jx.x()) + std::abs(jy.y()) < std::abs(jy.x()) + std::abs(jx.y());
  if (transposed) {
    width = left.height;
    height = left.width;
    m.du = jy.x();
    m.dv = jx.y();
  } else {
    width = left.width;
    height = left.height;
    m.du = jx.x();
    m.dv = jy.y();
  }
  m.u0 = c.x() - m.du * 0.5 * (width - 1);
  m.v0 = c.y() - m.dv * 0.5 * (height - 1);
  return m;
}

SampledLF render_aligned_sais(const SampledLF& left, const SampledLF& right,
                              const RectifiedSetup& setup, const AlignedGrid& grid, int jobs) {
  SampledLF out;
  out.s = grid.columns;
  out.t = grid.rows;
  out.mapping = rectified_mapping(setup, left, out.width, out.height);
  out.images.assign(grid.rows.size() * grid.columns.size(),
                    Image(out.width, out.height, 0.0, false));

  const RelativePose back_left = setup.from_common(LfSide::kLeft);
  const RelativePose back_right = setup.from_common(LfSide::kRight);
  const int cols = out.cols();

  parallel_for(out.images.size(), jobs, [&](std::size_t idx) {
    const int row = static_cast<int>(idx) / cols;
    const int col = static_cast<int>(idx) % cols;
    const Provenance p = grid.at(row, col);
    if (p == Provenance::kNone) return;
    const SampledLF& src = p == Provenance::kLeft ? left : right;
    const RelativePose& back = p == Provenance::kLeft ? back_left : back_right;
    const double s = out.s[static_cast<std::size_t>(col)];
    const double t = out.t[static_cast<std::size_t>(row)];
    Image& img = out.images[idx];
    for (int y = 0; y < out.height; ++y) {
      for (int x = 0; x < out.width; ++x) {
        const Ray4D q{s, t, out.mapping.u(x, s), out.mapping.v(y, t)};
        Ray4D r;
        try {
          r = warp_ray(q, back);
        } catch (const Error&) {
          continue;
        }
        if (const auto v = sample_lf(src, r)) img.set(x, y, *v);
      }
    }
  });
  return out;
}

Image extract_epi(const SampledLF& lf, int row_t, int row_v) {
  if (row_t < 0 || row_t >= lf.rows() || row_v < 0 || row_v >= lf.height) {
    fail(ErrorCode::kIndexOutOfRange, "EPI row index out of range");
  }
  Image epi(lf.width, lf.cols(), 0.0, false);
  for (int c = 0; c < lf.cols(); ++c) {
    const Image& img = lf.image(row_t, c);
    for (int x = 0; x < lf.width; ++x) {
      if (img.valid(x, row_v)) epi.set(x, c, img.at(x, row_v));
    }
  }
  return epi;
}

std::optional<Eigen::Vector2d> locate_checker_corner(const Image& img, double x0, double y0,
                                                     int h) {
  if (!std::isfinite(x0) || !std::isfinite(y0) || h < 1) return std::nullopt;
  const auto bilinear = [&](double x, double y) -> std::optional<double> {
    const auto bx = bracket_pixel(img.width, x);
    const auto by = bracket_pixel(img.height, y);
    if (!bx || !by) return std::nullopt;
    double v = 0.0;
    for (int c = 0; c < 2; ++c) {
      const double wy = c ? by->w : 1.0 - by->w;
      if (wy == 0.0) continue;
      for (int d = 0; d < 2; ++d) {
        const double wx = d ? bx->w : 1.0 - bx->w;
        if (wx == 0.0) continue;
        const int xi = d ? bx->i1 : bx->i0;
        const int yi = c ? by->i1 : by->i0;
        if (!img.valid(xi, yi)) return std::nullopt;
        v += wx * wy * img.at(xi, yi);
      }
    }
    return v;
  };

  // The design matrix only depends on the window offsets.
  const int n = (2 * h + 1) * (2 * h + 1);
  Eigen::MatrixXd a(n, 6);
  int k = 0;
  for (int dy = -h; dy <= h; ++dy) {
    for (int dx = -h; dx <= h; ++dx) a.row(k++) << 1.0, dx, dy, dx * dx, dx * dy, dy * dy;
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);

  // The window is re-sampled around the current estimate, so at the fixed
  // point it is centred on the saddle and the odd symmetry of the corner
  // cancels the cubic terms a quadratic cannot represent.
  Eigen::Vector2d p(x0, y0);
  Eigen::VectorXd b(n);
  for (int iter = 0; iter < 50; ++iter) {
    k = 0;
    for (int dy = -h; dy <= h; ++dy) {
      for (int dx = -h; dx <= h; ++dx) {
        const auto v = bilinear(p.x() + dx, p.y() + dy);
        if (!v) return std::nullopt;
        b(k++) = *v;
      }
    }
    const Eigen::VectorXd c = qr.solve(b);
    Eigen::Matrix2d hess;
    hess << 2.0 * c(3), c(4), c(4), 2.0 * c(5);
    if (!(hess.determinant() < 0.0)) return std::nullopt;
    const Eigen::Vector2d off = -hess.inverse() * Eigen::Vector2d(c(1), c(2));
    if (!(off.cwiseAbs().maxCoeff() <= h)) return std::nullopt;
    p += off;
    if (off.norm() < 1e-6) return p;
  }
  return p;
}

std::optional<Eigen::Vector2d> project_to_sai(const SampledLF& lf, int row, int col,
                                              const Vec3& p) {
  if (!(std::abs(p.z()) > 1e-12)) return std::nullopt;
  const double s = lf.s[static_cast<std::size_t>(col)];
  const double t = lf.t[static_cast<std::size_t>(row)];
  const double u = (p.x() - s) / p.z();
  const double v = (p.y() - t) / p.z();
  return Eigen::Vector2d(lf.mapping.x_of(u, s), lf.mapping.y_of(v, t));
}

ScanlineReport measure_scanline_alignment(const SampledLF& lf, const std::vector<Vec3>& corners) {
  ScanlineReport report;
  for (int r = 0; r < lf.rows(); ++r) {
    bool row_used = false;
    for (const Vec3& p : corners) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      int hits = 0;
      for (int c = 0; c < lf.cols(); ++c) {
        const Image& img = lf.image(r, c);
        if (img.valid_count() == 0) continue;
        const auto pred = project_to_sai(lf, r, c, p);
        if (!pred) continue;
        const auto found = locate_checker_corner(img, pred->x(), pred->y());
        if (!found || (*found - *pred).norm() > 1.5) continue;
        lo = std::min(lo, found->y());
        hi = std::max(hi, found->y());
        ++hits;
      }
      if (hits >= 2) {
        report.max_spread = std::max(report.max_spread, hi - lo);
        report.tracked += hits;
        row_used = true;
      }
    }
    report.rows_checked += row_used ? 1 : 0;
  }
  return report;
}

}  // namespace lfrect
