#include "lfrect/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lfrect/errors.hpp"

namespace lfrect {
namespace {

using nlohmann::json;

constexpr const char* kPoseConvention = "X2 = R X1 + T (camera 1 -> camera 2)";
constexpr const char* kEulerConvention = "R = Rx(a) Ry(b) Rz(c), degrees";

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte);
    fail(ErrorCode::kParseError, origin + ":" + std::to_string(line) + ":" + std::to_string(col) +
                                     ": malformed JSON");
  }
}

// Runs a JSON accessor, turning type and key errors into kParseError.
template <typename F>
auto guarded(const std::string& origin, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    fail(ErrorCode::kParseError, origin + ": " + e.what());
  }
}

json mat3_json(const Mat3& m) {
  json a = json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) a.push_back(m(r, c));
  }
  return a;
}

json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Mat3 mat3_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 9) throw std::runtime_error("rotation needs 9 numbers");
  Mat3 m;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) m(r, c) = v[static_cast<std::size_t>(r * 3 + c)];
  }
  return m;
}

Vec3 vec3_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 3) throw std::runtime_error("vector needs 3 numbers");
  return {v[0], v[1], v[2]};
}

json intrinsics_json(const LfIntrinsics& k) {
  return {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}, {"K1", k.k1}, {"K2", k.k2}};
}

LfIntrinsics intrinsics_from(const json& j) {
  LfIntrinsics k{j.at("fx").get<double>(), j.at("fy").get<double>(), j.at("cx").get<double>(),
                 j.at("cy").get<double>(), j.at("K1").get<double>(), j.at("K2").get<double>()};
  k.validate();
  return k;
}

json pose_json(const RelativePose& p) {
  return {{"convention", kPoseConvention},
          {"layout", "row-major"},
          {"units", {{"T", "mm"}}},
          {"R", mat3_json(p.rotation)},
          {"T", vec3_json(p.translation)}};
}

RelativePose pose_from(const json& j) {
  RelativePose p;
  if (j.contains("R")) {
    p.rotation = mat3_from(j.at("R"));
  } else {
    const Vec3 e = vec3_from(j.at("euler_xyz_deg"));
    p.rotation = rotation_from_euler_xyz_deg(e.x(), e.y(), e.z());
  }
  p.translation = vec3_from(j.contains("T") ? j.at("T") : j.at("translation_mm"));
  p.validate(1e-6);
  return p;
}

json texture_json(const Texture& t) {
  switch (t.kind) {
    case Texture::Kind::kChecker:
      return {{"kind", "checker"}, {"period_mm", t.period}, {"sharpness", t.sharpness}};
    case Texture::Kind::kGradient:
      return {{"kind", "gradient"}, {"offset", t.offset}, {"grad_a", t.grad_a}, {"grad_b", t.grad_b}};
    case Texture::Kind::kNoise:
      return {{"kind", "noise"}, {"period_mm", t.period}, {"seed", t.seed}};
  }
  return {};
}

Texture texture_from(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "checker") {
    return Texture::checker(j.value("period_mm", 22.5), j.value("sharpness", 1.5));
  }
  if (kind == "gradient") {
    return Texture::gradient(j.value("offset", 0.5), j.value("grad_a", 0.0), j.value("grad_b", 0.0));
  }
  if (kind == "noise") {
    return Texture::noise(j.value("period_mm", 22.5), j.value("seed", std::uint64_t{0}));
  }
  throw std::runtime_error("unknown texture kind '" + kind + "'");
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_binary(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::kIoError, "write failed for " + path.string());
}

// Reads the whitespace-separated header tokens of a PNM file, skipping comments.
std::vector<long> pnm_header(std::istream& in, int count, const fs::path& path) {
  std::vector<long> values;
  while (static_cast<int>(values.size()) < count) {
    int c = in.peek();
    if (c == EOF) fail(ErrorCode::kParseError, path.string() + ": truncated header");
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      long v = 0;
      if (!(in >> v)) fail(ErrorCode::kParseError, path.string() + ": bad header");
      values.push_back(v);
    }
  }
  in.get();
  return values;
}

}  // namespace

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const fs::path& path, const std::string& content) {
  write_binary(path, content);
}

IntrinsicsPair load_intrinsics(const fs::path& path) {
  const std::string origin = path.string();
  const json j = parse_json(read_text_file(path), origin);
  return guarded(origin, [&] {
    return IntrinsicsPair{intrinsics_from(j.at("camera1")), intrinsics_from(j.at("camera2"))};
  });
}

void save_intrinsics(const fs::path& path, const IntrinsicsPair& pair) {
  const json j = {{"units", {{"fx fy cx cy K2", "px"}, {"K1", "dimensionless"}}},
                  {"camera1", intrinsics_json(pair.camera1)},
                  {"camera2", intrinsics_json(pair.camera2)}};
  write_text_file(path, j.dump(2) + "\n");
}

RelativePose load_pose(const fs::path& path) {
  const std::string origin = path.string();
  const json j = parse_json(read_text_file(path), origin);
  try {
    return guarded(origin, [&] { return pose_from(j.contains("pose") ? j.at("pose") : j); });
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrorCode::kParseError, origin + ": " + e.what());
  }
}

std::string pose_to_json(const RelativePose& pose) { return pose_json(pose).dump(2) + "\n"; }

void save_pose(const fs::path& path, const RelativePose& pose) {
  write_text_file(path, pose_to_json(pose));
}

SimConfig parse_sim_config(const std::string& text, const std::string& origin) {
  const json j = parse_json(text, origin);
  SimConfig cfg;
  try {
    guarded(origin, [&] {
      cfg.camera1 = j.contains("camera1") ? intrinsics_from(j.at("camera1")) : table1_camera1();
      cfg.camera2 = j.contains("camera2") ? intrinsics_from(j.at("camera2")) : table1_camera2();
      if (j.contains("pose")) cfg.pose = pose_from(j.at("pose"));
      if (j.contains("board")) {
        const json& b = j.at("board");
        cfg.board.rows = b.value("rows", cfg.board.rows);
        cfg.board.cols = b.value("cols", cfg.board.cols);
        cfg.board.spacing_mm = b.value("spacing_mm", cfg.board.spacing_mm);
      }
      if (j.contains("board_poses")) {
        for (const json& bp : j.at("board_poses")) {
          Mat3 rot;
          if (bp.contains("R")) {
            rot = mat3_from(bp.at("R"));
          } else {
            const Vec3 e = vec3_from(bp.at("euler_xyz_deg"));
            rot = rotation_from_euler_xyz_deg(e.x(), e.y(), e.z());
          }
          cfg.board_poses.push_back({rot, vec3_from(bp.at("center_mm"))});
        }
      }
      cfg.sai_grid = j.value("sai_grid", cfg.sai_grid);
      cfg.sigma = j.value("sigma_px", cfg.sigma);
      cfg.trials = j.value("trials", cfg.trials);
      cfg.seed = j.value("seed", cfg.seed);
      return 0;
    });
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrorCode::kParseError, origin + ": " + e.what());
  }
  cfg.validate();
  return cfg;
}

SimConfig load_sim_config(const fs::path& path) {
  return parse_sim_config(read_text_file(path), path.string());
}

std::string sim_config_to_json(const SimConfig& cfg) {
  json poses = json::array();
  for (const BoardPose& bp : cfg.board_poses) {
    poses.push_back({{"R", mat3_json(bp.rotation)}, {"center_mm", vec3_json(bp.center)}});
  }
  const json j = {
      {"units", {{"sigma_px", "px"}, {"spacing_mm", "mm"}, {"euler", kEulerConvention}}},
      {"camera1", intrinsics_json(cfg.camera1)},
      {"camera2", intrinsics_json(cfg.camera2)},
      {"pose", pose_json(cfg.pose)},
      {"board",
       {{"rows", cfg.board.rows}, {"cols", cfg.board.cols}, {"spacing_mm", cfg.board.spacing_mm}}},
      {"board_poses", poses},
      {"sai_grid", cfg.sai_grid},
      {"sigma_px", cfg.sigma},
      {"trials", cfg.trials},
      {"seed", cfg.seed}};
  return j.dump(2) + "\n";
}

CorrespondenceSet load_correspondences(const fs::path& csv, const IntrinsicsPair& intrinsics) {
  std::istringstream in(read_text_file(csv));
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::kParseError, csv.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "u_c,v_c,lambda,u_c_prime,v_c_prime,lambda_prime") {
    fail(ErrorCode::kParseError, csv.string() + ":1: unexpected header");
  }
  CorrespondenceSet set;
  set.camera1 = intrinsics.camera1;
  set.camera2 = intrinsics.camera2;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::array<double, 6> v{};
    std::istringstream row(line);
    std::string cell;
    std::size_t n = 0;
    while (std::getline(row, cell, ',')) {
      if (n >= v.size()) break;
      char* end = nullptr;
      v[n] = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) {
        fail(ErrorCode::kParseError, csv.string() + ":" + std::to_string(line_no) + ": bad number");
      }
      ++n;
    }
    if (n != 6 || std::getline(row, cell, ',')) {
      fail(ErrorCode::kParseError,
           csv.string() + ":" + std::to_string(line_no) + ": expected 6 columns");
    }
    set.pairs.push_back({{v[0], v[1], v[2]}, {v[3], v[4], v[5]}});
  }
  return set;
}

void save_correspondences(const fs::path& csv, const CorrespondenceSet& set) {
  std::string out = "u_c,v_c,lambda,u_c_prime,v_c_prime,lambda_prime\n";
  for (const Correspondence& c : set.pairs) {
    out += format_double(c.first.u_c) + "," + format_double(c.first.v_c) + "," +
           format_double(c.first.lambda) + "," + format_double(c.second.u_c) + "," +
           format_double(c.second.v_c) + "," + format_double(c.second.lambda) + "\n";
  }
  write_text_file(csv, out);
}

std::string setup_to_json(const RectifiedSetup& s) {
  const json j = {{"layout", "row-major"},
                  {"convention", "left = camera 2 (reference), right = camera 1"},
                  {"R_rect", mat3_json(s.r_rect)},
                  {"R_l", mat3_json(s.r_l)},
                  {"R_r", mat3_json(s.r_r)},
                  {"T_l", vec3_json(s.t_l)},
                  {"T_r", vec3_json(s.t_r)},
                  {"baseline_mm", s.baseline}};
  return j.dump(2) + "\n";
}

void save_setup(const fs::path& path, const RectifiedSetup& setup) {
  write_text_file(path, setup_to_json(setup));
}

RectifiedSetup load_setup(const fs::path& path) {
  const std::string origin = path.string();
  const json j = parse_json(read_text_file(path), origin);
  try {
    return guarded(origin, [&] {
      RectifiedSetup s;
      s.r_rect = mat3_from(j.at("R_rect"));
      s.r_l = mat3_from(j.at("R_l"));
      s.r_r = mat3_from(j.at("R_r"));
      s.t_l = vec3_from(j.at("T_l"));
      s.t_r = vec3_from(j.at("T_r"));
      s.baseline = j.at("baseline_mm").get<double>();
      return s;
    });
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrorCode::kParseError, origin + ": " + e.what());
  }
}

std::string grid_to_json(const AlignedGrid& g) {
  json prov = json::array();
  for (std::size_t r = 0; r < g.rows.size(); ++r) {
    std::string line;
    for (std::size_t c = 0; c < g.columns.size(); ++c) {
      const Provenance p = g.provenance[r * g.columns.size() + c];
      line += p == Provenance::kLeft ? 'L' : p == Provenance::kRight ? 'R' : '.';
    }
    prov.push_back(line);
  }
  json hulls = json::object();
  for (const auto& [name, hull] : {std::pair{"left", g.left_hull}, std::pair{"right", g.right_hull}}) {
    json pts = json::array();
    for (const auto& p : hull) pts.push_back({p.x(), p.y()});
    hulls[name] = pts;
  }
  const json j = {{"units", "mm"},
                  {"rows", g.rows},
                  {"columns", g.columns},
                  {"left_columns", g.left_columns},
                  {"right_columns", g.right_columns},
                  {"pitch_s", g.pitch_s},
                  {"pitch_t", g.pitch_t},
                  {"provenance", prov},
                  {"provenance_legend", "L = left (camera 2), R = right (camera 1), . = none"},
                  {"hulls", hulls},
                  {"mixed_rows", g.mixed_rows()}};
  return j.dump(2) + "\n";
}

Scene load_scene(const fs::path& path) {
  const std::string origin = path.string();
  const json j = parse_json(read_text_file(path), origin);
  try {
    return guarded(origin, [&] {
      Scene scene;
      for (const json& p : j.at("planes")) {
        TexturedPlane plane;
        plane.origin = vec3_from(p.at("origin_mm"));
        plane.axis_a = vec3_from(p.at("axis_a")).normalized();
        plane.axis_b = vec3_from(p.at("axis_b")).normalized();
        plane.half_extent_a = p.value("half_extent_a_mm", 0.0);
        plane.half_extent_b = p.value("half_extent_b_mm", 0.0);
        plane.texture = texture_from(p.at("texture"));
        scene.planes.push_back(plane);
      }
      return scene;
    });
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(ErrorCode::kParseError, origin + ": " + e.what());
  }
}

void save_scene(const fs::path& path, const Scene& scene) {
  json planes = json::array();
  for (const TexturedPlane& p : scene.planes) {
    planes.push_back({{"origin_mm", vec3_json(p.origin)},
                      {"axis_a", vec3_json(p.axis_a)},
                      {"axis_b", vec3_json(p.axis_b)},
                      {"half_extent_a_mm", p.half_extent_a},
                      {"half_extent_b_mm", p.half_extent_b},
                      {"texture", texture_json(p.texture)}});
  }
  const json j = {{"frame", "camera 2 (left, reference)"}, {"planes", planes}};
  write_text_file(path, j.dump(2) + "\n");
}

void write_pgm16(const fs::path& path, const Image& img) {
  std::string bytes = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) +
                      "\n65535\n";
  bytes.reserve(bytes.size() + img.data.size() * 2);
  for (std::size_t i = 0; i < img.data.size(); ++i) {
    const double v = img.mask[i] ? std::clamp(img.data[i], 0.0, 1.0) : 0.0;
    const auto q = static_cast<unsigned>(std::lround(v * 65535.0));
    bytes.push_back(static_cast<char>((q >> 8) & 0xFF));
    bytes.push_back(static_cast<char>(q & 0xFF));
  }
  write_binary(path, bytes);
}

Image read_pgm16(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + path.string());
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (magic[0] != 'P' || magic[1] != '5') {
    fail(ErrorCode::kParseError, path.string() + ": not a binary PGM");
  }
  const auto h = pnm_header(in, 3, path);
  if (h[0] <= 0 || h[1] <= 0 || h[2] <= 0 || h[2] > 65535) {
    fail(ErrorCode::kParseError, path.string() + ": bad PGM dimensions");
  }
  Image img(static_cast<int>(h[0]), static_cast<int>(h[1]));
  const bool wide = h[2] > 255;
  const double scale = 1.0 / static_cast<double>(h[2]);
  for (double& v : img.data) {
    unsigned char b[2] = {0, 0};
    in.read(reinterpret_cast<char*>(b), wide ? 2 : 1);
    if (!in) fail(ErrorCode::kParseError, path.string() + ": truncated pixel data");
    v = (wide ? (b[0] << 8 | b[1]) : b[0]) * scale;
  }
  return img;
}

void write_pbm(const fs::path& path, const Image& img) {
  std::string bytes = "P4\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n";
  const int stride = (img.width + 7) / 8;
  for (int y = 0; y < img.height; ++y) {
    std::string row(static_cast<std::size_t>(stride), '\0');
    for (int x = 0; x < img.width; ++x) {
      if (img.valid(x, y)) row[static_cast<std::size_t>(x / 8)] |= static_cast<char>(0x80 >> (x % 8));
    }
    bytes += row;
  }
  write_binary(path, bytes);
}

void read_pbm_mask(const fs::path& path, Image& img) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIoError, "cannot open " + path.string());
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (magic[0] != 'P' || magic[1] != '4') {
    fail(ErrorCode::kParseError, path.string() + ": not a binary PBM");
  }
  const auto h = pnm_header(in, 2, path);
  if (h[0] != img.width || h[1] != img.height) {
    fail(ErrorCode::kParseError, path.string() + ": mask size differs from image");
  }
  const int stride = (img.width + 7) / 8;
  std::string row(static_cast<std::size_t>(stride), '\0');
  for (int y = 0; y < img.height; ++y) {
    in.read(row.data(), stride);
    if (!in) fail(ErrorCode::kParseError, path.string() + ": truncated mask");
    for (int x = 0; x < img.width; ++x) {
      const bool valid = (static_cast<unsigned char>(row[static_cast<std::size_t>(x / 8)]) >>
                          (7 - x % 8)) & 1U;
      if (!valid) img.invalidate(x, y);
    }
  }
}

std::string sai_name(int row, int col, const char* ext) {
  return "sai_r" + std::to_string(row) + "_c" + std::to_string(col) + ext;
}

void save_sampled_lf(const fs::path& dir, const SampledLF& lf) {
  lf.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::kIoError, "cannot create " + dir.string() + ": " + ec.message());
  const SpatialMapping& m = lf.mapping;
  const json j = {{"units", {{"s t", "mm"}, {"u v", "mm per mm (UV plane at unit distance)"}}},
                  {"s", lf.s},
                  {"t", lf.t},
                  {"width", lf.width},
                  {"height", lf.height},
                  {"mapping",
                   {{"u0", m.u0}, {"du", m.du}, {"u_shear", m.u_shear},
                    {"v0", m.v0}, {"dv", m.dv}, {"v_shear", m.v_shear}}},
                  {"files", "sai_r{row}_c{col}.pgm with sibling .pbm validity mask"}};
  write_text_file(dir / "lf.json", j.dump(2) + "\n");
  for (int r = 0; r < lf.rows(); ++r) {
    for (int c = 0; c < lf.cols(); ++c) {
      write_pgm16(dir / sai_name(r, c, ".pgm"), lf.image(r, c));
      write_pbm(dir / sai_name(r, c, ".pbm"), lf.image(r, c));
    }
  }
}

SampledLF load_sampled_lf(const fs::path& dir) {
  const fs::path meta = dir / "lf.json";
  const std::string origin = meta.string();
  const json j = parse_json(read_text_file(meta), origin);
  SampledLF lf = guarded(origin, [&] {
    SampledLF out;
    out.s = j.at("s").get<std::vector<double>>();
    out.t = j.at("t").get<std::vector<double>>();
    out.width = j.at("width").get<int>();
    out.height = j.at("height").get<int>();
    const json& m = j.at("mapping");
    out.mapping = {m.at("u0").get<double>(), m.at("du").get<double>(),
                   m.at("u_shear").get<double>(), m.at("v0").get<double>(),
                   m.at("dv").get<double>(), m.at("v_shear").get<double>()};
    return out;
  });
  for (int r = 0; r < lf.rows(); ++r) {
    for (int c = 0; c < lf.cols(); ++c) {
      Image img = read_pgm16(dir / sai_name(r, c, ".pgm"));
      const fs::path mask = dir / sai_name(r, c, ".pbm");
      if (fs::exists(mask)) read_pbm_mask(mask, img);
      lf.images.push_back(std::move(img));
    }
  }
  lf.validate();
  return lf;
}

std::string trial_report_csv(const TrialReport& report) {
  std::string out = "trial,err_R_deg,err_T_deg,converged,iterations\n";
  char buf[160];
  for (const TrialResult& t : report.trials) {
    if (t.failed) {
      std::snprintf(buf, sizeof buf, "%d,nan,nan,0,%d\n", t.trial, t.iterations);
    } else {
      std::snprintf(buf, sizeof buf, "%d,%.10g,%.10g,%d,%d\n", t.trial, t.err_r_deg, t.err_t_deg,
                    t.converged ? 1 : 0, t.iterations);
    }
    out += buf;
  }
  int converged = 0;
  for (const TrialResult& t : report.trials) converged += (!t.failed && t.converged) ? 1 : 0;
  std::snprintf(buf, sizeof buf, "mean,%.10g,%.10g,%d,%d\n", report.mean_err_r, report.mean_err_t,
                converged, report.failures);
  out += buf;
  return out;
}

}  // namespace lfrect
