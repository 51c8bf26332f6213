#include "lfrect/bench.hpp"

#include <cstdio>

#include <json.hpp>

#include "lfrect/errors.hpp"

namespace lfrect {
namespace {

std::string format_sigma(double sigma) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", sigma);
  return buf;
}

SimConfig make_config(const BenchSpec& spec, const PosePreset& preset, double sigma) {
  SimConfig cfg;
  cfg.camera1 = spec.camera1;
  cfg.camera2 = spec.camera2;
  cfg.pose = preset.pose();
  cfg.board = spec.board;
  cfg.sigma = sigma;
  cfg.trials = spec.trials;
  cfg.seed = spec.seed;
  return cfg;
}

}  // namespace

RelativePose PosePreset::pose() const {
  return {rotation_from_euler_xyz_deg(euler_xyz_deg.x(), euler_xyz_deg.y(), euler_xyz_deg.z()),
          translation_mm};
}

Vec3 preset_rotation(const std::string& name) {
  if (name == "R1") return {5.0, 15.0, 5.0};
  if (name == "R2") return {5.0, 30.0, 5.0};
  fail(ErrorCode::kInvalidArgument, "unknown rotation preset '" + name + "'");
}

Vec3 preset_translation(const std::string& name) {
  if (name == "T1") return {50.0, 0.0, 0.0};
  if (name == "T2") return {100.0, 0.0, 0.0};
  fail(ErrorCode::kInvalidArgument, "unknown translation preset '" + name + "'");
}

PosePreset table2_pose() { return {"table2", {5.0, 20.0, 5.0}, {80.0, 5.0, 5.0}}; }

std::vector<PosePreset> table3_poses() {
  std::vector<PosePreset> out;
  for (const char* r : {"R1", "R2"}) {
    for (const char* t : {"T1", "T2"}) {
      out.push_back({std::string(r) + t, preset_rotation(r), preset_translation(t)});
    }
  }
  return out;
}

BenchSpec BenchSpec::table2() {
  BenchSpec spec;
  spec.scenario = Scenario::kTable2;
  spec.sigma_list = {0.1, 0.2, 0.3, 0.4, 0.5, 2.0, 3.0};
  spec.pose_list = {table2_pose()};
  return spec;
}

BenchSpec BenchSpec::table3() {
  BenchSpec spec;
  spec.scenario = Scenario::kTable3;
  spec.sigma_list = {0.3};
  spec.pose_list = table3_poses();
  return spec;
}

void BenchSpec::validate() const {
  if (sigma_list.empty()) fail(ErrorCode::kInvalidArgument, "bench needs at least one sigma");
  if (pose_list.empty()) fail(ErrorCode::kInvalidArgument, "bench needs at least one pose");
  if (trials < 1) fail(ErrorCode::kInvalidArgument, "trials must be >= 1");
  for (double s : sigma_list) {
    if (!(s >= 0.0)) fail(ErrorCode::kInvalidArgument, "sigma must be >= 0");
  }
  if (scenario == Scenario::kTable3 && sigma_list.size() != 1) {
    fail(ErrorCode::kInvalidArgument, "table3 runs a single sigma");
  }
  camera1.validate();
  camera2.validate();
}

BenchSpec parse_bench_spec(const std::string& text, const std::string& origin) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kParseError, origin + ": byte " + std::to_string(e.byte) + ": malformed JSON");
  }
  BenchSpec spec;
  try {
    const std::string scenario = j.value("scenario", std::string("table2"));
    if (scenario == "table2") {
      spec = BenchSpec::table2();
    } else if (scenario == "table3") {
      spec = BenchSpec::table3();
    } else if (scenario == "custom") {
      spec.scenario = BenchSpec::Scenario::kCustom;
      spec.pose_list.clear();
    } else {
      fail(ErrorCode::kParseError, origin + ": unknown scenario '" + scenario + "'");
    }
    if (j.contains("sigma_list")) spec.sigma_list = j.at("sigma_list").get<std::vector<double>>();
    if (j.contains("pose_list")) {
      spec.pose_list.clear();
      for (const json& p : j.at("pose_list")) {
        if (p.is_string()) {
          const std::string name = p.get<std::string>();
          if (name == "table2") {
            spec.pose_list.push_back(table2_pose());
          } else if (name.size() == 4) {
            spec.pose_list.push_back({name, preset_rotation(name.substr(0, 2)),
                                      preset_translation(name.substr(2, 2))});
          } else {
            fail(ErrorCode::kParseError, origin + ": unknown pose preset '" + name + "'");
          }
        } else {
          const auto e = p.at("euler_xyz_deg").get<std::vector<double>>();
          const auto t = p.at("translation_mm").get<std::vector<double>>();
          if (e.size() != 3 || t.size() != 3) {
            fail(ErrorCode::kParseError, origin + ": pose needs 3 angles and 3 translations");
          }
          spec.pose_list.push_back(
              {p.value("name", std::string("pose")), {e[0], e[1], e[2]}, {t[0], t[1], t[2]}});
        }
      }
    }
    spec.trials = j.value("trials", spec.trials);
    spec.seed = j.value("seed", spec.seed);
  } catch (const json::exception& e) {
    fail(ErrorCode::kParseError, origin + ": " + e.what());
  }
  spec.validate();
  return spec;
}

std::vector<BenchRow> run_bench(const BenchSpec& spec, int jobs) {
  spec.validate();
  std::vector<BenchRow> rows;
  const auto run = [&](const PosePreset& preset, double sigma, std::string label) {
    BenchRow row;
    row.label = std::move(label);
    row.sigma = sigma;
    row.pose = preset.name;
    row.report = run_trials(make_config(spec, preset, sigma), jobs);
    rows.push_back(std::move(row));
  };
  switch (spec.scenario) {
    case BenchSpec::Scenario::kTable2:
      for (double sigma : spec.sigma_list) run(spec.pose_list.front(), sigma, format_sigma(sigma));
      break;
    case BenchSpec::Scenario::kTable3:
      for (const PosePreset& p : spec.pose_list) run(p, spec.sigma_list.front(), p.name);
      break;
    case BenchSpec::Scenario::kCustom:
      for (const PosePreset& p : spec.pose_list) {
        for (double sigma : spec.sigma_list) run(p, sigma, p.name + "@" + format_sigma(sigma));
      }
      break;
  }
  return rows;
}

std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::string out = "sigma_or_pose,mean_err_R,std_err_R,mean_err_T,std_err_T,trials,failures\n";
  char buf[256];
  for (const BenchRow& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%.10g,%.10g,%.10g,%.10g,%zu,%d\n", r.label.c_str(),
                  r.report.mean_err_r, r.report.std_err_r, r.report.mean_err_t,
                  r.report.std_err_t, r.report.trials.size(), r.report.failures);
    out += buf;
  }
  return out;
}

std::string bench_gnuplot(const std::vector<BenchRow>& rows) {
  std::string out = "# index sigma_px mean_err_R std_err_R mean_err_T std_err_T label\n";
  char buf[256];
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const BenchRow& r = rows[i];
    std::snprintf(buf, sizeof buf, "%zu %.10g %.10g %.10g %.10g %.10g %s\n", i, r.sigma,
                  r.report.mean_err_r, r.report.std_err_r, r.report.mean_err_t,
                  r.report.std_err_t, r.label.c_str());
    out += buf;
  }
  return out;
}

}  // namespace lfrect
