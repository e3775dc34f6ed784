#include "context.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "con360/io.hpp"

namespace con360::cli {

fs::path RunContext::input(const std::string& arg) const {
  const fs::path p(arg);
  if (p.is_absolute() || data_root.empty()) return p;
  return data_root / p;
}

fs::path RunContext::output(const std::string& arg) const {
  fs::path p(arg);
  if (!p.is_absolute()) p = (data_root.empty() ? fs::path(".") : data_root) / "runs" / run_id / p;
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  return p;
}

fs::path RunContext::output_dir(const std::string& arg) const {
  fs::path p(arg);
  if (!p.is_absolute()) p = (data_root.empty() ? fs::path(".") : data_root) / "runs" / run_id / p;
  fs::create_directories(p);
  return p;
}

void RunContext::report(const fs::path& written) const {
  if (out) *out << "wrote " << written.string() << '\n';
}

void Sidecar::add_input(const std::string& role, const std::string& arg,
                        const fs::path& resolved) {
  inputs_.push_back({{"role", role}, {"path", arg}, {"sha256", io::sha256_file(resolved)}});
}

void Sidecar::add_output(const fs::path& file) { outputs_.push_back(file); }

void Sidecar::write(const fs::path& path) const {
  json outputs = json::array();
  const fs::path base = path.parent_path();
  for (const auto& f : outputs_) {
    outputs.push_back({{"path", f.lexically_relative(base).generic_string()},
                       {"sha256", io::sha256_file(f)}});
  }
  const json doc = {{"command", command_},
                    {"params", params},
                    {"inputs", inputs_},
                    {"outputs", outputs},
                    {"tool_version", "0.1.0"}};
  io::write_text_atomic(path, doc.dump(2) + "\n");
}

fs::path sidecar_path_for_file(const fs::path& file) {
  return file.parent_path() / (file.stem().string() + ".sidecar.json");
}

fs::path sidecar_path_for_dir(const fs::path& dir) { return dir / "sidecar.json"; }

std::pair<double, double> parse_pair(const std::string& text, char sep, const char* what) {
  const auto pos = text.find(sep);
  if (pos == std::string::npos) {
    throw UsageError(std::string(what) + " must look like A" + sep + "B, got '" + text + "'");
  }
  const auto a = parse_list(text.substr(0, pos), what);
  const auto b = parse_list(text.substr(pos + 1), what);
  if (a.size() != 1 || b.size() != 1) {
    throw UsageError(std::string(what) + " must look like A" + sep + "B, got '" + text + "'");
  }
  return {a[0], b[0]};
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || !std::isfinite(v)) {
      throw UsageError(std::string("bad number '") + item + "' in " + what);
    }
    values.push_back(v);
  }
  if (values.empty()) throw UsageError(std::string(what) + " is empty");
  return values;
}

double deg_to_rad(double deg) { return deg * geometry::kPi / 180.0; }
double rad_to_deg(double rad) { return rad * 180.0 / geometry::kPi; }

void write_preview_pgm(std::span<const float> plane, std::size_t width, std::size_t height,
                       const fs::path& path) {
  const auto [lo_it, hi_it] = std::minmax_element(plane.begin(), plane.end());
  const double lo = *lo_it;
  const double range = static_cast<double>(*hi_it) - lo;
  io::GrayImageFile img{width, height, 16, std::vector<std::uint16_t>(plane.size(), 0)};
  if (range > 0.0) {
    for (std::size_t i = 0; i < plane.size(); ++i) {
      img.samples[i] = static_cast<std::uint16_t>(std::lround((plane[i] - lo) / range * 65535.0));
    }
  }
  io::write_pgm16(img, path);
}

json fov_to_json(const geometry::FovSpec& fov) {
  return {{"lat", fov.center.lat},
          {"lon", fov.center.lon},
          {"hfov", fov.hfov},
          {"vfov", fov.vfov},
          {"roll", fov.roll}};
}

geometry::FovSpec fov_from_json(const json& j) {
  geometry::FovSpec fov;
  fov.center.lat = j.at("lat").get<double>();
  fov.center.lon = j.at("lon").get<double>();
  fov.hfov = j.at("hfov").get<double>();
  fov.vfov = j.at("vfov").get<double>();
  fov.roll = j.value("roll", 0.0);
  return fov;
}

}  // namespace con360::cli
