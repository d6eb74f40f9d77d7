#include "sidewidth/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace sidewidth {

ClassMap MaskConfig::class_map() const {
  ClassMap m = ClassMap::cityscapes();
  m.assign(0, SemanticClass::Other);
  m.assign(1, SemanticClass::Other);
  for (int id : road_ids) m.assign(static_cast<std::uint8_t>(id), SemanticClass::Road);
  for (int id : sidewalk_ids) m.assign(static_cast<std::uint8_t>(id), SemanticClass::Sidewalk);
  return m;
}

std::size_t MaskConfig::min_region_px(std::size_t pixel_count) const {
  return static_cast<std::size_t>(std::llround(min_region_frac * static_cast<double>(pixel_count)));
}

std::size_t MaskConfig::max_hole_px(std::size_t pixel_count) const {
  return static_cast<std::size_t>(std::llround(max_hole_frac * static_cast<double>(pixel_count)));
}

void PipelineConfig::validate() const {
  auto frac = [](double v, const char* key) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(std::string(key) + " must be in [0, 1]");
  };
  frac(mask.min_region_frac, "mask.min_region_frac");
  frac(mask.max_hole_frac, "mask.max_hole_frac");
  frac(mask.min_sidewalk_frac, "mask.min_sidewalk_frac");
  frac(mask.min_road_frac, "mask.min_road_frac");
  for (const auto* ids : {&mask.road_ids, &mask.sidewalk_ids}) {
    for (int id : *ids) {
      if (id < 0 || id > 255) throw ConfigError("mask class ids must be in [0, 255]");
    }
  }
  try {
    ransac.validate();
    measure.validate();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  if (!(calibration.h_cam_m > 0.0)) throw ConfigError("calibration.h_cam_m must be > 0");
  if (!(calibration.fov_deg > 0.0 && calibration.fov_deg < 180.0))
    throw ConfigError("calibration.fov_deg must be in (0, 180)");
  if (!(network.sample_interval_m > 0.0)) throw ConfigError("network.sample_interval_m must be > 0");
  if (!(network.dedup_cell_m > 0.0)) throw ConfigError("network.dedup_cell_m must be > 0");
  if (!(network.bearing_half_window_m > 0.0)) throw ConfigError("network.bearing_half_window_m must be > 0");
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

struct Value {
  std::string text;
  std::string where;

  double as_double() const {
    double v = 0.0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) throw ConfigError(where + ": expected a number, got '" + text + "'");
    return v;
  }
  long long as_int() const {
    long long v = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end) throw ConfigError(where + ": expected an integer, got '" + text + "'");
    return v;
  }
  std::uint64_t as_u64() const {
    std::uint64_t v = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (ec != std::errc() || ptr != end)
      throw ConfigError(where + ": expected a non-negative integer, got '" + text + "'");
    return v;
  }
  std::string as_string() const {
    if (text.size() < 2 || text.front() != '"' || text.back() != '"')
      throw ConfigError(where + ": expected a double-quoted string");
    return text.substr(1, text.size() - 2);
  }
  std::vector<int> as_int_array() const {
    if (text.size() < 2 || text.front() != '[' || text.back() != ']')
      throw ConfigError(where + ": expected an array like [0, 1]");
    std::vector<int> out;
    std::stringstream ss(text.substr(1, text.size() - 2));
    std::string item;
    while (std::getline(ss, item, ',')) {
      const std::string t = trim(item);
      if (t.empty()) continue;
      out.push_back(static_cast<int>(Value{t, where}.as_int()));
    }
    return out;
  }
};

using Setter = std::function<void(PipelineConfig&, const Value&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"seed", [](PipelineConfig& c, const Value& v) { c.seed = v.as_u64(); }},
      {"workers", [](PipelineConfig& c, const Value& v) { c.workers = static_cast<unsigned>(v.as_u64()); }},
      {"mask.min_region_frac", [](PipelineConfig& c, const Value& v) { c.mask.min_region_frac = v.as_double(); }},
      {"mask.max_hole_frac", [](PipelineConfig& c, const Value& v) { c.mask.max_hole_frac = v.as_double(); }},
      {"mask.min_sidewalk_frac", [](PipelineConfig& c, const Value& v) { c.mask.min_sidewalk_frac = v.as_double(); }},
      {"mask.min_road_frac", [](PipelineConfig& c, const Value& v) { c.mask.min_road_frac = v.as_double(); }},
      {"mask.road_ids", [](PipelineConfig& c, const Value& v) { c.mask.road_ids = v.as_int_array(); }},
      {"mask.sidewalk_ids", [](PipelineConfig& c, const Value& v) { c.mask.sidewalk_ids = v.as_int_array(); }},
      {"ransac.iterations", [](PipelineConfig& c, const Value& v) { c.ransac.iterations = static_cast<int>(v.as_int()); }},
      {"ransac.mad_multiplier", [](PipelineConfig& c, const Value& v) { c.ransac.mad_multiplier = v.as_double(); }},
      {"ransac.mad_consistency", [](PipelineConfig& c, const Value& v) { c.ransac.mad_consistency = v.as_double(); }},
      {"ransac.clip_lo", [](PipelineConfig& c, const Value& v) { c.ransac.clip_lo = v.as_double(); }},
      {"ransac.clip_hi", [](PipelineConfig& c, const Value& v) { c.ransac.clip_hi = v.as_double(); }},
      {"ransac.min_support_points",
       [](PipelineConfig& c, const Value& v) { c.ransac.min_support_points = static_cast<std::size_t>(v.as_u64()); }},
      {"ransac.min_inlier_ratio",
       [](PipelineConfig& c, const Value& v) {
         c.ransac.min_inlier_ratio = v.as_double();
         c.measure.min_inlier_ratio = c.ransac.min_inlier_ratio;
       }},
      {"measure.band_fraction", [](PipelineConfig& c, const Value& v) { c.measure.band_fraction = v.as_double(); }},
      {"measure.min_valid_columns",
       [](PipelineConfig& c, const Value& v) { c.measure.min_valid_columns = static_cast<std::size_t>(v.as_u64()); }},
      {"measure.min_width_m", [](PipelineConfig& c, const Value& v) { c.measure.min_width_m = v.as_double(); }},
      {"measure.max_width_m", [](PipelineConfig& c, const Value& v) { c.measure.max_width_m = v.as_double(); }},
      {"measure.max_dispersion", [](PipelineConfig& c, const Value& v) { c.measure.max_dispersion = v.as_double(); }},
      {"measure.min_anisotropy", [](PipelineConfig& c, const Value& v) { c.measure.min_anisotropy = v.as_double(); }},
      {"measure.boundary",
       [](PipelineConfig& c, const Value& v) {
         const std::string mode = v.as_string();
         if (mode == "edge_midpoint") {
           c.measure.boundary = BoundaryMode::EdgeMidpoint;
         } else if (mode == "pixel") {
           c.measure.boundary = BoundaryMode::Pixel;
         } else {
           throw ConfigError(v.where + ": measure.boundary must be \"edge_midpoint\" or \"pixel\"");
         }
       }},
      {"calibration.h_cam_m", [](PipelineConfig& c, const Value& v) { c.calibration.h_cam_m = v.as_double(); }},
      {"calibration.fov_deg", [](PipelineConfig& c, const Value& v) { c.calibration.fov_deg = v.as_double(); }},
      {"network.sample_interval_m",
       [](PipelineConfig& c, const Value& v) { c.network.sample_interval_m = v.as_double(); }},
      {"network.dedup_cell_m", [](PipelineConfig& c, const Value& v) { c.network.dedup_cell_m = v.as_double(); }},
      {"network.bearing_half_window_m",
       [](PipelineConfig& c, const Value& v) { c.network.bearing_half_window_m = v.as_double(); }},
  };
  return table;
}

std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_string = !in_string;
    if (line[i] == '#' && !in_string) return line.substr(0, i);
  }
  return line;
}

std::string join_ids(const std::vector<int>& ids) {
  std::string s = "[";
  for (std::size_t i = 0; i < ids.size(); ++i) s += (i ? ", " : "") + std::to_string(ids[i]);
  return s + "]";
}

// shortest text that parses back to v
std::string num(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

PipelineConfig parse_config(std::string_view text, const std::string& source) {
  PipelineConfig config;
  std::istringstream in{std::string(text)};
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = source + ":" + std::to_string(line_no);
    const std::string body = trim(strip_comment(line));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') throw ConfigError(where + ": malformed section header");
      section = trim(std::string_view(body).substr(1, body.size() - 2));
      continue;
    }
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    const std::string full = section.empty() ? key : section + "." + key;
    const auto it = setters().find(full);
    if (it == setters().end()) throw ConfigError(where + ": unknown key '" + full + "'");
    it->second(config, Value{value, where});
  }
  config.validate();
  return config;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

std::string format_config(const PipelineConfig& c) {
  std::ostringstream os;
  os << "seed = " << c.seed << "\n";
  os << "workers = " << c.workers << "\n\n";
  os << "[mask]\n";
  os << "min_region_frac = " << num(c.mask.min_region_frac) << "\n";
  os << "max_hole_frac = " << num(c.mask.max_hole_frac) << "\n";
  os << "min_sidewalk_frac = " << num(c.mask.min_sidewalk_frac) << "\n";
  os << "min_road_frac = " << num(c.mask.min_road_frac) << "\n";
  os << "road_ids = " << join_ids(c.mask.road_ids) << "\n";
  os << "sidewalk_ids = " << join_ids(c.mask.sidewalk_ids) << "\n\n";
  os << "[ransac]\n";
  os << "iterations = " << c.ransac.iterations << "\n";
  os << "mad_multiplier = " << num(c.ransac.mad_multiplier) << "\n";
  os << "mad_consistency = " << num(c.ransac.mad_consistency) << "\n";
  os << "clip_lo = " << num(c.ransac.clip_lo) << "\n";
  os << "clip_hi = " << num(c.ransac.clip_hi) << "\n";
  os << "min_support_points = " << c.ransac.min_support_points << "\n";
  os << "min_inlier_ratio = " << num(c.ransac.min_inlier_ratio) << "\n\n";
  os << "[measure]\n";
  os << "band_fraction = " << num(c.measure.band_fraction) << "\n";
  os << "min_valid_columns = " << c.measure.min_valid_columns << "\n";
  os << "min_width_m = " << num(c.measure.min_width_m) << "\n";
  os << "max_width_m = " << num(c.measure.max_width_m) << "\n";
  os << "max_dispersion = " << num(c.measure.max_dispersion) << "\n";
  os << "min_anisotropy = " << num(c.measure.min_anisotropy) << "\n";
  os << "boundary = \"" << (c.measure.boundary == BoundaryMode::Pixel ? "pixel" : "edge_midpoint") << "\"\n\n";
  os << "[calibration]\n";
  os << "h_cam_m = " << num(c.calibration.h_cam_m) << "\n";
  os << "fov_deg = " << num(c.calibration.fov_deg) << "\n\n";
  os << "[network]\n";
  os << "sample_interval_m = " << num(c.network.sample_interval_m) << "\n";
  os << "dedup_cell_m = " << num(c.network.dedup_cell_m) << "\n";
  os << "bearing_half_window_m = " << num(c.network.bearing_half_window_m) << "\n";
  return os.str();
}

}  // namespace sidewidth
