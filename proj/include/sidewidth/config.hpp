#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sidewidth/mask.hpp"
#include "sidewidth/measure.hpp"
#include "sidewidth/planefit.hpp"

namespace sidewidth {

struct MaskConfig {
  double min_region_frac = 0.001;
  double max_hole_frac = 0.0005;
  double min_sidewalk_frac = 0.02;
  double min_road_frac = 0.05;
  std::vector<int> road_ids{0};
  std::vector<int> sidewalk_ids{1};

  ClassMap class_map() const;
  std::size_t min_region_px(std::size_t pixel_count) const;
  std::size_t max_hole_px(std::size_t pixel_count) const;
};

struct CalibrationConfig {
  double h_cam_m = 2.5;
  double fov_deg = 90.0;
};

struct NetworkConfig {
  double sample_interval_m = 30.0;
  double dedup_cell_m = 20.0;
  double bearing_half_window_m = 15.0;
};

/// Every tunable of the pipeline, with built-in defaults.
struct PipelineConfig {
  MaskConfig mask;
  RansacConfig ransac;
  MeasureConfig measure;
  CalibrationConfig calibration;
  NetworkConfig network;
  std::uint64_t seed = 0;
  unsigned workers = 0;  // 0 = logical CPU count

  /// Throws ConfigError naming the offending key.
  void validate() const;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Parses a TOML-style document: `[section]` headers, `key = value` lines, `#` comments. Values are numbers,
/// booleans, double-quoted strings or flat arrays of integers. Unknown keys are errors.
PipelineConfig parse_config(std::string_view text, const std::string& source = "<config>");
PipelineConfig load_config(const std::filesystem::path& path);

/// Canonical document reproducing `config` exactly.
std::string format_config(const PipelineConfig& config);

}  // namespace sidewidth
