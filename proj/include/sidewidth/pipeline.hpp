#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "sidewidth/calibrate.hpp"
#include "sidewidth/config.hpp"
#include "sidewidth/manifest.hpp"
#include "sidewidth/measure.hpp"

namespace sidewidth {

enum class CalibrationMode { CameraHeight, Native };

/// Per-run modifications of the standard per-image pipeline.
struct RunOptions {
  CalibrationMode calibration = CalibrationMode::CameraHeight;
  /// Replace the supplied geometry by a level camera over flat ground at h_cam.
  bool flat_pinhole = false;
  std::optional<double> band_fraction;
  /// Takes precedence over the manifest and the configuration.
  std::optional<double> h_cam_override;
};

/// Manifest intrinsics when present, else derived from the field of view (manifest, then config).
CameraModel camera_for(const ImageManifestEntry& entry, int width, int height, const PipelineConfig& config);

/// Override > manifest field > configuration default.
double resolve_camera_height(const ImageManifestEntry& entry, const PipelineConfig& config,
                             const RunOptions& options = {});

/// Road + sidewalk pixels with valid 3D, in row-major order.
std::vector<Eigen::Vector3d> ground_support_points(const PointMap& points, const SemanticMask& mask);

/// Mask clean-up -> support gate -> ground plane -> scale -> width. Rejections and errors are reported in
/// the returned status; this function does not throw for per-image problems.
WidthMeasurement measure_image(const ImageManifestEntry& entry, const ImageData& data, const PipelineConfig& config,
                               const RunOptions& options = {});

/// A batch of images addressable by index; `load` must be safe to call concurrently.
class ImageSource {
 public:
  virtual ~ImageSource() = default;
  virtual const std::vector<ImageManifestEntry>& entries() const = 0;
  virtual ImageData load(std::size_t index) const = 0;
  std::size_t size() const { return entries().size(); }
};

/// Images listed in a manifest file.
class ManifestSource : public ImageSource {
 public:
  ManifestSource(std::vector<ImageManifestEntry> entries, ClassMap class_map)
      : entries_(std::move(entries)), class_map_(class_map) {}

  const std::vector<ImageManifestEntry>& entries() const override { return entries_; }
  ImageData load(std::size_t index) const override { return load_image(entries_.at(index), class_map_); }

 private:
  std::vector<ImageManifestEntry> entries_;
  ClassMap class_map_;
};

/// Measures every image; a failure to load one image is recorded as its status. Results are in source order.
std::vector<WidthMeasurement> measure_batch(const ImageSource& source, const PipelineConfig& config,
                                            const RunOptions& options = {}, bool keep_columns = false);

}  // namespace sidewidth
