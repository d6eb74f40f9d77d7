#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sidewidth/calibrate.hpp"
#include "sidewidth/error.hpp"
#include "sidewidth/mask.hpp"
#include "sidewidth/planefit.hpp"
#include "sidewidth/tensor_io.hpp"

namespace sidewidth {

/// Half-open column range [first, last).
struct ColumnRange {
  int first = 0;
  int last = 0;
  int size() const noexcept { return last - first; }
};

/// Contiguous band of round(band_fraction * width_px) columns centred on the image.
ColumnRange central_band(int width_px, double band_fraction);

/// Sidewalk run chosen in one mask column. Rows are image rows (0 = top).
struct RunSelection {
  int inner_row = 0;
  int outer_row = 0;
  bool inner_is_bottom = true;  // inner end is the lower (larger-row) end of the run
};

/// Picks the longest contiguous sidewalk run (ties: lower end nearest the image bottom). The inner end is
/// the one adjacent to road pixels, else the bottom end. `column` is ordered top to bottom.
std::optional<RunSelection> select_column_segment(std::span<const SemanticClass> column);

/// x - (n . x + d) n.
Eigen::Vector3d project_to_plane(const Eigen::Vector3d& point, const GroundPlane& plane);

/// How a boundary pixel is turned into a 3D edge location.
enum class BoundaryMode {
  /// Midpoint between the boundary pixel and its neighbour just outside the run (the pixel edge).
  EdgeMidpoint,
  /// The boundary pixel's own 3D point.
  Pixel,
};

struct ColumnSample {
  int column = 0;
  Eigen::Vector2i inner_px = Eigen::Vector2i::Zero();  // (u, v)
  Eigen::Vector2i outer_px = Eigen::Vector2i::Zero();
  Eigen::Vector3d inner_3d = Eigen::Vector3d::Zero();  // on the plane, model units
  Eigen::Vector3d outer_3d = Eigen::Vector3d::Zero();
  double width_model = 0.0;
  bool valid = false;
  std::string reason;  // empty when valid
};

struct DirectionEstimate {
  Eigen::Vector3d across = Eigen::Vector3d::Zero();
  Eigen::Vector3d along = Eigen::Vector3d::Zero();
  double anisotropy = 0.0;  // sqrt of the principal/secondary variance ratio of the midpoint scatter
};

/// In-plane unit vector orthogonal to the dominant axis of the boundary midpoints, signed so that
/// outer - inner projects non-negatively on average. Throws Rejected on too few valid samples or when
/// the scatter is too isotropic (anisotropy < min_anisotropy).
DirectionEstimate across_direction(std::span<const ColumnSample> samples, const GroundPlane& plane,
                                   std::size_t min_valid_columns = 20, double min_anisotropy = 1.2);

/// |(outer_3d - inner_3d) . direction| in model units.
double column_width(const ColumnSample& sample, const Eigen::Vector3d& direction);

struct MeasureConfig {
  double band_fraction = 0.5;
  std::size_t min_valid_columns = 20;
  double min_width_m = 0.3;
  double max_width_m = 8.0;
  double max_dispersion = 0.5;  // MAD / median of per-column widths; infinity disables the gate
  double min_anisotropy = 1.2;
  double min_inlier_ratio = 0.3;
  BoundaryMode boundary = BoundaryMode::EdgeMidpoint;

  void validate() const;
};

/// Scans `band` and returns one sample per column, valid or not.
std::vector<ColumnSample> extract_column_samples(const PointMap& points, const SemanticMask& mask,
                                                 const GroundPlane& plane, ColumnRange band, BoundaryMode mode);

enum class MeasureStatus { Accepted, Rejected, Failed };

std::string_view to_string(MeasureStatus status) noexcept;

struct WidthMeasurement {
  std::string image_id;
  MeasureStatus status = MeasureStatus::Failed;
  std::optional<RejectReason> reason;
  std::string detail;
  double width_m = 0.0;
  double scale = 0.0;
  std::size_t n_valid_columns = 0;
  std::vector<ColumnSample> column_samples;
  std::vector<double> per_column_widths_m;
  GroundPlane plane;
  ScaleCalibration calibration;
  double anisotropy = 0.0;
  double dispersion = 0.0;

  bool accepted() const noexcept { return status == MeasureStatus::Accepted; }
};

/// Column scan -> direction -> per-column metric widths -> median, then the plausibility gates.
/// Gate failures are reported in the status, never thrown.
WidthMeasurement measure_width(const PointMap& points, const SemanticMask& mask, const GroundPlane& plane,
                               const ScaleCalibration& calibration, const MeasureConfig& config);

}  // namespace sidewidth
