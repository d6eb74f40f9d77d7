#include "sidewidth/measure.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>

#include "sidewidth/stats.hpp"

namespace sidewidth {

ColumnRange central_band(int width_px, double band_fraction) {
  if (width_px <= 0) throw Error("central_band: width must be positive");
  if (!(band_fraction > 0.0 && band_fraction <= 1.0)) throw Error("central_band: band_fraction must be in (0, 1]");
  const int length = std::clamp(static_cast<int>(std::lround(band_fraction * width_px)), 1, width_px);
  const int first = (width_px - length) / 2;
  return {first, first + length};
}

std::optional<RunSelection> select_column_segment(std::span<const SemanticClass> column) {
  const int h = static_cast<int>(column.size());
  int best_top = -1;
  int best_bottom = -1;
  for (int v = 0; v < h;) {
    if (column[v] != SemanticClass::Sidewalk) {
      ++v;
      continue;
    }
    const int top = v;
    while (v < h && column[v] == SemanticClass::Sidewalk) ++v;
    const int bottom = v - 1;
    // Later runs sit lower in the image, so ">=" implements the bottom-nearest tie-break.
    if (best_top < 0 || bottom - top >= best_bottom - best_top) {
      best_top = top;
      best_bottom = bottom;
    }
  }
  if (best_top < 0) return std::nullopt;

  const bool road_below = best_bottom + 1 < h && column[best_bottom + 1] == SemanticClass::Road;
  const bool road_above = best_top - 1 >= 0 && column[best_top - 1] == SemanticClass::Road;
  const bool inner_is_bottom = road_below || !road_above;
  if (inner_is_bottom) return RunSelection{best_bottom, best_top, true};
  return RunSelection{best_top, best_bottom, false};
}

Eigen::Vector3d project_to_plane(const Eigen::Vector3d& point, const GroundPlane& plane) {
  return point - plane.signed_distance(point) * plane.normal;
}

void MeasureConfig::validate() const {
  if (!(band_fraction > 0.0 && band_fraction <= 1.0)) throw Error("measure.band_fraction must be in (0, 1]");
  if (min_valid_columns < 2) throw Error("measure.min_valid_columns must be >= 2");
  if (!(min_width_m >= 0.0 && min_width_m < max_width_m)) throw Error("measure width range must satisfy 0 <= min < max");
  if (!(max_dispersion > 0.0)) throw Error("measure.max_dispersion must be positive");
  if (!(min_anisotropy >= 1.0)) throw Error("measure.min_anisotropy must be >= 1");
  if (!(min_inlier_ratio >= 0.0 && min_inlier_ratio <= 1.0)) throw Error("measure.min_inlier_ratio must be in [0, 1]");
}

namespace {

// Edge location on the plane for a boundary pixel whose run continues in direction -step.
Eigen::Vector3d boundary_point(const PointMap& points, const GroundPlane& plane, int u, int v, int step,
                               BoundaryMode mode) {
  const Eigen::Vector3d own = project_to_plane(points.point(u, v), plane);
  if (mode == BoundaryMode::Pixel) return own;
  const int nv = v + step;
  if (nv < 0 || nv >= points.height() || !points.valid(u, nv)) return own;
  return 0.5 * (own + project_to_plane(points.point(u, nv), plane));
}

}  // namespace

std::vector<ColumnSample> extract_column_samples(const PointMap& points, const SemanticMask& mask,
                                                 const GroundPlane& plane, ColumnRange band, BoundaryMode mode) {
  require_same_dimensions(mask, points.width(), points.height(), "measure");
  std::vector<ColumnSample> samples;
  samples.reserve(static_cast<std::size_t>(std::max(0, band.size())));
  std::vector<SemanticClass> column(static_cast<std::size_t>(mask.height()));
  for (int u = band.first; u < band.last; ++u) {
    ColumnSample s;
    s.column = u;
    for (int v = 0; v < mask.height(); ++v) column[v] = mask.at(u, v);
    const auto run = select_column_segment(column);
    if (!run) {
      s.reason = "no_sidewalk_run";
      samples.push_back(std::move(s));
      continue;
    }
    s.inner_px = {u, run->inner_row};
    s.outer_px = {u, run->outer_row};
    if (!points.valid(u, run->inner_row) || !points.valid(u, run->outer_row)) {
      s.reason = "invalid_3d";
      samples.push_back(std::move(s));
      continue;
    }
    const int inner_step = run->inner_is_bottom ? 1 : -1;
    s.inner_3d = boundary_point(points, plane, u, run->inner_row, inner_step, mode);
    s.outer_3d = boundary_point(points, plane, u, run->outer_row, -inner_step, mode);
    s.valid = true;
    samples.push_back(std::move(s));
  }
  return samples;
}

DirectionEstimate across_direction(std::span<const ColumnSample> samples, const GroundPlane& plane,
                                   std::size_t min_valid_columns, double min_anisotropy) {
  std::vector<Eigen::Vector3d> mids;
  Eigen::Vector3d mean_span = Eigen::Vector3d::Zero();
  for (const auto& s : samples) {
    if (!s.valid) continue;
    mids.push_back(0.5 * (s.inner_3d + s.outer_3d));
    mean_span += s.outer_3d - s.inner_3d;
  }
  if (mids.size() < min_valid_columns || mids.size() < 2) {
    throw Rejected(RejectReason::InsufficientValidColumns,
                   "insufficient valid columns: " + std::to_string(mids.size()) + " < " +
                       std::to_string(min_valid_columns));
  }

  const Eigen::Vector3d& n = plane.normal;
  Eigen::Index axis = 0;
  n.cwiseAbs().minCoeff(&axis);
  const Eigen::Vector3d e1 = n.cross(Eigen::Vector3d::Unit(axis)).normalized();
  const Eigen::Vector3d e2 = n.cross(e1);

  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  std::vector<Eigen::Vector2d> flat;
  flat.reserve(mids.size());
  for (const auto& m : mids) {
    flat.emplace_back(m.dot(e1), m.dot(e2));
    mean += flat.back();
  }
  mean /= static_cast<double>(flat.size());
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const auto& q : flat) cov.noalias() += (q - mean) * (q - mean).transpose();
  cov /= static_cast<double>(flat.size());

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
  const double minor = std::max(eig.eigenvalues()(0), 0.0);
  const double major = eig.eigenvalues()(1);
  DirectionEstimate out;
  out.anisotropy = minor > 0.0 ? std::sqrt(major / minor) : std::numeric_limits<double>::infinity();
  if (!(major > 0.0) || out.anisotropy < min_anisotropy) {
    throw Rejected(RejectReason::AmbiguousDirection,
                   "ambiguous direction: anisotropy " + std::to_string(out.anisotropy) + " < " +
                       std::to_string(min_anisotropy));
  }
  const Eigen::Vector2d principal = eig.eigenvectors().col(1);
  out.along = (principal.x() * e1 + principal.y() * e2).normalized();
  out.across = n.cross(out.along).normalized();
  if (mean_span.dot(out.across) < 0.0) out.across = -out.across;
  return out;
}

double column_width(const ColumnSample& sample, const Eigen::Vector3d& direction) {
  return std::abs((sample.outer_3d - sample.inner_3d).dot(direction));
}

std::string_view to_string(MeasureStatus status) noexcept {
  switch (status) {
    case MeasureStatus::Accepted: return "accepted";
    case MeasureStatus::Rejected: return "rejected";
    case MeasureStatus::Failed: return "failed";
  }
  return "unknown";
}

WidthMeasurement measure_width(const PointMap& points, const SemanticMask& mask, const GroundPlane& plane,
                               const ScaleCalibration& calibration, const MeasureConfig& config) {
  config.validate();
  WidthMeasurement m;
  m.plane = plane;
  m.calibration = calibration;
  m.scale = calibration.scale;
  try {
    if (plane.inlier_ratio < config.min_inlier_ratio) {
      throw Rejected(RejectReason::LowInlierRatio, "plane inlier ratio " + std::to_string(plane.inlier_ratio));
    }
    m.column_samples =
        extract_column_samples(points, mask, plane, central_band(points.width(), config.band_fraction), config.boundary);
    m.n_valid_columns = static_cast<std::size_t>(
        std::count_if(m.column_samples.begin(), m.column_samples.end(), [](const auto& s) { return s.valid; }));

    const DirectionEstimate dir =
        across_direction(m.column_samples, plane, config.min_valid_columns, config.min_anisotropy);
    m.anisotropy = dir.anisotropy;
    for (auto& s : m.column_samples) {
      if (!s.valid) continue;
      s.width_model = column_width(s, dir.across);
      m.per_column_widths_m.push_back(s.width_model * calibration.scale);
    }
    m.width_m = median(m.per_column_widths_m);
    m.dispersion = m.width_m > 0.0 ? mad(m.per_column_widths_m) / m.width_m : std::numeric_limits<double>::infinity();

    if (m.width_m < config.min_width_m || m.width_m > config.max_width_m) {
      throw Rejected(RejectReason::WidthOutOfRange, "width " + std::to_string(m.width_m) + " m outside [" +
                                                        std::to_string(config.min_width_m) + ", " +
                                                        std::to_string(config.max_width_m) + "]");
    }
    if (m.dispersion > config.max_dispersion) {
      throw Rejected(RejectReason::HighDispersion, "per-column dispersion " + std::to_string(m.dispersion));
    }
    m.status = MeasureStatus::Accepted;
  } catch (const Rejected& r) {
    m.status = MeasureStatus::Rejected;
    m.reason = r.reason();
    m.detail = r.what();
  }
  return m;
}

}  // namespace sidewidth
