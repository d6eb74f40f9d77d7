#include "sidewidth/eval.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <variant>

#include "sidewidth/error.hpp"

namespace sidewidth {

MetricsReport compute_metrics(std::span<const WidthPair> pairs) {
  if (pairs.empty()) throw Error("metrics: empty input");
  double abs_sum = 0.0;
  double sq_sum = 0.0;
  double sum = 0.0;
  std::size_t within_025 = 0;
  std::size_t within_050 = 0;
  for (const auto& p : pairs) {
    if (!std::isfinite(p.pred_m) || !std::isfinite(p.truth_m)) throw Error("metrics: non-finite value");
    const double e = p.pred_m - p.truth_m;
    const double a = std::abs(e);
    abs_sum += a;
    sq_sum += e * e;
    sum += e;
    if (a < 0.25) ++within_025;
    if (a < 0.50) ++within_050;
  }
  const double n = static_cast<double>(pairs.size());
  MetricsReport r;
  r.mae_m = abs_sum / n;
  r.rmse_m = std::sqrt(sq_sum / n);
  r.bias_m = sum / n;
  r.frac_025 = static_cast<double>(within_025) / n;
  r.frac_050 = static_cast<double>(within_050) / n;
  r.n_evaluated = pairs.size();
  return r;
}

ReferenceWidths reference_widths(const std::vector<ImageManifestEntry>& entries) {
  ReferenceWidths refs;
  for (const auto& e : entries) {
    if (e.reference_width_m) refs.emplace(e.image_id, *e.reference_width_m);
  }
  return refs;
}

MetricsReport evaluate(const std::vector<WidthMeasurement>& measurements, const ReferenceWidths& references) {
  if (references.empty()) throw Error("no ground truth: no reference widths available");
  std::vector<WidthPair> pairs;
  std::size_t rejected = 0;
  for (const auto& m : measurements) {
    const auto it = references.find(m.image_id);
    if (it == references.end()) continue;
    if (m.accepted()) {
      pairs.push_back({m.width_m, it->second});
    } else {
      ++rejected;
    }
  }
  MetricsReport r;
  if (pairs.empty()) {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    r.mae_m = r.rmse_m = r.bias_m = r.frac_025 = r.frac_050 = nan;
  } else {
    r = compute_metrics(pairs);
  }
  r.n_rejected = rejected;
  return r;
}

std::string_view to_string(AblationVariant variant) noexcept {
  switch (variant) {
    case AblationVariant::Full: return "full_pipeline";
    case AblationVariant::NoScaleCalibration: return "no_scale_calibration";
    case AblationVariant::PinholeOnly: return "pinhole_only";
    case AblationVariant::FullImageWidth: return "full_image_width";
  }
  return "unknown";
}

AblationVariant parse_ablation_variant(std::string_view name) {
  for (auto v : kAllAblationVariants) {
    if (to_string(v) == name) return v;
  }
  throw Error("unknown ablation variant '" + std::string(name) + "'");
}

RunOptions ablation_options(AblationVariant variant) {
  RunOptions o;
  switch (variant) {
    case AblationVariant::Full: break;
    case AblationVariant::NoScaleCalibration: o.calibration = CalibrationMode::Native; break;
    case AblationVariant::PinholeOnly: o.flat_pinhole = true; break;
    case AblationVariant::FullImageWidth: o.band_fraction = 1.0; break;
  }
  return o;
}

MetricsReport run_ablation(const ImageSource& source, const PipelineConfig& config, AblationVariant variant) {
  return evaluate(measure_batch(source, config, ablation_options(variant)), reference_widths(source.entries()));
}

WidthMeasurement rescale_measurement(const WidthMeasurement& base, double base_h_cam_m, double h_cam_m,
                                     const MeasureConfig& config) {
  WidthMeasurement m = base;
  const bool measured = base.accepted() || (base.status == MeasureStatus::Rejected &&
                                            (base.reason == RejectReason::WidthOutOfRange ||
                                             base.reason == RejectReason::HighDispersion));
  if (!measured) return m;
  const double ratio = h_cam_m / base_h_cam_m;
  m.calibration = scale_factor(h_cam_m, base.calibration.h_pred);
  m.scale = m.calibration.scale;
  m.width_m = base.width_m * ratio;
  for (auto& w : m.per_column_widths_m) w *= ratio;
  m.status = MeasureStatus::Accepted;
  m.reason.reset();
  m.detail.clear();
  if (m.width_m < config.min_width_m || m.width_m > config.max_width_m) {
    m.status = MeasureStatus::Rejected;
    m.reason = RejectReason::WidthOutOfRange;
    m.detail = "width " + std::to_string(m.width_m) + " m out of range";
  } else if (m.dispersion > config.max_dispersion) {
    m.status = MeasureStatus::Rejected;
    m.reason = RejectReason::HighDispersion;
    m.detail = "per-column dispersion " + std::to_string(m.dispersion);
  }
  return m;
}

std::vector<SweepPoint> sweep_camera_height(const ImageSource& source, const PipelineConfig& config,
                                            const std::vector<double>& heights) {
  std::vector<SweepPoint> out;
  if (heights.empty()) return out;
  for (double h : heights) {
    if (!(h > 0.0)) throw Error("sweep: camera heights must be positive");
  }
  const auto& entries = source.entries();
  const ReferenceWidths refs = reference_widths(entries);
  const std::vector<WidthMeasurement> base = measure_batch(source, config);
  for (double h : heights) {
    SweepPoint p;
    p.h_cam_m = h;
    p.measurements.reserve(base.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
      p.measurements.push_back(
          rescale_measurement(base[i], resolve_camera_height(entries[i], config), h, config.measure));
    }
    p.report = evaluate(p.measurements, refs);
    out.push_back(std::move(p));
  }
  return out;
}

std::string_view to_string(GeometrySource source) noexcept {
  return source == GeometrySource::PointMap ? "point_map" : "depth_map";
}

ProtocolSpec ProtocolSpec::for_category(int category, GeometrySource source) {
  ProtocolSpec p;
  p.category = category;
  p.geometry_source = source;
  p.calibration = category == 1 ? CalibrationMode::Native : CalibrationMode::CameraHeight;
  p.validate();
  return p;
}

void ProtocolSpec::validate() const {
  if (category < 1 || category > 3) throw Error("protocol: category must be 1, 2 or 3");
  if (category == 1 && calibration != CalibrationMode::Native) throw Error("protocol: category 1 requires native scale");
  if (category != 1 && calibration != CalibrationMode::CameraHeight) {
    throw Error("protocol: categories 2 and 3 require camera-height calibration");
  }
  if (category == 2 && geometry_source != GeometrySource::DepthMap) throw Error("protocol: category 2 requires depth");
  if (category == 3 && geometry_source != GeometrySource::PointMap) {
    throw Error("protocol: category 3 requires point maps");
  }
}

namespace {

// Passes images through while recording the first geometry kind mismatch.
class GeometryCheckedSource : public ImageSource {
 public:
  GeometryCheckedSource(const ImageSource& inner, GeometrySource expected) : inner_(inner), expected_(expected) {}

  const std::vector<ImageManifestEntry>& entries() const override { return inner_.entries(); }

  ImageData load(std::size_t index) const override {
    ImageData data = inner_.load(index);
    const bool is_points = std::holds_alternative<PointMap>(data.geometry);
    if (is_points != (expected_ == GeometrySource::PointMap)) {
      std::lock_guard lock(mutex_);
      if (mismatch_.empty()) {
        mismatch_ = "wrong geometry kind: image '" + entries()[index].image_id + "' has " +
                    (is_points ? "a point map" : "a depth map") + ", protocol expects " +
                    std::string(to_string(expected_));
      }
      throw Error(mismatch_);
    }
    return data;
  }

  const std::string& mismatch() const { return mismatch_; }

 private:
  const ImageSource& inner_;
  GeometrySource expected_;
  mutable std::mutex mutex_;
  mutable std::string mismatch_;
};

}  // namespace

std::vector<WidthMeasurement> run_protocol_measurements(const ImageSource& source, const PipelineConfig& config,
                                                        const ProtocolSpec& protocol) {
  protocol.validate();
  GeometryCheckedSource checked(source, protocol.geometry_source);
  RunOptions options;
  options.calibration = protocol.calibration;
  auto results = measure_batch(checked, config, options);
  if (!checked.mismatch().empty()) throw Error(checked.mismatch());
  return results;
}

MetricsReport run_protocol(const ImageSource& source, const PipelineConfig& config, const ProtocolSpec& protocol) {
  return evaluate(run_protocol_measurements(source, config, protocol), reference_widths(source.entries()));
}

}  // namespace sidewidth
