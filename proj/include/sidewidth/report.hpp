#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sidewidth/eval.hpp"
#include "sidewidth/manifest.hpp"
#include "sidewidth/measure.hpp"

namespace sidewidth {

/// One JSON object per line; `entry` adds segment_id and reference_width_m when present.
std::string measurement_json_line(const WidthMeasurement& m, const ImageManifestEntry* entry = nullptr);

/// A results line read back from JSON-lines output.
struct ResultRecord {
  std::string image_id;
  MeasureStatus status = MeasureStatus::Failed;
  double width_m = 0.0;
  std::optional<std::string> segment_id;
  std::optional<double> reference_width_m;
};

std::vector<ResultRecord> read_results_jsonl(const std::filesystem::path& path);
std::vector<WidthMeasurement> to_measurements(const std::vector<ResultRecord>& records);

struct MetricsRow {
  std::string label;
  MetricsReport report;
};

/// `<label_column>,n,mae_m,rmse_m,bias_m,frac_025,frac_050,n_rejected`
void write_metrics_csv(std::ostream& out, const std::string& label_column, const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path);

/// Aligned plain-text table of the same columns.
std::string format_metrics_table(const std::vector<MetricsRow>& rows);

/// Bar chart of MAE per row; `reference_mae` draws a dashed red horizontal line.
std::string render_mae_svg(const std::vector<MetricsRow>& rows, std::optional<double> reference_mae,
                           const std::string& title = "MAE by method");

}  // namespace sidewidth
