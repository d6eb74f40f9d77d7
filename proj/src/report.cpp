#include "sidewidth/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "sidewidth/error.hpp"

namespace sidewidth {
namespace {

std::string num(double v, const char* pattern = "%.6f") {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

double parse_num(const std::string& s, const std::string& where) {
  if (s == "nan") return std::nan("");
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw FormatError(where, "not a number: '" + s + "'");
  }
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string measurement_json_line(const WidthMeasurement& m, const ImageManifestEntry* entry) {
  nlohmann::ordered_json j;
  j["image_id"] = m.image_id;
  j["status"] = std::string(to_string(m.status));
  j["width_m"] = m.accepted() ? nlohmann::ordered_json(m.width_m) : nlohmann::ordered_json(nullptr);
  j["n_valid_columns"] = m.n_valid_columns;
  j["scale"] = m.scale;
  j["h_pred"] = m.calibration.h_pred;
  j["plane"] = {{"normal", {m.plane.normal.x(), m.plane.normal.y(), m.plane.normal.z()}},
                {"offset", m.plane.offset},
                {"inlier_ratio", m.plane.inlier_ratio}};
  j["reason"] = m.reason ? nlohmann::ordered_json(std::string(to_string(*m.reason))) : nlohmann::ordered_json(nullptr);
  if (!m.detail.empty()) j["detail"] = m.detail;
  if (entry != nullptr) {
    if (entry->segment_id) j["segment_id"] = *entry->segment_id;
    if (entry->reference_width_m) j["reference_width_m"] = *entry->reference_width_m;
  }
  return j.dump();
}

std::vector<ResultRecord> read_results_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path.string(), "cannot open");
  std::vector<ResultRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      throw FormatError(where, "invalid JSON");
    }
    if (!j.is_object() || !j.contains("image_id") || !j["image_id"].is_string() || !j.contains("status")) {
      throw FormatError(where, "missing image_id or status");
    }
    ResultRecord r;
    r.image_id = j["image_id"].get<std::string>();
    const std::string status = j["status"].get<std::string>();
    if (status == "accepted") {
      r.status = MeasureStatus::Accepted;
    } else if (status == "rejected") {
      r.status = MeasureStatus::Rejected;
    } else if (status == "failed") {
      r.status = MeasureStatus::Failed;
    } else {
      throw FormatError(where, "unknown status '" + status + "'");
    }
    if (r.status == MeasureStatus::Accepted) {
      if (!j.contains("width_m") || !j["width_m"].is_number()) throw FormatError(where, "accepted without width_m");
      r.width_m = j["width_m"].get<double>();
    }
    if (j.contains("segment_id") && j["segment_id"].is_string()) r.segment_id = j["segment_id"].get<std::string>();
    if (j.contains("reference_width_m") && j["reference_width_m"].is_number()) {
      r.reference_width_m = j["reference_width_m"].get<double>();
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<WidthMeasurement> to_measurements(const std::vector<ResultRecord>& records) {
  std::vector<WidthMeasurement> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    WidthMeasurement m;
    m.image_id = r.image_id;
    m.status = r.status;
    m.width_m = r.width_m;
    out.push_back(std::move(m));
  }
  return out;
}

void write_metrics_csv(std::ostream& out, const std::string& label_column, const std::vector<MetricsRow>& rows) {
  out << label_column << ",n,mae_m,rmse_m,bias_m,frac_025,frac_050,n_rejected\n";
  for (const auto& row : rows) {
    const auto& r = row.report;
    out << row.label << ',' << r.n_evaluated << ',' << num(r.mae_m) << ',' << num(r.rmse_m) << ',' << num(r.bias_m)
        << ',' << num(r.frac_025) << ',' << num(r.frac_050) << ',' << r.n_rejected << '\n';
  }
}

std::vector<MetricsRow> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(path.string(), "cannot open");
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string(), "empty file");
  if (split_csv(line).size() != 8) throw FormatError(path.string(), "unexpected header");
  std::vector<MetricsRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    const auto cells = split_csv(line);
    if (cells.size() != 8) throw FormatError(where, "expected 8 columns");
    MetricsRow row;
    row.label = cells[0];
    row.report.n_evaluated = static_cast<std::size_t>(parse_num(cells[1], where));
    row.report.mae_m = parse_num(cells[2], where);
    row.report.rmse_m = parse_num(cells[3], where);
    row.report.bias_m = parse_num(cells[4], where);
    row.report.frac_025 = parse_num(cells[5], where);
    row.report.frac_050 = parse_num(cells[6], where);
    row.report.n_rejected = static_cast<std::size_t>(parse_num(cells[7], where));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_metrics_table(const std::vector<MetricsRow>& rows) {
  std::size_t label_w = 5;
  for (const auto& r : rows) label_w = std::max(label_w, r.label.size());
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-*s %5s %8s %8s %8s %7s %7s %6s\n", static_cast<int>(label_w), "label", "n", "MAE",
                "RMSE", "bias", "<0.25", "<0.50", "rej");
  out << buf;
  for (const auto& row : rows) {
    const auto& r = row.report;
    std::snprintf(buf, sizeof buf, "%-*s %5zu %8.3f %8.3f %+8.3f %6.1f%% %6.1f%% %6zu\n", static_cast<int>(label_w),
                  row.label.c_str(), r.n_evaluated, r.mae_m, r.rmse_m, r.bias_m, 100.0 * r.frac_025,
                  100.0 * r.frac_050, r.n_rejected);
    out << buf;
  }
  return out.str();
}

std::string render_mae_svg(const std::vector<MetricsRow>& rows, std::optional<double> reference_mae,
                           const std::string& title) {
  const double width = 120.0 + 90.0 * static_cast<double>(std::max<std::size_t>(rows.size(), 1));
  const double height = 360.0;
  const double left = 70.0, right = 20.0, top = 40.0, bottom = 90.0;
  const double plot_h = height - top - bottom;
  double top_value = reference_mae.value_or(0.0);
  for (const auto& r : rows) {
    if (std::isfinite(r.report.mae_m)) top_value = std::max(top_value, r.report.mae_m);
  }
  top_value = top_value > 0.0 ? top_value * 1.15 : 1.0;
  auto y_of = [&](double v) { return top + plot_h * (1.0 - v / top_value); };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width, "%.0f") << "\" height=\""
      << num(height, "%.0f") << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << num(width / 2, "%.1f") << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
      << xml_escape(title) << "</text>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + plot_h
      << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << num(width - right, "%.1f")
      << "\" y2=\"" << top + plot_h << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = top_value * t / 4.0;
    svg << "<text x=\"" << left - 6 << "\" y=\"" << num(y_of(v) + 4, "%.1f") << "\" text-anchor=\"end\">"
        << num(v, "%.2f") << "</text>\n";
  }
  svg << "<text x=\"16\" y=\"" << num(top + plot_h / 2, "%.1f") << "\" transform=\"rotate(-90 16 "
      << num(top + plot_h / 2, "%.1f") << ")\" text-anchor=\"middle\">MAE (m)</text>\n";

  const double slot = (width - left - right) / static_cast<double>(std::max<std::size_t>(rows.size(), 1));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double mae = rows[i].report.mae_m;
    const double x = left + slot * static_cast<double>(i) + slot * 0.2;
    const double cx = x + slot * 0.3;
    if (std::isfinite(mae)) {
      svg << "<rect x=\"" << num(x, "%.1f") << "\" y=\"" << num(y_of(mae), "%.1f") << "\" width=\""
          << num(slot * 0.6, "%.1f") << "\" height=\"" << num(top + plot_h - y_of(mae), "%.1f")
          << "\" fill=\"#4c72b0\"/>\n";
      svg << "<text x=\"" << num(cx, "%.1f") << "\" y=\"" << num(y_of(mae) - 4, "%.1f")
          << "\" text-anchor=\"middle\">" << num(mae, "%.3f") << "</text>\n";
    }
    svg << "<text x=\"" << num(cx, "%.1f") << "\" y=\"" << num(top + plot_h + 16, "%.1f")
        << "\" text-anchor=\"end\" transform=\"rotate(-30 " << num(cx, "%.1f") << ' '
        << num(top + plot_h + 16, "%.1f") << ")\">" << xml_escape(rows[i].label) << "</text>\n";
  }
  if (reference_mae && std::isfinite(*reference_mae)) {
    svg << "<line x1=\"" << left << "\" y1=\"" << num(y_of(*reference_mae), "%.1f") << "\" x2=\""
        << num(width - right, "%.1f") << "\" y2=\"" << num(y_of(*reference_mae), "%.1f")
        << "\" stroke=\"red\" stroke-width=\"1.5\" stroke-dasharray=\"6,4\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace sidewidth
