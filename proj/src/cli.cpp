#include "sidewidth/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sidewidth/config.hpp"
#include "sidewidth/error.hpp"
#include "sidewidth/eval.hpp"
#include "sidewidth/netsample.hpp"
#include "sidewidth/pipeline.hpp"
#include "sidewidth/provider.hpp"
#include "sidewidth/report.hpp"
#include "sidewidth/synth.hpp"

namespace sidewidth {
namespace {

constexpr int kOk = 0;
constexpr int kNothing = 1;
constexpr int kUsage = 2;

class UsageError : public Error {
 public:
  using Error::Error;
};

// Writes to a file, or to the command's stdout for "-".
class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) {
    if (path.empty() || path == "-") {
      stream_ = &fallback;
      return;
    }
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    file_.open(p, std::ios::binary | std::ios::trunc);
    if (!file_) throw Error("cannot write " + path);
    stream_ = &file_;
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_ = nullptr;
};

void write_file(const std::string& path, const std::string& content, std::ostream& fallback) {
  Output o(path, fallback);
  *o << content;
}

struct Globals {
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::string config_path;

  PipelineConfig config() const {
    PipelineConfig c = config_path.empty() ? PipelineConfig{} : load_config(config_path);
    if (seed) c.seed = *seed;
    if (workers) c.workers = *workers;
    c.validate();
    return c;
  }
};

std::vector<ImageManifestEntry> manifest_or_usage(const std::string& path) {
  if (path.empty()) throw UsageError("--manifest is required");
  return load_manifest(path);
}

std::vector<double> height_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) throw UsageError("invalid height range");
  const auto n = static_cast<long long>(std::llround((hi - lo) / step));
  std::vector<double> out;
  for (long long i = 0; i <= n; ++i) out.push_back(lo + static_cast<double>(i) * step);
  return out;
}

std::string height_label(double h) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", h);
  return buf;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sidewalk width from point maps and semantic masks", "sidewidth"};
  app.fallthrough();
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Global random seed");
  app.add_option("--workers", g.workers, "Worker threads (0 = logical CPUs)");
  app.add_option("--config", g.config_path, "Configuration file")->check(CLI::ExistingFile);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic benchmark");
  BenchmarkSpec bench;
  std::string synth_out;
  long long synth_n = 0;
  synth->add_option("--n", synth_n, "Number of scenes")->required();
  synth->add_option("--width-min", bench.width_min_m, "Minimum sidewalk width (m)");
  synth->add_option("--width-max", bench.width_max_m, "Maximum sidewalk width (m)");
  synth->add_option("--noise", bench.noise_sigma_frac, "Radial depth noise (fraction of depth)");
  synth->add_option("--scale-min", bench.global_scale_min, "Minimum global scale of emitted coordinates");
  synth->add_option("--scale-max", bench.global_scale_max, "Maximum global scale of emitted coordinates");
  synth->add_option("--camera-height", bench.camera_height_m, "True camera height (m)");
  synth->add_option("--size", bench.image_width, "Image width and height (px)");
  synth->add_flag("--depth", bench.emit_depth, "Also write depth tensors and manifest_depth.json");
  synth->add_option("--out", synth_out, "Output directory")->required();

  // measure
  auto* measure = app.add_subcommand("measure", "Measure sidewalk width per image");
  std::string m_manifest, m_out = "-";
  std::optional<double> m_hcam, m_band;
  bool m_native = false;
  measure->add_option("--manifest", m_manifest, "Manifest JSON")->required();
  measure->add_option("--out", m_out, "JSON-lines output (- for stdout)");
  measure->add_option("--h-cam", m_hcam, "Camera height for entries without their own (m)");
  measure->add_option("--band", m_band, "Central band fraction");
  measure->add_flag("--native", m_native, "Keep native geometry scale");

  // eval
  auto* eval = app.add_subcommand("eval", "Metrics of measured widths against references");
  std::string e_results, e_manifest, e_out = "-", e_label = "results";
  eval->add_option("--results", e_results, "JSON-lines results")->required();
  eval->add_option("--manifest", e_manifest, "Manifest with reference widths (default: from results)");
  eval->add_option("--out", e_out, "CSV output");
  eval->add_option("--label", e_label, "Row label");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Camera-height sensitivity sweep");
  std::string s_manifest, s_out = "-", s_svg;
  double s_min = 2.0, s_max = 3.0, s_step = 0.25;
  sweep->add_option("--manifest", s_manifest, "Manifest JSON")->required();
  sweep->add_option("--h-min", s_min, "Lowest camera height (m)");
  sweep->add_option("--h-max", s_max, "Highest camera height (m)");
  sweep->add_option("--h-step", s_step, "Height step (m)");
  sweep->add_option("--out", s_out, "CSV output");
  sweep->add_option("--svg", s_svg, "MAE bar chart");

  // ablate
  auto* ablate = app.add_subcommand("ablate", "Run the ablation variants");
  std::string a_manifest, a_out = "-", a_svg;
  std::vector<std::string> a_variants;
  ablate->add_option("--manifest", a_manifest, "Manifest JSON")->required();
  ablate->add_option("--variants", a_variants, "Subset of full_pipeline, no_scale_calibration, pinhole_only, "
                                               "full_image_width");
  ablate->add_option("--out", a_out, "CSV output");
  ablate->add_option("--svg", a_svg, "MAE bar chart");

  // protocol
  auto* protocol = app.add_subcommand("protocol", "Evaluate one geometry category");
  std::string p_manifest, p_out = "-", p_jsonl, p_geometry;
  int p_category = 3;
  protocol->add_option("--manifest", p_manifest, "Manifest JSON")->required();
  protocol->add_option("--category", p_category, "1 native, 2 depth + camera height, 3 point map + camera height")
      ->check(CLI::Range(1, 3));
  protocol->add_option("--geometry", p_geometry, "point_map or depth_map")
      ->check(CLI::IsMember({"point_map", "depth_map"}));
  protocol->add_option("--out", p_out, "CSV output");
  protocol->add_option("--jsonl", p_jsonl, "Per-image results");

  // sample
  auto* sample = app.add_subcommand("sample", "Sample camera positions along a street network");
  std::string n_network, n_out = "-", n_urls, n_template;
  std::optional<double> n_interval, n_cell;
  bool n_no_dedup = false;
  sample->add_option("--network", n_network, "Network GeoJSON")->required();
  sample->add_option("--interval", n_interval, "Sample spacing (m)");
  sample->add_option("--cell", n_cell, "Dedup grid cell (m)");
  sample->add_flag("--no-dedup", n_no_dedup, "Keep every sample");
  sample->add_option("--out", n_out, "Plan CSV");
  sample->add_option("--url-template", n_template, "Imagery URL template ({lat} {lon} {heading} {pitch} {fov} {size})");
  sample->add_option("--urls", n_urls, "Write rendered request URLs here");

  // aggregate
  auto* aggregate = app.add_subcommand("aggregate", "Median width per network segment and coverage");
  std::string g_results, g_network, g_manifest, g_out = "-", g_summary;
  aggregate->add_option("--results", g_results, "JSON-lines results")->required();
  aggregate->add_option("--network", g_network, "Network GeoJSON")->required();
  aggregate->add_option("--manifest", g_manifest, "Manifest with segment ids (default: from results)");
  aggregate->add_option("--out", g_out, "Segment GeoJSON");
  aggregate->add_option("--summary", g_summary, "Coverage summary JSON (default: printed)");

  // plot
  auto* plot = app.add_subcommand("plot", "MAE bar chart from a metrics CSV");
  std::string l_csv, l_out = "-", l_reference = "full_pipeline", l_title = "MAE by method";
  plot->add_option("--csv", l_csv, "Metrics CSV")->required();
  plot->add_option("--out", l_out, "SVG output");
  plot->add_option("--reference", l_reference, "Row drawn as the dashed reference line");
  plot->add_option("--title", l_title, "Chart title");

  // validate
  auto* validate = app.add_subcommand("validate", "Check interchange files");
  std::string v_manifest;
  std::vector<std::string> v_masks, v_tensors;
  validate->add_option("--manifest", v_manifest, "Manifest JSON");
  validate->add_option("--mask", v_masks, "Mask PNG");
  validate->add_option("--tensor", v_tensors, "Tensor .npy");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    const PipelineConfig cfg = g.config();

    if (*synth) {
      if (synth_n < 1) throw UsageError("--n must be at least 1");
      bench.n_scenes = static_cast<std::size_t>(synth_n);
      bench.image_height = bench.image_width;
      bench.seed = cfg.seed;
      bench.fov_deg = cfg.calibration.fov_deg;
      try {
        bench.validate();
      } catch (const Error& e) {
        throw UsageError(e.what());
      }
      const auto entries = generate_benchmark(bench, synth_out, cfg.workers);
      err << "wrote " << entries.size() << " scenes to " << synth_out << "\n";
      return kOk;
    }

    if (*measure) {
      PipelineConfig c = cfg;
      if (m_hcam) c.calibration.h_cam_m = *m_hcam;
      const auto entries = manifest_or_usage(m_manifest);
      c.validate();
      RunOptions opts;
      opts.band_fraction = m_band;
      if (m_native) opts.calibration = CalibrationMode::Native;
      const ManifestSource source(entries, c.mask.class_map());
      const auto results = measure_batch(source, c, opts);
      Output o(m_out, out);
      std::size_t accepted = 0;
      for (std::size_t i = 0; i < results.size(); ++i) {
        *o << measurement_json_line(results[i], &entries[i]) << '\n';
        if (results[i].accepted()) ++accepted;
      }
      err << accepted << " of " << results.size() << " images accepted\n";
      return accepted > 0 ? kOk : kNothing;
    }

    if (*eval) {
      const auto records = read_results_jsonl(e_results);
      ReferenceWidths refs;
      if (!e_manifest.empty()) {
        refs = reference_widths(load_manifest(e_manifest));
      } else {
        for (const auto& r : records) {
          if (r.reference_width_m) refs.emplace(r.image_id, *r.reference_width_m);
        }
      }
      const MetricsReport rep = evaluate(to_measurements(records), refs);
      Output o(e_out, out);
      write_metrics_csv(*o, "variant", {{e_label, rep}});
      return rep.n_evaluated > 0 ? kOk : kNothing;
    }

    if (*sweep) {
      const auto entries = manifest_or_usage(s_manifest);
      const ManifestSource source(entries, cfg.mask.class_map());
      const auto points = sweep_camera_height(source, cfg, height_grid(s_min, s_max, s_step));
      std::vector<MetricsRow> rows;
      for (const auto& p : points) rows.push_back({height_label(p.h_cam_m), p.report});
      Output o(s_out, out);
      write_metrics_csv(*o, "h_cam_m", rows);
      if (!s_svg.empty()) write_file(s_svg, render_mae_svg(rows, std::nullopt, "MAE by camera height"), out);
      return kOk;
    }

    if (*ablate) {
      const auto entries = manifest_or_usage(a_manifest);
      const ManifestSource source(entries, cfg.mask.class_map());
      std::vector<AblationVariant> variants;
      if (a_variants.empty()) {
        variants.assign(std::begin(kAllAblationVariants), std::end(kAllAblationVariants));
      } else {
        for (const auto& v : a_variants) {
          try {
            variants.push_back(parse_ablation_variant(v));
          } catch (const Error& e) {
            throw UsageError(e.what());
          }
        }
      }
      std::vector<MetricsRow> rows;
      std::optional<double> reference;
      for (auto v : variants) {
        rows.push_back({std::string(to_string(v)), run_ablation(source, cfg, v)});
        if (v == AblationVariant::Full) reference = rows.back().report.mae_m;
      }
      Output o(a_out, out);
      write_metrics_csv(*o, "variant", rows);
      if (!a_svg.empty()) write_file(a_svg, render_mae_svg(rows, reference), out);
      return kOk;
    }

    if (*protocol) {
      const auto entries = manifest_or_usage(p_manifest);
      const GeometrySource gs = !p_geometry.empty() ? (p_geometry == "depth_map" ? GeometrySource::DepthMap
                                                                                 : GeometrySource::PointMap)
                                : (p_category == 2 ? GeometrySource::DepthMap : GeometrySource::PointMap);
      ProtocolSpec spec;
      try {
        spec = ProtocolSpec::for_category(p_category, gs);
      } catch (const Error& e) {
        throw UsageError(e.what());
      }
      const ManifestSource source(entries, cfg.mask.class_map());
      const auto results = run_protocol_measurements(source, cfg, spec);
      if (!p_jsonl.empty()) {
        Output j(p_jsonl, out);
        for (std::size_t i = 0; i < results.size(); ++i) *j << measurement_json_line(results[i], &entries[i]) << '\n';
      }
      const MetricsReport rep = evaluate(results, reference_widths(entries));
      Output o(p_out, out);
      write_metrics_csv(*o, "protocol", {{"category_" + std::to_string(p_category), rep}});
      return rep.n_evaluated > 0 ? kOk : kNothing;
    }

    if (*sample) {
      const auto network = load_network(n_network);
      auto points = sample_network(network, n_interval.value_or(cfg.network.sample_interval_m),
                                   cfg.network.bearing_half_window_m);
      if (!n_no_dedup) points = dedup_grid(std::move(points), n_cell.value_or(cfg.network.dedup_cell_m));
      Output o(n_out, out);
      write_sample_plan_csv(*o, points);
      if (!n_urls.empty()) {
        if (n_template.empty()) throw UsageError("--urls requires --url-template");
        const UrlTemplateProvider provider(n_template);
        std::ostringstream urls;
        for (const auto& r : plan_requests(points)) urls << r.request_id << ',' << provider.render_url(r) << '\n';
        write_file(n_urls, urls.str(), out);
      }
      err << points.size() << " sample points, " << 2 * points.size() << " requests\n";
      return points.empty() ? kNothing : kOk;
    }

    if (*aggregate) {
      const auto records = read_results_jsonl(g_results);
      const auto network = load_network(g_network);
      std::vector<TaggedWidth> tagged;
      if (!g_manifest.empty()) {
        tagged = tag_measurements(to_measurements(records), load_manifest(g_manifest));
      } else {
        for (const auto& r : records) {
          if (r.segment_id) tagged.push_back({*r.segment_id, r.width_m, r.status == MeasureStatus::Accepted});
        }
      }
      const auto segs = aggregate_segments(tagged);
      const CoverageReport cov = coverage_report(segs, network);
      write_file(g_out, records_geojson(segs, network), out);
      std::ostringstream summary;
      summary << "{\"covered\": " << cov.covered << ", \"total\": " << cov.total
              << ", \"coverage_pct\": " << cov.coverage_pct_text() << ", \"median_of_medians_m\": ";
      if (cov.median_of_medians_m) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", *cov.median_of_medians_m);
        summary << buf;
      } else {
        summary << "null";
      }
      summary << "}\n";
      if (g_summary.empty()) {
        err << summary.str();
      } else {
        write_file(g_summary, summary.str(), out);
      }
      return segs.empty() ? kNothing : kOk;
    }

    if (*plot) {
      const auto rows = read_metrics_csv(l_csv);
      std::optional<double> reference;
      for (const auto& r : rows) {
        if (r.label == l_reference) reference = r.report.mae_m;
      }
      write_file(l_out, render_mae_svg(rows, reference, l_title), out);
      return kOk;
    }

    if (*validate) {
      if (v_manifest.empty() && v_masks.empty() && v_tensors.empty()) {
        throw UsageError("nothing to validate: give --manifest, --mask or --tensor");
      }
      std::size_t bad = 0;
      auto check = [&](const std::string& what, auto&& fn) {
        try {
          fn();
          out << "ok " << what << '\n';
        } catch (const std::exception& e) {
          out << "error " << what << ": " << e.what() << '\n';
          ++bad;
        }
      };
      const ClassMap classes = cfg.mask.class_map();
      for (const auto& m : v_masks) check(m, [&] { load_mask(m, classes); });
      for (const auto& t : v_tensors) check(t, [&] { load_geometry(t); });
      if (!v_manifest.empty()) {
        const auto entries = load_manifest(v_manifest);
        for (const auto& e : entries) check(e.image_id, [&] { load_image(e, classes); });
      }
      return bad == 0 ? kOk : kNothing;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNothing;
  }
  return kUsage;
}

}  // namespace sidewidth
