#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sidewidth/netsample.hpp"

namespace sidewidth {

struct ImageRequest {
  std::string request_id;
  LonLat position;
  double heading_deg = 0.0;
  double pitch_deg = 0.0;
  int size_px = 640;
  double fov_deg = 90.0;
};

/// One request per sample point and heading, ids like "<segment>_c30.0_h90.0".
std::vector<ImageRequest> plan_requests(const std::vector<SamplePoint>& points);

class ImageryProvider {
 public:
  virtual ~ImageryProvider() = default;
  /// Places the image for `request` in `out_dir` and returns its path. Must be safe to call concurrently.
  virtual std::filesystem::path fetch(const ImageRequest& request, const std::filesystem::path& out_dir) const = 0;
};

/// Serves pre-downloaded images named `<request_id>.jpg` or `<request_id>.png` from a directory.
class LocalDirectoryProvider : public ImageryProvider {
 public:
  explicit LocalDirectoryProvider(std::filesystem::path root);
  std::filesystem::path fetch(const ImageRequest& request, const std::filesystem::path& out_dir) const override;

 private:
  std::filesystem::path root_;
};

/// Renders request URLs from a template with the placeholders {id} {lat} {lon} {heading} {pitch} {fov}
/// {size}. Downloading is left to the operator; fetch() throws with the rendered URL.
class UrlTemplateProvider : public ImageryProvider {
 public:
  explicit UrlTemplateProvider(std::string url_template);
  std::string render_url(const ImageRequest& request) const;
  std::filesystem::path fetch(const ImageRequest& request, const std::filesystem::path& out_dir) const override;

 private:
  std::string template_;
};

struct FetchResult {
  std::string request_id;
  std::optional<std::filesystem::path> path;
  std::string error;
};

/// Fetches with at most `workers` concurrent requests; results follow request order.
std::vector<FetchResult> fetch_all(const ImageryProvider& provider, const std::vector<ImageRequest>& requests,
                                   const std::filesystem::path& out_dir, unsigned workers);

}  // namespace sidewidth
