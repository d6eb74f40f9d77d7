#include "sidewidth/provider.hpp"

#include <cstdio>

#include "sidewidth/error.hpp"
#include "sidewidth/parallel.hpp"

namespace sidewidth {
namespace {

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

}  // namespace

std::vector<ImageRequest> plan_requests(const std::vector<SamplePoint>& points) {
  std::vector<ImageRequest> out;
  for (const auto& p : points) {
    for (double h : p.headings_deg) {
      ImageRequest r;
      r.request_id = p.segment_id + "_c" + fmt("%.1f", p.chainage_m) + "_h" + fmt("%.1f", h);
      r.position = p.position;
      r.heading_deg = h;
      out.push_back(std::move(r));
    }
  }
  return out;
}

LocalDirectoryProvider::LocalDirectoryProvider(std::filesystem::path root) : root_(std::move(root)) {
  if (!std::filesystem::is_directory(root_)) throw Error("imagery directory not found: " + root_.string());
}

std::filesystem::path LocalDirectoryProvider::fetch(const ImageRequest& request,
                                                    const std::filesystem::path& out_dir) const {
  for (const char* ext : {".jpg", ".png"}) {
    const auto src = root_ / (request.request_id + ext);
    if (!std::filesystem::is_regular_file(src)) continue;
    const auto dst = out_dir / src.filename();
    std::filesystem::create_directories(out_dir);
    if (std::filesystem::equivalent(root_, out_dir)) return src;
    std::filesystem::copy_file(src, dst, std::filesystem::copy_options::overwrite_existing);
    return dst;
  }
  throw Error("no image for request " + request.request_id);
}

UrlTemplateProvider::UrlTemplateProvider(std::string url_template) : template_(std::move(url_template)) {}

std::string UrlTemplateProvider::render_url(const ImageRequest& r) const {
  const std::pair<std::string, std::string> values[] = {
      {"{id}", r.request_id},           {"{lat}", fmt("%.7f", r.position.lat)},
      {"{lon}", fmt("%.7f", r.position.lon)}, {"{heading}", fmt("%.2f", r.heading_deg)},
      {"{pitch}", fmt("%.2f", r.pitch_deg)},  {"{fov}", fmt("%.0f", r.fov_deg)},
      {"{size}", std::to_string(r.size_px) + "x" + std::to_string(r.size_px)},
  };
  std::string url = template_;
  for (const auto& [key, value] : values) {
    for (auto pos = url.find(key); pos != std::string::npos; pos = url.find(key, pos + value.size())) {
      url.replace(pos, key.size(), value);
    }
  }
  return url;
}

std::filesystem::path UrlTemplateProvider::fetch(const ImageRequest& request, const std::filesystem::path&) const {
  throw Error("download not bundled; fetch " + render_url(request) + " with your own client");
}

std::vector<FetchResult> fetch_all(const ImageryProvider& provider, const std::vector<ImageRequest>& requests,
                                   const std::filesystem::path& out_dir, unsigned workers) {
  std::vector<FetchResult> out(requests.size());
  parallel_for(requests.size(), workers, [&](std::size_t i) {
    out[i].request_id = requests[i].request_id;
    try {
      out[i].path = provider.fetch(requests[i], out_dir);
    } catch (const std::exception& e) {
      out[i].error = e.what();
    }
  });
  return out;
}

}  // namespace sidewidth
