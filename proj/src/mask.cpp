#include "sidewidth/mask.hpp"

#include <png.h>

#include <algorithm>
#include <cstring>
#include <deque>
#include <string>

namespace sidewidth {

ClassMap ClassMap::cityscapes() {
  ClassMap m;
  m.assign(0, SemanticClass::Road);
  m.assign(1, SemanticClass::Sidewalk);
  return m;
}

SemanticMask::SemanticMask(int width, int height, SemanticClass fill)
    : SemanticMask(width, height,
                   std::vector<SemanticClass>(width > 0 && height > 0 ? static_cast<std::size_t>(width) * height : 0,
                                              fill)) {}

SemanticMask::SemanticMask(int width, int height, std::vector<SemanticClass> classes)
    : width_(width), height_(height), classes_(std::move(classes)) {
  if (width <= 0 || height <= 0) throw Error("mask dimensions must be positive");
  if (classes_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw Error("mask data size does not match dimensions");
}

std::size_t SemanticMask::count(SemanticClass c) const noexcept {
  return static_cast<std::size_t>(std::count(classes_.begin(), classes_.end(), c));
}

SemanticMask load_mask(const std::filesystem::path& path, const ClassMap& class_map) {
  const std::string p = path.string();
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, p.c_str()))
    throw FormatError(p, std::string("unreadable raster: ") + image.message);
  const auto native = image.format;
  if ((native & (PNG_FORMAT_FLAG_COLOR | PNG_FORMAT_FLAG_ALPHA | PNG_FORMAT_FLAG_COLORMAP | PNG_FORMAT_FLAG_LINEAR)) !=
      0) {
    png_image_free(&image);
    throw FormatError(p, "expected an 8-bit single-channel raster");
  }
  if (image.width == 0 || image.height == 0) {
    png_image_free(&image);
    throw FormatError(p, "dimension zero");
  }
  image.format = PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> raw(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, raw.data(), 0, nullptr))
    throw FormatError(p, std::string("unreadable raster: ") + image.message);

  std::vector<SemanticClass> classes(raw.size());
  std::transform(raw.begin(), raw.end(), classes.begin(), [&](std::uint8_t r) { return class_map(r); });
  return SemanticMask(static_cast<int>(image.width), static_cast<int>(image.height), std::move(classes));
}

void save_mask(const std::filesystem::path& path, const SemanticMask& mask) {
  std::vector<std::uint8_t> raw(mask.pixel_count());
  std::transform(mask.data().begin(), mask.data().end(), raw.begin(),
                 [](SemanticClass c) { return static_cast<std::uint8_t>(c); });
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(mask.width());
  image.height = static_cast<png_uint_32>(mask.height());
  image.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, raw.data(), 0, nullptr))
    throw FormatError(path.string(), std::string("cannot write PNG: ") + image.message);
}

void require_same_dimensions(const SemanticMask& mask, int width, int height, const std::string& context) {
  if (mask.width() != width || mask.height() != height) {
    throw FormatError(context, "dimension mismatch: mask " + std::to_string(mask.width()) + "x" +
                                   std::to_string(mask.height()) + " vs geometry " + std::to_string(width) + "x" +
                                   std::to_string(height));
  }
}

namespace {

// Visits the 4-connected component of `seed` among pixels of class `cls`, marking `seen`.
template <typename Visit>
void flood(const SemanticMask& mask, int seed_u, int seed_v, SemanticClass cls, std::vector<std::uint8_t>& seen,
           std::vector<int>& pixels, Visit&& on_border_neighbour) {
  const int w = mask.width();
  const int h = mask.height();
  pixels.clear();
  std::deque<int> queue{seed_v * w + seed_u};
  seen[static_cast<std::size_t>(seed_v) * w + seed_u] = 1;
  constexpr int du[4] = {1, -1, 0, 0};
  constexpr int dv[4] = {0, 0, 1, -1};
  while (!queue.empty()) {
    const int idx = queue.front();
    queue.pop_front();
    pixels.push_back(idx);
    const int u = idx % w;
    const int v = idx / w;
    for (int k = 0; k < 4; ++k) {
      const int nu = u + du[k];
      const int nv = v + dv[k];
      if (nu < 0 || nv < 0 || nu >= w || nv >= h) {
        on_border_neighbour(std::nullopt);
        continue;
      }
      const SemanticClass nc = mask.at(nu, nv);
      if (nc != cls) {
        on_border_neighbour(std::optional<SemanticClass>(nc));
        continue;
      }
      auto& s = seen[static_cast<std::size_t>(nv) * w + nu];
      if (!s) {
        s = 1;
        queue.push_back(nv * w + nu);
      }
    }
  }
}

void relabel(SemanticMask& mask, const std::vector<int>& pixels, SemanticClass c) {
  const int w = mask.width();
  for (int idx : pixels) mask.set(idx % w, idx / w, c);
}

}  // namespace

SemanticMask postprocess_mask(const SemanticMask& mask, std::size_t min_region_px, std::size_t max_hole_px) {
  SemanticMask out = mask;
  const int w = out.width();
  const int h = out.height();
  std::vector<int> pixels;

  for (SemanticClass cls : {SemanticClass::Road, SemanticClass::Sidewalk}) {
    std::vector<std::uint8_t> seen(out.pixel_count(), 0);
    for (int v = 0; v < h; ++v) {
      for (int u = 0; u < w; ++u) {
        if (seen[static_cast<std::size_t>(v) * w + u] || out.at(u, v) != cls) continue;
        flood(out, u, v, cls, seen, pixels, [](std::optional<SemanticClass>) {});
        if (pixels.size() < min_region_px) relabel(out, pixels, SemanticClass::Other);
      }
    }
  }

  // Holes are labelled against the mask produced by the removal pass.
  const SemanticMask removed = out;
  std::vector<std::uint8_t> seen(removed.pixel_count(), 0);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      if (seen[static_cast<std::size_t>(v) * w + u] || removed.at(u, v) != SemanticClass::Other) continue;
      bool touches_border = false;
      std::optional<SemanticClass> enclosing;
      bool mixed = false;
      flood(removed, u, v, SemanticClass::Other, seen, pixels, [&](std::optional<SemanticClass> n) {
        if (!n) {
          touches_border = true;
        } else if (!enclosing) {
          enclosing = n;
        } else if (*enclosing != *n) {
          mixed = true;
        }
      });
      if (!touches_border && !mixed && enclosing && pixels.size() < max_hole_px) relabel(out, pixels, *enclosing);
    }
  }
  return out;
}

SupportCheck check_support(const SemanticMask& mask, double min_sidewalk_frac, double min_road_frac) {
  SupportCheck r;
  const auto n = static_cast<double>(mask.pixel_count());
  r.sidewalk_frac = static_cast<double>(mask.count(SemanticClass::Sidewalk)) / n;
  r.road_frac = static_cast<double>(mask.count(SemanticClass::Road)) / n;
  if (r.sidewalk_frac < min_sidewalk_frac) {
    r.reason = RejectReason::InsufficientSidewalk;
  } else if (r.road_frac < min_road_frac) {
    r.reason = RejectReason::InsufficientRoad;
  } else {
    r.accepted = true;
  }
  return r;
}

}  // namespace sidewidth
