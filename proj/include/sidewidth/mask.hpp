#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "sidewidth/error.hpp"

namespace sidewidth {

enum class SemanticClass : std::uint8_t { Road = 0, Sidewalk = 1, Other = 255 };

/// Raw segmentation id -> semantic class. Ids without an entry map to Other.
class ClassMap {
 public:
  /// Cityscapes train ids: road = 0, sidewalk = 1.
  static ClassMap cityscapes();

  void assign(std::uint8_t raw, SemanticClass cls) noexcept { table_[raw] = cls; }
  SemanticClass operator()(std::uint8_t raw) const noexcept { return table_[raw]; }

 private:
  ClassMap() { table_.fill(SemanticClass::Other); }
  std::array<SemanticClass, 256> table_{};
};

/// H x W raster of semantic classes.
class SemanticMask {
 public:
  SemanticMask() = default;
  SemanticMask(int width, int height, SemanticClass fill = SemanticClass::Other);
  SemanticMask(int width, int height, std::vector<SemanticClass> classes);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept { return classes_.size(); }

  SemanticClass at(int u, int v) const noexcept { return classes_[index(u, v)]; }
  void set(int u, int v, SemanticClass c) noexcept { classes_[index(u, v)] = c; }
  std::span<const SemanticClass> data() const noexcept { return classes_; }

  std::size_t count(SemanticClass c) const noexcept;

  friend bool operator==(const SemanticMask&, const SemanticMask&) = default;

 private:
  std::size_t index(int u, int v) const noexcept {
    return static_cast<std::size_t>(v) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(u);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<SemanticClass> classes_;
};

/// Reads an 8-bit single-channel PNG and remaps raw ids through `class_map`.
SemanticMask load_mask(const std::filesystem::path& path, const ClassMap& class_map = ClassMap::cityscapes());

/// Writes class ids as raw values (road 0, sidewalk 1, other 255), loadable with the Cityscapes map.
void save_mask(const std::filesystem::path& path, const SemanticMask& mask);

/// Throws FormatError("dimension mismatch") unless the two rasters have identical dimensions.
void require_same_dimensions(const SemanticMask& mask, int width, int height, const std::string& context);

/// Removes road/sidewalk 4-connected components smaller than `min_region_px` (relabelled Other), then
/// fills Other holes that touch no border, are enclosed by a single class and are smaller than `max_hole_px`.
SemanticMask postprocess_mask(const SemanticMask& mask, std::size_t min_region_px, std::size_t max_hole_px);

struct SupportCheck {
  bool accepted = false;
  std::optional<RejectReason> reason;
  double sidewalk_frac = 0.0;
  double road_frac = 0.0;
};

/// Accepts iff sidewalk fraction >= min_sidewalk_frac and road fraction >= min_road_frac.
SupportCheck check_support(const SemanticMask& mask, double min_sidewalk_frac, double min_road_frac);

}  // namespace sidewidth
