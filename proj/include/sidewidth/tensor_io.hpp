#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Core>

namespace sidewidth {

/// Dense float32 array as stored in a `.npy` (v1.0/2.0, little-endian, C order) file.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<float> data;
};

Tensor read_npy(const std::filesystem::path& path);
void write_npy(const std::filesystem::path& path, const Tensor& tensor);

/// Dense H x W grid of 3D points in model units. A pixel is valid iff all three coordinates are finite.
class PointMap {
 public:
  PointMap() = default;
  /// `xyz` is row-major (H, W, 3). Throws if its size disagrees with the dimensions.
  PointMap(int width, int height, std::vector<float> xyz);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_); }

  bool valid(int u, int v) const noexcept { return valid_[index(u, v)] != 0; }
  Eigen::Vector3d point(int u, int v) const noexcept {
    const float* p = &xyz_[3 * index(u, v)];
    return {p[0], p[1], p[2]};
  }
  std::span<const float> data() const noexcept { return xyz_; }
  std::size_t valid_count() const noexcept;

  /// Every coordinate multiplied by `k` (rounded to float32).
  PointMap scaled(double k) const;

  friend bool operator==(const PointMap&, const PointMap&);

 private:
  std::size_t index(int u, int v) const noexcept {
    return static_cast<std::size_t>(v) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(u);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<float> xyz_;
  std::vector<std::uint8_t> valid_;
};

/// Dense H x W depth grid (z along the optical axis). Valid iff finite and positive.
class DepthMap {
 public:
  DepthMap() = default;
  DepthMap(int width, int height, std::vector<float> depth);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  float at(int u, int v) const noexcept { return depth_[static_cast<std::size_t>(v) * width_ + u]; }
  bool valid(int u, int v) const noexcept;
  std::span<const float> data() const noexcept { return depth_; }

  friend bool operator==(const DepthMap&, const DepthMap&);

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<float> depth_;
};

using Geometry = std::variant<PointMap, DepthMap>;

PointMap load_point_map(const std::filesystem::path& path);
void save_point_map(const std::filesystem::path& path, const PointMap& map);
DepthMap load_depth_map(const std::filesystem::path& path);
void save_depth_map(const std::filesystem::path& path, const DepthMap& map);

/// Loads either kind, dispatching on the trailing dimension (3 -> point map, 1 -> depth).
Geometry load_geometry(const std::filesystem::path& path);

}  // namespace sidewidth
