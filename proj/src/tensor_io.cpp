#include "sidewidth/tensor_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "sidewidth/error.hpp"

namespace sidewidth {
namespace {

static_assert(std::endian::native == std::endian::little, "npy I/O assumes a little-endian host");

constexpr char kMagic[] = "\x93NUMPY";
constexpr std::size_t kMagicLen = 6;

std::string header_value(const std::string& header, const std::string& key, const std::string& path) {
  const std::string needle = "'" + key + "'";
  const auto at = header.find(needle);
  if (at == std::string::npos) throw FormatError(path, "malformed header: missing " + key);
  auto colon = header.find(':', at + needle.size());
  if (colon == std::string::npos) throw FormatError(path, "malformed header: no value for " + key);
  auto start = header.find_first_not_of(' ', colon + 1);
  if (start == std::string::npos) throw FormatError(path, "malformed header: no value for " + key);
  if (header[start] == '\'') {
    const auto end = header.find('\'', start + 1);
    if (end == std::string::npos) throw FormatError(path, "malformed header: unterminated string");
    return header.substr(start + 1, end - start - 1);
  }
  if (header[start] == '(') {
    const auto end = header.find(')', start);
    if (end == std::string::npos) throw FormatError(path, "malformed header: unterminated shape");
    return header.substr(start + 1, end - start - 1);
  }
  const auto end = header.find_first_of(",}", start);
  return header.substr(start, end - start);
}

std::vector<std::size_t> parse_shape(const std::string& text, const std::string& path) {
  std::vector<std::size_t> shape;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto first = item.find_first_not_of(' ');
    if (first == std::string::npos) continue;
    const auto last = item.find_last_not_of(' ');
    const std::string digits = item.substr(first, last - first + 1);
    if (digits.find_first_not_of("0123456789") != std::string::npos || digits.empty())
      throw FormatError(path, "malformed header: bad shape entry '" + digits + "'");
    shape.push_back(static_cast<std::size_t>(std::stoull(digits)));
  }
  return shape;
}

Tensor expect_rank3(Tensor t, std::size_t last_dim, const std::string& path) {
  if (t.shape.size() != 3) throw FormatError(path, "wrong rank: expected 3, got " + std::to_string(t.shape.size()));
  if (t.shape[2] != last_dim)
    throw FormatError(path, "wrong last dimension: expected " + std::to_string(last_dim) + ", got " +
                                std::to_string(t.shape[2]));
  if (t.shape[0] == 0 || t.shape[1] == 0) throw FormatError(path, "dimension zero");
  return t;
}

}  // namespace

Tensor read_npy(const std::filesystem::path& path) {
  const std::string p = path.string();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(p, "cannot open file");

  char magic[kMagicLen];
  if (!in.read(magic, kMagicLen) || std::memcmp(magic, kMagic, kMagicLen) != 0)
    throw FormatError(p, "malformed header: bad magic");
  unsigned char version[2];
  if (!in.read(reinterpret_cast<char*>(version), 2)) throw FormatError(p, "malformed header: truncated");

  std::size_t header_len = 0;
  if (version[0] == 1) {
    unsigned char len[2];
    if (!in.read(reinterpret_cast<char*>(len), 2)) throw FormatError(p, "malformed header: truncated");
    header_len = len[0] | (static_cast<std::size_t>(len[1]) << 8);
  } else if (version[0] == 2 || version[0] == 3) {
    unsigned char len[4];
    if (!in.read(reinterpret_cast<char*>(len), 4)) throw FormatError(p, "malformed header: truncated");
    header_len = len[0] | (static_cast<std::size_t>(len[1]) << 8) | (static_cast<std::size_t>(len[2]) << 16) |
                 (static_cast<std::size_t>(len[3]) << 24);
  } else {
    throw FormatError(p, "malformed header: unsupported version " + std::to_string(version[0]));
  }

  std::string header(header_len, '\0');
  if (!in.read(header.data(), static_cast<std::streamsize>(header_len)))
    throw FormatError(p, "malformed header: truncated");
  if (header.find('{') == std::string::npos) throw FormatError(p, "malformed header: not a dict");

  const std::string descr = header_value(header, "descr", p);
  if (descr != "<f4") throw FormatError(p, "unsupported element type '" + descr + "' (expected <f4)");
  if (header_value(header, "fortran_order", p) != "False")
    throw FormatError(p, "unsupported layout: fortran_order must be False");

  Tensor t;
  t.shape = parse_shape(header_value(header, "shape", p), p);
  std::size_t count = 1;
  for (auto d : t.shape) count *= d;
  t.data.resize(count);
  if (!in.read(reinterpret_cast<char*>(t.data.data()), static_cast<std::streamsize>(count * sizeof(float))))
    throw FormatError(p, "truncated payload");
  return t;
}

void write_npy(const std::filesystem::path& path, const Tensor& tensor) {
  std::size_t count = 1;
  for (auto d : tensor.shape) count *= d;
  if (count != tensor.data.size()) throw Error(path.string() + ": tensor shape does not match data size");

  std::string shape = "(";
  for (std::size_t i = 0; i < tensor.shape.size(); ++i) {
    shape += std::to_string(tensor.shape[i]);
    if (tensor.shape.size() == 1 || i + 1 < tensor.shape.size()) shape += ",";
    if (i + 1 < tensor.shape.size()) shape += " ";
  }
  shape += ")";
  std::string header = "{'descr': '<f4', 'fortran_order': False, 'shape': " + shape + ", }";
  // Pad so that magic + version + length + header is a multiple of 64 bytes.
  const std::size_t prefix = kMagicLen + 2 + 2;
  const std::size_t total = ((prefix + header.size() + 1 + 63) / 64) * 64;
  header.append(total - prefix - header.size() - 1, ' ');
  header.push_back('\n');

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError(path.string(), "cannot open file for writing");
  out.write(kMagic, kMagicLen);
  const char version[2] = {1, 0};
  out.write(version, 2);
  const unsigned char len[2] = {static_cast<unsigned char>(header.size() & 0xff),
                                static_cast<unsigned char>(header.size() >> 8)};
  out.write(reinterpret_cast<const char*>(len), 2);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(reinterpret_cast<const char*>(tensor.data.data()),
            static_cast<std::streamsize>(tensor.data.size() * sizeof(float)));
  if (!out) throw FormatError(path.string(), "write failed");
}

PointMap::PointMap(int width, int height, std::vector<float> xyz)
    : width_(width), height_(height), xyz_(std::move(xyz)) {
  if (width <= 0 || height <= 0) throw Error("point map dimensions must be positive");
  if (xyz_.size() != 3 * pixel_count()) throw Error("point map data size does not match dimensions");
  valid_.resize(pixel_count());
  for (std::size_t i = 0; i < valid_.size(); ++i) {
    valid_[i] = std::isfinite(xyz_[3 * i]) && std::isfinite(xyz_[3 * i + 1]) && std::isfinite(xyz_[3 * i + 2]);
  }
}

std::size_t PointMap::valid_count() const noexcept {
  std::size_t n = 0;
  for (auto v : valid_) n += v;
  return n;
}

PointMap PointMap::scaled(double k) const {
  std::vector<float> xyz(xyz_.size());
  for (std::size_t i = 0; i < xyz.size(); ++i) xyz[i] = static_cast<float>(k * static_cast<double>(xyz_[i]));
  return PointMap(width_, height_, std::move(xyz));
}

bool operator==(const PointMap& a, const PointMap& b) {
  return a.width_ == b.width_ && a.height_ == b.height_ && a.xyz_.size() == b.xyz_.size() &&
         std::memcmp(a.xyz_.data(), b.xyz_.data(), a.xyz_.size() * sizeof(float)) == 0;
}

DepthMap::DepthMap(int width, int height, std::vector<float> depth)
    : width_(width), height_(height), depth_(std::move(depth)) {
  if (width <= 0 || height <= 0) throw Error("depth map dimensions must be positive");
  if (depth_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw Error("depth map data size does not match dimensions");
}

bool DepthMap::valid(int u, int v) const noexcept {
  const float z = at(u, v);
  return std::isfinite(z) && z > 0.0f;
}

bool operator==(const DepthMap& a, const DepthMap& b) {
  return a.width_ == b.width_ && a.height_ == b.height_ && a.depth_.size() == b.depth_.size() &&
         std::memcmp(a.depth_.data(), b.depth_.data(), a.depth_.size() * sizeof(float)) == 0;
}

PointMap load_point_map(const std::filesystem::path& path) {
  Tensor t = expect_rank3(read_npy(path), 3, path.string());
  return PointMap(static_cast<int>(t.shape[1]), static_cast<int>(t.shape[0]), std::move(t.data));
}

void save_point_map(const std::filesystem::path& path, const PointMap& map) {
  Tensor t;
  t.shape = {static_cast<std::size_t>(map.height()), static_cast<std::size_t>(map.width()), 3};
  t.data.assign(map.data().begin(), map.data().end());
  write_npy(path, t);
}

DepthMap load_depth_map(const std::filesystem::path& path) {
  Tensor t = expect_rank3(read_npy(path), 1, path.string());
  return DepthMap(static_cast<int>(t.shape[1]), static_cast<int>(t.shape[0]), std::move(t.data));
}

void save_depth_map(const std::filesystem::path& path, const DepthMap& map) {
  Tensor t;
  t.shape = {static_cast<std::size_t>(map.height()), static_cast<std::size_t>(map.width()), 1};
  t.data.assign(map.data().begin(), map.data().end());
  write_npy(path, t);
}

Geometry load_geometry(const std::filesystem::path& path) {
  Tensor t = read_npy(path);
  const std::string p = path.string();
  if (t.shape.size() != 3) throw FormatError(p, "wrong rank: expected 3, got " + std::to_string(t.shape.size()));
  if (t.shape[2] == 3) {
    t = expect_rank3(std::move(t), 3, p);
    return PointMap(static_cast<int>(t.shape[1]), static_cast<int>(t.shape[0]), std::move(t.data));
  }
  if (t.shape[2] == 1) {
    t = expect_rank3(std::move(t), 1, p);
    return DepthMap(static_cast<int>(t.shape[1]), static_cast<int>(t.shape[0]), std::move(t.data));
  }
  throw FormatError(p, "wrong last dimension: expected 3 (point map) or 1 (depth), got " + std::to_string(t.shape[2]));
}

}  // namespace sidewidth
