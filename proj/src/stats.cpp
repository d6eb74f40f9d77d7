#include "sidewidth/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "sidewidth/error.hpp"

namespace sidewidth {

std::string_view to_string(RejectReason reason) noexcept {
  switch (reason) {
    case RejectReason::InsufficientSidewalk: return "insufficient_sidewalk";
    case RejectReason::InsufficientRoad: return "insufficient_road";
    case RejectReason::TooFewSupportPoints: return "too_few_support_points";
    case RejectReason::LowInlierRatio: return "low_inlier_ratio";
    case RejectReason::CameraOnPlane: return "camera_on_plane";
    case RejectReason::InsufficientValidColumns: return "insufficient_valid_columns";
    case RejectReason::AmbiguousDirection: return "ambiguous_direction";
    case RejectReason::WidthOutOfRange: return "width_out_of_range";
    case RejectReason::HighDispersion: return "high_dispersion";
  }
  return "unknown";
}

double median(std::span<const double> values) {
  if (values.empty()) throw Error("median of empty input");
  std::vector<double> v(values.begin(), values.end());
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

double mad(std::span<const double> values) {
  if (values.empty()) throw Error("mad of empty input");
  const double m = median(values);
  std::vector<double> dev(values.size());
  std::transform(values.begin(), values.end(), dev.begin(), [m](double x) { return std::abs(x - m); });
  return median(dev);
}

std::uint64_t fnv1a64(std::string_view text) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace sidewidth
