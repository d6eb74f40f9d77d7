#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace sidewidth {

/// Median; even-length input averages the two central order statistics. Throws on empty input.
double median(std::span<const double> values);

/// Median absolute deviation median(|v - median(v)|), without consistency scaling.
double mad(std::span<const double> values);

/// Stable 64-bit FNV-1a hash, used to derive per-image seeds.
std::uint64_t fnv1a64(std::string_view text) noexcept;

/// SplitMix64 finaliser.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed for one work item, independent of scheduling order.
inline std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view key) noexcept {
  return mix64(global_seed ^ fnv1a64(key));
}

}  // namespace sidewidth
