#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sidewidth {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input file could not be read or violates its interchange format.
class FormatError : public Error {
 public:
  FormatError(const std::string& path, const std::string& reason)
      : Error(path + ": " + reason), path_(path), reason_(reason) {}

  const std::string& path() const noexcept { return path_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string path_;
  std::string reason_;
};

/// Geometric input that admits no unique solution (collinear points, zero-length segment).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// Machine-readable reasons an image is rejected by a plausibility gate.
enum class RejectReason {
  InsufficientSidewalk,
  InsufficientRoad,
  TooFewSupportPoints,
  LowInlierRatio,
  CameraOnPlane,
  InsufficientValidColumns,
  AmbiguousDirection,
  WidthOutOfRange,
  HighDispersion,
};

std::string_view to_string(RejectReason reason) noexcept;

/// A gate refused the input. Not a malfunction: the pipeline turns this into a status.
class Rejected : public Error {
 public:
  Rejected(RejectReason reason, const std::string& detail)
      : Error(std::string(to_string(reason)) + ": " + detail), reason_(reason) {}

  RejectReason reason() const noexcept { return reason_; }

 private:
  RejectReason reason_;
};

}  // namespace sidewidth
