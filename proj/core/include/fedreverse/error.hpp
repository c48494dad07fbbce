#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fedreverse {

enum class ErrorKind {
  kParameter,       // value outside its admissible domain
  kUnsupported,     // operation not defined for these parameters
  kRankDeficiency,  // key matrix columns not linearly independent
  kCapacity,        // payload longer than the plan can carry
  kLengthMismatch,  // sequences of different length
  kKey,             // missing, unknown or non-orthogonal keys
  kDigest,          // key file does not match the plan manifest
  kBadMagic,
  kInconsistent,    // container manifest disagrees with its data
  kTruncated,
  kUnknownTensor,
  kIndexRange,
  kUndefined,       // metric is mathematically undefined for the input
  kIo,
  kFormat,          // malformed key file / plan / hex input
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Thrown by orthogonalize(); carries how many independent columns survived.
class RankDeficiencyError : public Error {
 public:
  RankDeficiencyError(std::size_t independent, std::size_t required);

  std::size_t independent_columns() const noexcept { return independent_; }
  std::size_t required_columns() const noexcept { return required_; }

 private:
  std::size_t independent_;
  std::size_t required_;
};

/// Thrown when a payload exceeds the per-client bit capacity of a plan.
class CapacityError : public Error {
 public:
  CapacityError(std::size_t requested_bits, std::size_t capacity_bits);

  std::size_t capacity_bits() const noexcept { return capacity_; }

 private:
  std::size_t capacity_;
};

}  // namespace fedreverse
