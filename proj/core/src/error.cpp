#include "fedreverse/error.hpp"

namespace fedreverse {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParameter: return "parameter";
    case ErrorKind::kUnsupported: return "unsupported";
    case ErrorKind::kRankDeficiency: return "rank-deficiency";
    case ErrorKind::kCapacity: return "capacity";
    case ErrorKind::kLengthMismatch: return "length-mismatch";
    case ErrorKind::kKey: return "key";
    case ErrorKind::kDigest: return "digest";
    case ErrorKind::kBadMagic: return "bad-magic";
    case ErrorKind::kInconsistent: return "inconsistent";
    case ErrorKind::kTruncated: return "truncated";
    case ErrorKind::kUnknownTensor: return "unknown-tensor";
    case ErrorKind::kIndexRange: return "index-range";
    case ErrorKind::kUndefined: return "undefined";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kFormat: return "format";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(what), kind_(kind) {}

RankDeficiencyError::RankDeficiencyError(std::size_t independent,
                                         std::size_t required)
    : Error(ErrorKind::kRankDeficiency,
            "key matrix has only " + std::to_string(independent) + " of " +
                std::to_string(required) + " linearly independent columns"),
      independent_(independent),
      required_(required) {}

CapacityError::CapacityError(std::size_t requested_bits,
                             std::size_t capacity_bits)
    : Error(ErrorKind::kCapacity,
            "payload of " + std::to_string(requested_bits) +
                " bits exceeds capacity of " + std::to_string(capacity_bits) +
                " bits per client"),
      capacity_(capacity_bits) {}

}  // namespace fedreverse
