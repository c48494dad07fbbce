#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fedreverse {

using Sha256Digest = std::array<std::uint8_t, 32>;

Sha256Digest sha256(std::span<const std::uint8_t> bytes);
Sha256Digest sha256(std::string_view bytes);

std::string to_hex(std::span<const std::uint8_t> bytes);
/// Accepts upper or lower case, no separators. Throws kFormat on odd length
/// or non-hex characters.
std::vector<std::uint8_t> from_hex(std::string_view hex);

/// ChaCha20 keystream (original 64-bit nonce variant, 64-bit block counter)
/// used as the single seedable generator for every stochastic operation.
/// Output is a pure function of (key, nonce), so streams are identical on
/// every platform.
class ChaChaStream {
 public:
  using Key = std::array<std::uint8_t, 32>;

  explicit ChaChaStream(const Key& key, std::uint64_t nonce = 0);

  /// Key = seed as 8 little-endian bytes followed by 24 zero bytes.
  static ChaChaStream from_seed(std::uint64_t seed);

  std::uint64_t next_u64();

  /// 53-bit uniform in [0, 1).
  double next_unit();

  /// Uniform integer in [0, bound) by rejection; bound must be positive.
  std::uint64_t next_below(std::uint64_t bound);

  /// Standard normal deviate via Box-Muller (one deviate per call).
  double next_gaussian();

 private:
  void refill();

  Key key_;
  std::array<std::uint8_t, 8> nonce_{};
  std::uint64_t block_ = 0;
  std::array<std::uint8_t, 64> buffer_{};
  std::size_t pos_ = 64;
};

/// First `count` entries of a Fisher-Yates shuffle of 0..n-1. Position i is
/// swapped with i + next_below(n - i), for i = 0..count-1.
std::vector<std::size_t> shuffled_prefix(ChaChaStream& stream, std::size_t n,
                                         std::size_t count);

}  // namespace fedreverse
