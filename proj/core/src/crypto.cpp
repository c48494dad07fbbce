#include "fedreverse/crypto.hpp"

#include <sodium.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "fedreverse/error.hpp"

namespace fedreverse {

namespace {

void ensure_sodium() {
  static const bool ok = sodium_init() >= 0;
  if (!ok) throw Error(ErrorKind::kIo, "libsodium initialisation failed");
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

Sha256Digest sha256(std::span<const std::uint8_t> bytes) {
  ensure_sodium();
  Sha256Digest out{};
  crypto_hash_sha256(out.data(), bytes.data(), bytes.size());
  return out;
}

Sha256Digest sha256(std::string_view bytes) {
  return sha256(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0x0f]);
  }
  return out;
}

std::vector<std::uint8_t> from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) {
    throw Error(ErrorKind::kFormat, "hex string has odd length");
  }
  std::vector<std::uint8_t> out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const int hi = hex_value(hex[2 * i]);
    const int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) {
      throw Error(ErrorKind::kFormat,
                  "invalid hex digit in '" + std::string(hex) + "'");
    }
    out[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return out;
}

ChaChaStream::ChaChaStream(const Key& key, std::uint64_t nonce) : key_(key) {
  static_assert(crypto_stream_chacha20_KEYBYTES == 32);
  static_assert(crypto_stream_chacha20_NONCEBYTES == 8);
  ensure_sodium();
  for (int i = 0; i < 8; ++i) {
    nonce_[i] = static_cast<std::uint8_t>(nonce >> (8 * i));
  }
}

ChaChaStream ChaChaStream::from_seed(std::uint64_t seed) {
  Key key{};
  for (int i = 0; i < 8; ++i) key[i] = static_cast<std::uint8_t>(seed >> (8 * i));
  return ChaChaStream(key);
}

void ChaChaStream::refill() {
  buffer_.fill(0);
  crypto_stream_chacha20_xor_ic(buffer_.data(), buffer_.data(), buffer_.size(),
                                nonce_.data(), block_, key_.data());
  ++block_;
  pos_ = 0;
}

std::uint64_t ChaChaStream::next_u64() {
  if (pos_ + 8 > buffer_.size()) refill();
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(buffer_[pos_ + i]) << (8 * i);
  }
  pos_ += 8;
  return v;
}

double ChaChaStream::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::uint64_t ChaChaStream::next_below(std::uint64_t bound) {
  if (bound == 0) throw Error(ErrorKind::kParameter, "next_below(0)");
  // Reject the low (2^64 mod bound) values so the modulo is unbiased.
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t v = next_u64();
    if (v >= threshold) return v % bound;
  }
}

double ChaChaStream::next_gaussian() {
  // u1 in (0, 1] keeps the logarithm finite.
  const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  const double u2 = next_unit();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

std::vector<std::size_t> shuffled_prefix(ChaChaStream& stream, std::size_t n,
                                         std::size_t count) {
  if (count > n) {
    throw Error(ErrorKind::kParameter, "shuffle prefix longer than range");
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + stream.next_below(n - i);
    std::swap(perm[i], perm[j]);
  }
  perm.resize(count);
  return perm;
}

}  // namespace fedreverse
