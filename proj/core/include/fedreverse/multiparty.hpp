#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fedreverse/keygen.hpp"
#include "fedreverse/lattice_dc.hpp"

namespace fedreverse {

/// Bits one client embeds, packed MSB-first into `data`.
struct Payload {
  std::string client_id;
  std::vector<std::uint8_t> data;
  std::size_t bit_length = 0;

  static Payload from_bytes(std::string client_id, std::vector<std::uint8_t> bytes);

  /// Bit i (0-based, MSB-first). Throws kParameter past bit_length.
  bool bit(std::size_t i) const;
  void validate() const;
};

/// Block layout of a cover sequence: num_blocks consecutive blocks of
/// `dimension` elements; anything past dimension * num_blocks is tail and is
/// never modified. Block k carries bit k of every client's payload.
struct EmbeddingPlan {
  std::size_t dimension = 0;
  std::size_t num_blocks = 0;
  std::vector<std::string> client_order;

  /// floor(cover_length / dimension) blocks.
  static EmbeddingPlan for_cover(std::size_t cover_length, std::size_t dimension,
                                 std::vector<std::string> client_order);

  std::size_t covered_length() const { return dimension * num_blocks; }
  std::size_t capacity_bits() const { return num_blocks; }

  /// Checks n <= r and that `keys` is exactly the client_order set, each with
  /// an active vector of dimension r, mutually orthogonal. Returns the keys
  /// reordered to client_order.
  std::vector<ClientKey> bind_keys(std::span<const ClientKey> keys) const;
};

/// Signed length of s along u: <s, u> / |u|.
double proj_coeff(std::span<const double> s, std::span<const double> u);

/// y = s + sum_i (embed_dc(l_i, m_i) - l_i) * u_i/|u_i|, l_i = proj_coeff(s, u_i).
std::vector<double> embed_block(std::span<const double> s,
                                std::span<const Message> messages,
                                std::span<const ClientKey> keys);

Message extract_block(std::span<const double> y, const ClientKey& key);

/// Inverse of embed_block given every key used for embedding.
std::vector<double> recover_block(std::span<const double> y,
                                  std::span<const ClientKey> keys);

/// Embeds every client's payload into the blocked prefix of `cover`.
/// Clients without a payload (or past their bit_length) embed padding bit 0.
std::vector<double> embed_payloads(std::span<const double> cover,
                                   const EmbeddingPlan& plan,
                                   std::span<const Payload> payloads,
                                   std::span<const ClientKey> keys);

/// First `bit_length` bits decoded with one client's key, MSB-first packed.
std::vector<std::uint8_t> extract_payload(std::span<const double> watermarked,
                                          const EmbeddingPlan& plan,
                                          const ClientKey& key,
                                          std::size_t bit_length);

/// Restores the cover. `keys` must be exactly the plan's client set.
std::vector<double> recover_sequence(std::span<const double> watermarked,
                                     const EmbeddingPlan& plan,
                                     std::span<const ClientKey> keys);

}  // namespace fedreverse
