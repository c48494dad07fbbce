#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fedreverse/lattice_dc.hpp"

namespace fedreverse {

using BigUint = boost::multiprecision::cpp_int;
using Vector = std::vector<double>;

/// Inputs of the random key-matrix generator.
struct KeygenConfig {
  int bits_per_entry = 2;           // B
  std::size_t dimension = 3;        // r
  std::uint64_t entry_range = 2;    // q, a power of two >= 2^B
  BigUint key_int = 0;              // the server's random number
  std::vector<std::size_t> client_quotas;  // n_i, summing to r

  /// B * r * r: the length of the bit string the key integer is padded to.
  std::size_t bit_budget() const { return static_cast<std::size_t>(bits_per_entry) * dimension * dimension; }

  void validate() const;
};

/// r candidate directions; columns[j] is the j-th column.
struct KeyMatrix {
  std::size_t dimension = 0;
  std::vector<Vector> columns;
};

/// Key material held by one client: K_i = {u_i, d_i} plus embedding geometry.
struct ClientKey {
  std::string client_id;
  std::vector<Vector> partial_vectors;
  Vector active_vector;  // empty until chosen (clients with several partials)
  DcParams dc;

  std::size_t dimension() const;
  bool has_active_vector() const;
};

std::string default_client_id(std::size_t index);

/// Seed for the key matrix. Contributions are hashed with SHA-256 as
/// (8-byte big-endian length || bytes) in order, read big-endian and reduced
/// mod 2^bit_budget. Budgets over 256 bits append SHA-256(message || be64 k)
/// for k = 1, 2, ... before reducing. With `bypass_hash` exactly one contribution is expected
/// and is taken literally as a big-endian integer.
BigUint master_key_int(std::span<const std::vector<std::uint8_t>> contributions,
                       std::size_t bit_budget, bool bypass_hash = false);

/// Big-endian bytes of a non-negative integer (at least one byte).
std::vector<std::uint8_t> to_big_endian(const BigUint& value);

/// Slices key_int (left-padded to B*r*r bits, MSB first) into r columns of r
/// B-bit entries each, scaled by q / 2^B. Throws kParameter if key_int does
/// not fit the bit budget.
KeyMatrix random_matrix(const KeygenConfig& cfg);

/// Modified Gram-Schmidt over the columns in order, without normalisation.
/// A column whose residual falls below 1e-8 of its original norm is treated
/// as dependent; if fewer than r columns survive RankDeficiencyError is
/// thrown.
std::vector<Vector> orthogonalize(const KeyMatrix& km);

struct KeyFamily {
  KeygenConfig config;  // key_int is the value that finally succeeded
  KeyMatrix matrix;
  std::vector<Vector> directions;
  std::size_t attempts = 1;
};

/// random_matrix + orthogonalize, retrying with key_int + 1 on rank
/// deficiency up to `max_attempts` times.
KeyFamily generate_key_family(const KeygenConfig& cfg,
                              std::size_t max_attempts = 64);

/// Hands out consecutive runs of `quotas[i]` vectors to client i. Clients with
/// a single vector get it as their active vector.
std::vector<ClientKey> assign_keys(std::span<const Vector> vectors,
                                   std::span<const std::size_t> quotas,
                                   std::span<const DcParams> dc_params,
                                   std::span<const std::string> client_ids = {});

/// sum_k coefs[k] * partials[k]. Throws kParameter on size mismatch or an
/// all-zero coefficient list.
Vector combine_partial_keys(std::span<const Vector> partials,
                            std::span<const double> coefs);

/// First 8 bytes of SHA-256(secret), big-endian, scaled into [0, delta).
double derive_dither(std::span<const std::uint8_t> secret, double delta);

/// SHA-256 over the matrix entries (column-major, little-endian f64), hex.
std::string key_matrix_digest(const KeyMatrix& km);

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> a);

/// |<a, b>| <= rel_tol * |a| * |b|.
bool nearly_orthogonal(std::span<const double> a, std::span<const double> b,
                       double rel_tol = 1e-10);

/// Every partial and active vector of one client is orthogonal to every
/// vector of every other client, partials within a client are mutually
/// orthogonal and active vectors are nonzero. Throws Error(kKey).
void check_key_family(std::span<const ClientKey> keys, double rel_tol = 1e-10);

}  // namespace fedreverse
