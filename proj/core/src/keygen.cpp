#include "fedreverse/keygen.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include "fedreverse/crypto.hpp"
#include "fedreverse/error.hpp"

namespace fedreverse {

namespace {

constexpr double kDependenceRatio = 1e-8;

BigUint from_big_endian(std::span<const std::uint8_t> bytes) {
  BigUint v = 0;
  for (std::uint8_t b : bytes) {
    v <<= 8;
    v |= b;
  }
  return v;
}

void append_be64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 7; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

}  // namespace

void KeygenConfig::validate() const {
  if (bits_per_entry < 1 || bits_per_entry > 32) {
    throw Error(ErrorKind::kParameter, "bits per entry B must be in [1, 32]");
  }
  if (dimension < 1) throw Error(ErrorKind::kParameter, "dimension r must be positive");
  if (entry_range == 0 || !std::has_single_bit(entry_range) ||
      entry_range < (std::uint64_t{1} << bits_per_entry)) {
    throw Error(ErrorKind::kParameter, "entry range q must be a power of two >= 2^B");
  }
  if (client_quotas.empty()) throw Error(ErrorKind::kParameter, "no client quotas");
  if (std::any_of(client_quotas.begin(), client_quotas.end(),
                  [](std::size_t n) { return n == 0; })) {
    throw Error(ErrorKind::kParameter, "client quotas must be positive");
  }
  const std::size_t total =
      std::accumulate(client_quotas.begin(), client_quotas.end(), std::size_t{0});
  if (total != dimension) {
    throw Error(ErrorKind::kParameter,
                "client quotas sum to " + std::to_string(total) +
                    " but dimension is " + std::to_string(dimension));
  }
  if (key_int < 0 ||
      (key_int != 0 && boost::multiprecision::msb(key_int) >= bit_budget())) {
    throw Error(ErrorKind::kParameter,
                "key integer does not fit in B*r*r = " + std::to_string(bit_budget()) +
                    " bits");
  }
}

std::size_t ClientKey::dimension() const {
  if (!active_vector.empty()) return active_vector.size();
  return partial_vectors.empty() ? 0 : partial_vectors.front().size();
}

bool ClientKey::has_active_vector() const {
  return !active_vector.empty() && norm(active_vector) > 0.0;
}

std::string default_client_id(std::size_t index) {
  return "client" + std::to_string(index + 1);
}

BigUint master_key_int(std::span<const std::vector<std::uint8_t>> contributions,
                       std::size_t bit_budget, bool bypass_hash) {
  if (contributions.empty()) {
    throw Error(ErrorKind::kParameter, "at least one key contribution is required");
  }
  if (bypass_hash) {
    if (contributions.size() != 1) {
      throw Error(ErrorKind::kParameter, "hash bypass takes exactly one literal value");
    }
    return from_big_endian(contributions.front());
  }
  std::vector<std::uint8_t> message;
  for (const auto& c : contributions) {
    append_be64(message, c.size());
    message.insert(message.end(), c.begin(), c.end());
  }
  BigUint value = from_big_endian(sha256(message));
  // Budgets past one digest append SHA-256(message || be64 counter) blocks so
  // every matrix entry stays keyed; budgets <= 256 bits are unaffected.
  for (std::uint64_t block = 1; block * 256 < bit_budget; ++block) {
    std::vector<std::uint8_t> extended = message;
    append_be64(extended, block);
    value <<= 256;
    value |= from_big_endian(sha256(extended));
  }
  value &= (BigUint(1) << bit_budget) - 1;
  return value;
}

std::vector<std::uint8_t> to_big_endian(const BigUint& value) {
  std::vector<std::uint8_t> out;
  BigUint v = value;
  do {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    v >>= 8;
  } while (v != 0);
  std::reverse(out.begin(), out.end());
  return out;
}

KeyMatrix random_matrix(const KeygenConfig& cfg) {
  cfg.validate();
  const std::size_t r = cfg.dimension;
  const auto b = static_cast<std::size_t>(cfg.bits_per_entry);
  const std::size_t budget = cfg.bit_budget();
  const double scale =
      static_cast<double>(cfg.entry_range >> cfg.bits_per_entry);

  // Bit at string position p (0 = leftmost) is bit (budget - 1 - p) of key_int.
  auto bit_at = [&](std::size_t p) {
    return boost::multiprecision::bit_test(cfg.key_int, budget - 1 - p);
  };

  KeyMatrix km;
  km.dimension = r;
  km.columns.assign(r, Vector(r, 0.0));
  for (std::size_t j = 0; j < r; ++j) {
    for (std::size_t e = 0; e < r; ++e) {
      const std::size_t start = (j * r + e) * b;
      std::uint64_t chunk = 0;
      for (std::size_t k = 0; k < b; ++k) chunk = chunk << 1 | (bit_at(start + k) ? 1u : 0u);
      km.columns[j][e] = static_cast<double>(chunk) * scale;
    }
  }
  return km;
}

std::vector<Vector> orthogonalize(const KeyMatrix& km) {
  const std::size_t r = km.dimension;
  if (km.columns.size() != r) {
    throw Error(ErrorKind::kParameter, "key matrix must have r columns");
  }
  std::vector<Vector> basis;
  basis.reserve(r);
  for (const Vector& column : km.columns) {
    if (column.size() != r) {
      throw Error(ErrorKind::kParameter, "key matrix column has wrong length");
    }
    const double original = norm(column);
    if (original == 0.0) continue;
    Vector w = column;
    for (const Vector& v : basis) {
      const double coef = dot(w, v) / dot(v, v);
      for (std::size_t i = 0; i < r; ++i) w[i] -= coef * v[i];
    }
    if (norm(w) < kDependenceRatio * original) continue;
    basis.push_back(std::move(w));
  }
  if (basis.size() < r) throw RankDeficiencyError(basis.size(), r);
  return basis;
}

KeyFamily generate_key_family(const KeygenConfig& cfg, std::size_t max_attempts) {
  KeyFamily family;
  family.config = cfg;
  for (std::size_t attempt = 1; attempt <= max_attempts; ++attempt) {
    family.attempts = attempt;
    family.matrix = random_matrix(family.config);
    try {
      family.directions = orthogonalize(family.matrix);
      return family;
    } catch (const RankDeficiencyError&) {
      if (attempt == max_attempts) throw;
      family.config.key_int += 1;
    }
  }
  throw Error(ErrorKind::kParameter, "max_attempts must be positive");
}

std::vector<ClientKey> assign_keys(std::span<const Vector> vectors,
                                   std::span<const std::size_t> quotas,
                                   std::span<const DcParams> dc_params,
                                   std::span<const std::string> client_ids) {
  const std::size_t total = std::accumulate(quotas.begin(), quotas.end(), std::size_t{0});
  if (total != vectors.size()) {
    throw Error(ErrorKind::kParameter,
                "quotas sum to " + std::to_string(total) + " but " +
                    std::to_string(vectors.size()) + " vectors are available");
  }
  if (dc_params.size() != quotas.size()) {
    throw Error(ErrorKind::kParameter, "one DcParams per client is required");
  }
  if (!client_ids.empty() && client_ids.size() != quotas.size()) {
    throw Error(ErrorKind::kParameter, "one client id per quota is required");
  }
  std::vector<ClientKey> keys;
  keys.reserve(quotas.size());
  std::size_t next = 0;
  for (std::size_t i = 0; i < quotas.size(); ++i) {
    if (quotas[i] == 0) throw Error(ErrorKind::kParameter, "client quotas must be positive");
    dc_params[i].validate();
    ClientKey key;
    key.client_id = client_ids.empty() ? default_client_id(i) : client_ids[i];
    key.dc = dc_params[i];
    key.partial_vectors.assign(vectors.begin() + static_cast<std::ptrdiff_t>(next),
                               vectors.begin() + static_cast<std::ptrdiff_t>(next + quotas[i]));
    next += quotas[i];
    if (key.partial_vectors.size() == 1) key.active_vector = key.partial_vectors.front();
    keys.push_back(std::move(key));
  }
  check_key_family(keys);
  return keys;
}

Vector combine_partial_keys(std::span<const Vector> partials,
                            std::span<const double> coefs) {
  if (partials.empty() || partials.size() != coefs.size()) {
    throw Error(ErrorKind::kParameter,
                "need one coefficient per partial key and at least one partial");
  }
  if (std::all_of(coefs.begin(), coefs.end(), [](double c) { return c == 0.0; })) {
    throw Error(ErrorKind::kParameter, "all-zero coefficients give a zero key");
  }
  const std::size_t r = partials.front().size();
  Vector out(r, 0.0);
  for (std::size_t k = 0; k < partials.size(); ++k) {
    if (partials[k].size() != r) {
      throw Error(ErrorKind::kParameter, "partial keys differ in dimension");
    }
    for (std::size_t i = 0; i < r; ++i) out[i] += coefs[k] * partials[k][i];
  }
  if (norm(out) == 0.0) throw Error(ErrorKind::kParameter, "combined key is zero");
  return out;
}

double derive_dither(std::span<const std::uint8_t> secret, double delta) {
  if (!(delta > 0.0)) throw Error(ErrorKind::kParameter, "delta must be positive");
  const Sha256Digest digest = sha256(secret);
  std::uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u = u << 8 | digest[i];
  const double d = static_cast<double>(u) * 0x1.0p-64 * delta;
  // u close to 2^64 rounds up to exactly delta in double precision.
  return d < delta ? d : std::nextafter(delta, 0.0);
}

std::string key_matrix_digest(const KeyMatrix& km) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(km.dimension * km.dimension * 8);
  for (const Vector& column : km.columns) {
    for (double x : column) {
      const auto bits = std::bit_cast<std::uint64_t>(x);
      for (int i = 0; i < 8; ++i) bytes.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
    }
  }
  return to_hex(sha256(bytes));
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::kLengthMismatch, "dot product of vectors of different length");
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

bool nearly_orthogonal(std::span<const double> a, std::span<const double> b,
                       double rel_tol) {
  return std::abs(dot(a, b)) <= rel_tol * norm(a) * norm(b);
}

void check_key_family(std::span<const ClientKey> keys, double rel_tol) {
  auto vectors_of = [](const ClientKey& k) {
    std::vector<const Vector*> out;
    for (const Vector& v : k.partial_vectors) out.push_back(&v);
    if (!k.active_vector.empty()) out.push_back(&k.active_vector);
    return out;
  };
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const auto& ki = keys[i];
    if (!ki.active_vector.empty() && !ki.has_active_vector()) {
      throw Error(ErrorKind::kKey, "client " + ki.client_id + " has a zero active vector");
    }
    for (std::size_t a = 0; a < ki.partial_vectors.size(); ++a) {
      for (std::size_t b = a + 1; b < ki.partial_vectors.size(); ++b) {
        if (!nearly_orthogonal(ki.partial_vectors[a], ki.partial_vectors[b], rel_tol)) {
          throw Error(ErrorKind::kKey,
                      "partial vectors of client " + ki.client_id + " are not orthogonal");
        }
      }
    }
    for (std::size_t j = i + 1; j < keys.size(); ++j) {
      for (const Vector* u : vectors_of(ki)) {
        for (const Vector* v : vectors_of(keys[j])) {
          if (u->size() != v->size()) {
            throw Error(ErrorKind::kKey, "key dimensions differ between clients " +
                                             ki.client_id + " and " + keys[j].client_id);
          }
          if (!nearly_orthogonal(*u, *v, rel_tol)) {
            throw Error(ErrorKind::kKey, "keys of clients " + ki.client_id + " and " +
                                             keys[j].client_id + " are not orthogonal");
          }
        }
      }
    }
  }
}

}  // namespace fedreverse
