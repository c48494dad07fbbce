#include "fedreverse/multiparty.hpp"

#include <algorithm>
#include <cmath>

#include "fedreverse/error.hpp"

namespace fedreverse {

namespace {

struct Direction {
  Vector unit;
  DcParams dc;
};

// Validated unit directions, computed once per sequence.
std::vector<Direction> prepare(std::span<const ClientKey> keys, std::size_t r) {
  if (keys.size() > r) {
    throw Error(ErrorKind::kKey, std::to_string(keys.size()) +
                                     " clients exceed block dimension " + std::to_string(r));
  }
  std::vector<Direction> out;
  out.reserve(keys.size());
  for (const ClientKey& key : keys) {
    if (!key.has_active_vector()) {
      throw Error(ErrorKind::kKey, "client " + key.client_id + " has no active key vector");
    }
    if (key.active_vector.size() != r) {
      throw Error(ErrorKind::kKey, "key of client " + key.client_id +
                                       " does not match block dimension " + std::to_string(r));
    }
    key.dc.validate();
    Direction d{key.active_vector, key.dc};
    const double n = norm(d.unit);
    for (double& x : d.unit) x /= n;
    out.push_back(std::move(d));
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (std::size_t j = i + 1; j < out.size(); ++j) {
      if (!nearly_orthogonal(out[i].unit, out[j].unit)) {
        throw Error(ErrorKind::kKey, "keys of clients " + keys[i].client_id + " and " +
                                         keys[j].client_id + " are not orthogonal");
      }
    }
  }
  return out;
}

double unit_coeff(std::span<const double> s, const Vector& unit) { return dot(s, unit); }

void embed_into(std::span<const double> s, std::span<double> y,
                std::span<const Message> messages, std::span<const Direction> dirs) {
  std::copy(s.begin(), s.end(), y.begin());
  // Coefficients are read from the original block so clients do not see
  // each other's rounding.
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    const double l = unit_coeff(s, dirs[i].unit);
    const double shift = embed_dc(l, messages[i], dirs[i].dc) - l;
    for (std::size_t k = 0; k < y.size(); ++k) y[k] += shift * dirs[i].unit[k];
  }
}

void recover_into(std::span<const double> y, std::span<double> s,
                  std::span<const Direction> dirs) {
  std::copy(y.begin(), y.end(), s.begin());
  for (const Direction& d : dirs) {
    const double l = unit_coeff(y, d.unit);
    const double shift = recover_dc(l, d.dc) - l;
    for (std::size_t k = 0; k < s.size(); ++k) s[k] += shift * d.unit[k];
  }
}

}  // namespace

Payload Payload::from_bytes(std::string client_id, std::vector<std::uint8_t> bytes) {
  Payload p;
  p.client_id = std::move(client_id);
  p.bit_length = bytes.size() * 8;
  p.data = std::move(bytes);
  return p;
}

bool Payload::bit(std::size_t i) const {
  if (i >= bit_length) throw Error(ErrorKind::kParameter, "payload bit index out of range");
  return (data[i / 8] >> (7 - i % 8)) & 1u;
}

void Payload::validate() const {
  if (bit_length > data.size() * 8) {
    throw Error(ErrorKind::kParameter,
                "payload of " + client_id + " declares more bits than its data holds");
  }
}

EmbeddingPlan EmbeddingPlan::for_cover(std::size_t cover_length, std::size_t dimension,
                                       std::vector<std::string> client_order) {
  if (dimension == 0) throw Error(ErrorKind::kParameter, "block dimension must be positive");
  EmbeddingPlan plan;
  plan.dimension = dimension;
  plan.num_blocks = cover_length / dimension;
  plan.client_order = std::move(client_order);
  return plan;
}

std::vector<ClientKey> EmbeddingPlan::bind_keys(std::span<const ClientKey> keys) const {
  if (client_order.size() > dimension) {
    throw Error(ErrorKind::kKey, "plan has more clients than block dimension");
  }
  std::vector<ClientKey> ordered;
  ordered.reserve(client_order.size());
  for (const std::string& id : client_order) {
    auto it = std::find_if(keys.begin(), keys.end(),
                           [&](const ClientKey& k) { return k.client_id == id; });
    if (it == keys.end()) throw Error(ErrorKind::kKey, "missing key for client " + id);
    ordered.push_back(*it);
  }
  if (keys.size() != client_order.size()) {
    throw Error(ErrorKind::kKey, "key set does not match the plan's clients");
  }
  prepare(ordered, dimension);
  return ordered;
}

double proj_coeff(std::span<const double> s, std::span<const double> u) {
  const double n = norm(u);
  if (n == 0.0) throw Error(ErrorKind::kParameter, "projection onto a zero vector");
  return dot(s, u) / n;
}

std::vector<double> embed_block(std::span<const double> s,
                                std::span<const Message> messages,
                                std::span<const ClientKey> keys) {
  if (messages.size() != keys.size()) {
    throw Error(ErrorKind::kParameter, "one message per key is required");
  }
  const auto dirs = prepare(keys, s.size());
  std::vector<double> y(s.size());
  embed_into(s, y, messages, dirs);
  return y;
}

Message extract_block(std::span<const double> y, const ClientKey& key) {
  if (!key.has_active_vector()) {
    throw Error(ErrorKind::kKey, "client " + key.client_id + " has no active key vector");
  }
  return extract_dc(proj_coeff(y, key.active_vector), key.dc);
}

std::vector<double> recover_block(std::span<const double> y,
                                  std::span<const ClientKey> keys) {
  if (keys.empty()) throw Error(ErrorKind::kKey, "recovery needs the embedding keys");
  const auto dirs = prepare(keys, y.size());
  std::vector<double> s(y.size());
  recover_into(y, s, dirs);
  return s;
}

std::vector<double> embed_payloads(std::span<const double> cover,
                                   const EmbeddingPlan& plan,
                                   std::span<const Payload> payloads,
                                   std::span<const ClientKey> keys) {
  const std::size_t r = plan.dimension;
  if (cover.size() < plan.covered_length()) {
    throw Error(ErrorKind::kLengthMismatch, "cover shorter than the plan's blocks");
  }
  const auto ordered = plan.bind_keys(keys);
  const auto dirs = prepare(ordered, r);

  // Align payloads with client order; absent clients embed padding zeros.
  std::vector<const Payload*> by_client(ordered.size(), nullptr);
  for (const Payload& p : payloads) {
    p.validate();
    auto it = std::find(plan.client_order.begin(), plan.client_order.end(), p.client_id);
    if (it == plan.client_order.end()) {
      throw Error(ErrorKind::kKey, "payload for unknown client " + p.client_id);
    }
    const auto idx = static_cast<std::size_t>(it - plan.client_order.begin());
    if (by_client[idx] != nullptr) {
      throw Error(ErrorKind::kParameter, "two payloads for client " + p.client_id);
    }
    if (p.bit_length > plan.capacity_bits()) {
      throw CapacityError(p.bit_length, plan.capacity_bits());
    }
    by_client[idx] = &p;
  }

  std::vector<double> out(cover.begin(), cover.end());
  std::vector<Message> messages(ordered.size());
  for (std::size_t b = 0; b < plan.num_blocks; ++b) {
    for (std::size_t i = 0; i < ordered.size(); ++i) {
      const Payload* p = by_client[i];
      messages[i] = Message{p != nullptr && b < p->bit_length && p->bit(b) ? 1u : 0u};
    }
    embed_into(cover.subspan(b * r, r), std::span<double>(out).subspan(b * r, r),
               messages, dirs);
  }
  return out;
}

std::vector<std::uint8_t> extract_payload(std::span<const double> watermarked,
                                          const EmbeddingPlan& plan,
                                          const ClientKey& key,
                                          std::size_t bit_length) {
  if (bit_length > plan.capacity_bits()) throw CapacityError(bit_length, plan.capacity_bits());
  if (watermarked.size() < plan.covered_length()) {
    throw Error(ErrorKind::kLengthMismatch, "watermarked sequence shorter than the plan");
  }
  const ClientKey one[] = {key};
  const auto dirs = prepare(one, plan.dimension);
  std::vector<std::uint8_t> out((bit_length + 7) / 8, 0);
  const std::size_t r = plan.dimension;
  for (std::size_t b = 0; b < bit_length; ++b) {
    const double l = unit_coeff(watermarked.subspan(b * r, r), dirs[0].unit);
    // Any nonzero message decodes as bit 1.
    if (extract_dc(l, dirs[0].dc).value != 0) {
      out[b / 8] |= static_cast<std::uint8_t>(0x80u >> (b % 8));
    }
  }
  return out;
}

std::vector<double> recover_sequence(std::span<const double> watermarked,
                                     const EmbeddingPlan& plan,
                                     std::span<const ClientKey> keys) {
  if (watermarked.size() < plan.covered_length()) {
    throw Error(ErrorKind::kLengthMismatch, "watermarked sequence shorter than the plan");
  }
  const auto ordered = plan.bind_keys(keys);
  const auto dirs = prepare(ordered, plan.dimension);
  const std::size_t r = plan.dimension;
  std::vector<double> out(watermarked.begin(), watermarked.end());
  for (std::size_t b = 0; b < plan.num_blocks; ++b) {
    recover_into(watermarked.subspan(b * r, r), std::span<double>(out).subspan(b * r, r),
                 dirs);
  }
  return out;
}

}  // namespace fedreverse
