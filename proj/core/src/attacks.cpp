#include <algorithm>
#include <cmath>
#include <numeric>

#include "fedreverse/crypto.hpp"
#include "fedreverse/error.hpp"
#include "fedreverse/metrics.hpp"

namespace fedreverse {

AttackKind parse_attack_kind(std::string_view name) {
  if (name == "gaussian") return AttackKind::kGaussian;
  if (name == "uniform") return AttackKind::kUniform;
  if (name == "prune_smallest") return AttackKind::kPruneSmallest;
  if (name == "prune_random") return AttackKind::kPruneRandom;
  throw Error(ErrorKind::kParameter, "unknown attack kind '" + std::string(name) + "'");
}

std::string_view to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::kGaussian: return "gaussian";
    case AttackKind::kUniform: return "uniform";
    case AttackKind::kPruneSmallest: return "prune_smallest";
    case AttackKind::kPruneRandom: return "prune_random";
  }
  return "unknown";
}

void AttackSpec::validate() const {
  if (!(magnitude >= 0.0) || !std::isfinite(magnitude)) {
    throw Error(ErrorKind::kParameter, "attack magnitude must be finite and >= 0");
  }
  const bool pruning = kind == AttackKind::kPruneSmallest || kind == AttackKind::kPruneRandom;
  if (pruning && magnitude > 1.0) {
    throw Error(ErrorKind::kParameter, "pruning fraction must be <= 1");
  }
}

std::vector<double> apply_attack(std::span<const double> watermarked, const AttackSpec& spec) {
  ChaChaStream stream = ChaChaStream::from_seed(spec.seed);
  return apply_attack(watermarked, spec, stream);
}

std::vector<double> apply_attack(std::span<const double> watermarked, const AttackSpec& spec,
                                 ChaChaStream& stream) {
  spec.validate();
  std::vector<double> out(watermarked.begin(), watermarked.end());
  if (spec.magnitude == 0.0) return out;

  const std::size_t n = out.size();
  const auto pruned = static_cast<std::size_t>(std::floor(spec.magnitude * static_cast<double>(n)));
  switch (spec.kind) {
    case AttackKind::kGaussian:
      for (double& w : out) w += spec.magnitude * stream.next_gaussian();
      break;
    case AttackKind::kUniform:
      for (double& w : out) w += spec.magnitude * (2.0 * stream.next_unit() - 1.0);
      break;
    case AttackKind::kPruneSmallest: {
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::abs(out[a]) < std::abs(out[b]);
      });
      for (std::size_t i = 0; i < pruned; ++i) out[order[i]] = 0.0;
      break;
    }
    case AttackKind::kPruneRandom:
      for (std::size_t idx : shuffled_prefix(stream, n, pruned)) out[idx] = 0.0;
      break;
  }
  return out;
}

}  // namespace fedreverse
