#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "fedreverse/crypto.hpp"
#include "fedreverse/keygen.hpp"

namespace fedreverse {

struct DistortionReport {
  double empirical_mse = 0.0;    // per element
  double theoretical_mse = 0.0;  // per element: sum_i alpha_i^2 delta_i^2 / (12 r)
  double empirical_swr_db = 0.0;
  std::size_t sample_count = 0;
};

/// Mean of squared elementwise differences.
double empirical_mse(std::span<const double> original, std::span<const double> watermarked);

/// Expected squared distortion of one block: sum_i alpha_i^2 delta_i^2 / 12.
/// Each client contracts a single direction, so the per-element MSE of an
/// r-element block is this value divided by r.
double theoretical_mse_fed(std::span<const ClientKey> keys);

/// theoretical_mse_fed(keys) / r.
double theoretical_mse_per_element(std::span<const ClientKey> keys, std::size_t r);

/// 10 log10(Var(s) / Var(y - s)), population variances, in dB.
/// Throws Error(kUndefined) when the watermark has zero variance.
double empirical_swr(std::span<const double> original, std::span<const double> watermarked);

/// Closed-form SWR in dB for measured per-client residual magnitudes beta_i:
///   -20 log10( sum_i alpha_i beta_i (sum_j u_ij)^2 / (r^2 |u_i|^2) ).
/// Diagnostic only; beta is data dependent.
double swr_theorem_diagnostic(std::span<const ClientKey> keys, std::span<const double> betas,
                              std::size_t r);

DistortionReport distortion_report(std::span<const double> original,
                                   std::span<const double> watermarked,
                                   std::span<const ClientKey> keys, std::size_t r);

/// Fraction of the first `bit_length` bits (MSB-first) that differ.
double bit_error_rate(std::span<const std::uint8_t> expected,
                      std::span<const std::uint8_t> actual, std::size_t bit_length);

/// One line of a sweep report.
struct MetricsRow {
  std::size_t n = 0;
  std::size_t r = 0;
  double delta = 0.0;
  double alpha = 0.0;
  double mse_emp = 0.0;
  double mse_theory = 0.0;
  std::optional<double> swr_db;
  std::optional<double> ber;
};

/// CSV with header "n,r,delta,alpha,mse_emp,mse_theory,swr_db,ber"; missing
/// optional values are written as empty fields.
void write_metrics_csv(std::ostream& os, std::span<const MetricsRow> rows);
std::string metrics_json(std::span<const MetricsRow> rows);

enum class AttackKind { kGaussian, kUniform, kPruneSmallest, kPruneRandom };

AttackKind parse_attack_kind(std::string_view name);
std::string_view to_string(AttackKind kind);

struct AttackSpec {
  AttackKind kind = AttackKind::kGaussian;
  double magnitude = 0.0;  // sigma, half-width, or pruned fraction
  std::uint64_t seed = 0;

  void validate() const;
};

/// Deterministic given `spec`. Additive kinds draw from a ChaCha20 stream
/// keyed by the seed; prune_smallest zeroes the floor(f N) smallest
/// magnitudes (ties by index); prune_random zeroes a seeded uniform sample.
std::vector<double> apply_attack(std::span<const double> watermarked, const AttackSpec& spec);

/// Same as apply_attack but continues an existing stream, so several tensors
/// can be attacked by one seeded run.
std::vector<double> apply_attack(std::span<const double> watermarked, const AttackSpec& spec,
                                 ChaChaStream& stream);

}  // namespace fedreverse
