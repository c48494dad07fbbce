#pragma once

#include <cstdint>

namespace fedreverse {

/// Scalar dithered-coset geometry for one client.
///
/// The coarse lattice has spacing `delta`; message m selects the coset
///   { k*delta + dither + m*delta/2^bits : k in Z }.
/// With bits = 1 the two cosets interleave at delta/2, so the decision cell
/// around each coset point has half-width delta/4.
///
/// Admissible when delta > 0, 0 <= dither < delta, 1 <= bits <= kMaxBits and
/// 1 - 1/2^bits <= alpha < 1.
struct DcParams {
  static constexpr int kMaxBits = 16;

  double delta = 1.0;
  double alpha = 0.75;
  int bits = 1;
  double dither = 0.0;

  /// Throws Error(kParameter) describing the first violated constraint.
  void validate() const;
  bool valid() const noexcept;

  std::uint32_t message_count() const noexcept { return 1u << bits; }
  double coset_step() const noexcept { return delta / message_count(); }

  /// Zero noise margin: alpha sits on the lower admissible boundary.
  bool on_margin_boundary() const noexcept;

  /// Same geometry with the dither moved by `shift`, wrapped into [0, delta).
  DcParams with_shifted_dither(double shift) const;

  friend bool operator==(const DcParams&, const DcParams&) = default;
};

/// A per-coefficient message value in [0, 2^bits).
struct Message {
  std::uint32_t value = 0;

  friend bool operator==(Message, Message) = default;
};

/// Nearest point to `l` in the coset selected by `m` (ties: half-to-even on k).
double quantize_coset(double l, Message m, const DcParams& p);

/// Q + (1 - alpha) * (l - Q), Q = quantize_coset(l, m, p).
double embed_dc(double l, Message m, const DcParams& p);

/// Index of the nearest coset; ties resolve to the smallest m.
Message extract_dc(double ly, const DcParams& p);

/// Inverse of embed_dc for an undisturbed coefficient.
double recover_dc(double ly, const DcParams& p);

/// Expected squared embedding distortion per coefficient: alpha^2 delta^2 / 12.
double theoretical_mse_dc(const DcParams& p);

/// Largest additive perturbation that never flips the extracted bit:
/// (2 alpha - 1) delta / 4. Defined only for bits = 1 (kUnsupported otherwise).
double noise_margin(const DcParams& p);

}  // namespace fedreverse
