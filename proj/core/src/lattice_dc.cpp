#include "fedreverse/lattice_dc.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "fedreverse/error.hpp"

namespace fedreverse {

namespace {

std::string describe(const DcParams& p) {
  std::ostringstream os;
  os.precision(17);
  os << "(delta=" << p.delta << ", alpha=" << p.alpha << ", bits=" << p.bits
     << ", dither=" << p.dither << ")";
  return os.str();
}

const char* violation(const DcParams& p) {
  if (!(p.delta > 0.0) || !std::isfinite(p.delta)) return "delta must be positive";
  if (p.bits < 1 || p.bits > DcParams::kMaxBits) return "bits out of range [1, 16]";
  if (!(p.alpha < 1.0)) return "alpha must be below 1";
  if (!(1.0 - p.alpha <= 1.0 / static_cast<double>(1u << p.bits))) {
    return "alpha violates 1 - alpha <= 1/2^bits";
  }
  if (!(p.dither >= 0.0 && p.dither < p.delta)) return "dither outside [0, delta)";
  return nullptr;
}

void check(const DcParams& p) {
  if (const char* why = violation(p)) {
    throw Error(ErrorKind::kParameter,
                std::string("invalid DcParams ") + describe(p) + ": " + why);
  }
}

double coset_point(double l, std::uint32_t m, const DcParams& p) {
  const double offset = p.dither + m * p.coset_step();
  // nearbyint honours the default round-to-nearest-even mode.
  const double k = std::nearbyint((l - offset) / p.delta);
  return k * p.delta + offset;
}

Message nearest_coset(double ly, const DcParams& p) {
  std::uint32_t best = 0;
  double best_dist = std::abs(ly - coset_point(ly, 0, p));
  for (std::uint32_t m = 1; m < p.message_count(); ++m) {
    const double dist = std::abs(ly - coset_point(ly, m, p));
    if (dist < best_dist) {
      best = m;
      best_dist = dist;
    }
  }
  return Message{best};
}

}  // namespace

void DcParams::validate() const { check(*this); }

bool DcParams::valid() const noexcept { return violation(*this) == nullptr; }

bool DcParams::on_margin_boundary() const noexcept {
  return 1.0 - alpha == 1.0 / static_cast<double>(message_count());
}

DcParams DcParams::with_shifted_dither(double shift) const {
  DcParams out = *this;
  double d = std::fmod(dither + shift, delta);
  if (d < 0.0) d += delta;
  if (d >= delta) d = 0.0;
  out.dither = d;
  return out;
}

double quantize_coset(double l, Message m, const DcParams& p) {
  check(p);
  if (m.value >= p.message_count()) {
    throw Error(ErrorKind::kParameter,
                "message " + std::to_string(m.value) + " does not fit in " +
                    std::to_string(p.bits) + " bits");
  }
  return coset_point(l, m.value, p);
}

double embed_dc(double l, Message m, const DcParams& p) {
  const double q = quantize_coset(l, m, p);
  return q + (1.0 - p.alpha) * (l - q);
}

Message extract_dc(double ly, const DcParams& p) {
  check(p);
  return nearest_coset(ly, p);
}

double recover_dc(double ly, const DcParams& p) {
  check(p);
  const Message m = nearest_coset(ly, p);
  const double q = coset_point(ly, m.value, p);
  // Algebraically (ly - alpha q) / (1 - alpha); the residual form avoids
  // cancellation between two large terms.
  return q + (ly - q) / (1.0 - p.alpha);
}

double theoretical_mse_dc(const DcParams& p) {
  check(p);
  return p.alpha * p.alpha * p.delta * p.delta / 12.0;
}

double noise_margin(const DcParams& p) {
  check(p);
  if (p.bits != 1) {
    throw Error(ErrorKind::kUnsupported,
                "noise margin is only defined for the two-coset case (bits = 1)");
  }
  return (2.0 * p.alpha - 1.0) * p.delta / 4.0;
}

}  // namespace fedreverse
