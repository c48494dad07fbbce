#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "fedreverse/keygen.hpp"
#include "fedreverse/lattice_dc.hpp"

namespace fedreverse::testing {

/// Unique scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::uint64_t counter = 0;
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("fedreverse-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::vector<double> gaussian_cover(std::size_t n, double sigma, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, sigma);
  std::vector<double> out(n);
  for (double& x : out) x = dist(rng);
  return out;
}

inline std::vector<double> uniform_cover(std::size_t n, double lo, double hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> out(n);
  for (double& x : out) x = dist(rng);
  return out;
}

inline std::vector<std::uint8_t> random_bytes(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::uint8_t> out(n);
  for (auto& b : out) b = static_cast<std::uint8_t>(rng());
  return out;
}

/// Random orthonormal family of `n` vectors in R^r via classical
/// Gram-Schmidt on Gaussian draws (independent of the library's keygen).
inline std::vector<Vector> random_orthogonal_family(std::size_t r, std::size_t n,
                                                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  std::vector<Vector> out;
  while (out.size() < n) {
    Vector v(r);
    for (double& x : v) x = dist(rng);
    for (int pass = 0; pass < 2; ++pass) {
      for (const Vector& u : out) {
        double d = 0.0;
        for (std::size_t i = 0; i < r; ++i) d += v[i] * u[i];
        for (std::size_t i = 0; i < r; ++i) v[i] -= d * u[i];
      }
    }
    double nn = 0.0;
    for (double x : v) nn += x * x;
    nn = std::sqrt(nn);
    if (nn < 1e-6) continue;
    for (double& x : v) x /= nn;
    out.push_back(std::move(v));
  }
  return out;
}

inline std::vector<ClientKey> keys_from_vectors(const std::vector<Vector>& vectors,
                                                const DcParams& dc) {
  std::vector<ClientKey> keys;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    ClientKey k;
    k.client_id = default_client_id(i);
    k.partial_vectors = {vectors[i]};
    k.active_vector = vectors[i];
    k.dc = dc;
    keys.push_back(std::move(k));
  }
  return keys;
}

namespace oracle {

/// Nearest point of coset m by exhaustive search over k in [k0-3, k0+3].
inline double brute_force_coset(double l, std::uint32_t m, double delta, double dither, int bits) {
  const double offset = dither + m * delta / std::ldexp(1.0, bits);
  const double k0 = std::floor((l - offset) / delta);
  double best = std::numeric_limits<double>::quiet_NaN();
  double best_dist = std::numeric_limits<double>::infinity();
  for (int dk = -3; dk <= 3; ++dk) {
    const double point = (k0 + dk) * delta + offset;
    const double dist = std::abs(l - point);
    if (dist < best_dist) {
      best = point;
      best_dist = dist;
    }
  }
  return best;
}

/// Nearest coset index by exhaustive comparison.
inline std::uint32_t brute_force_extract(double ly, double delta, double dither, int bits) {
  std::uint32_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::uint32_t m = 0; m < (1u << bits); ++m) {
    const double d = std::abs(ly - brute_force_coset(ly, m, delta, dither, bits));
    if (d < best_dist) {
      best = m;
      best_dist = d;
    }
  }
  return best;
}

}  // namespace oracle

}  // namespace fedreverse::testing
