#include "fedreverse/metrics.hpp"

#include <cmath>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <sstream>

#include "fedreverse/error.hpp"

namespace fedreverse {

namespace {

void require_same_length(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::kLengthMismatch,
                "sequence lengths differ: " + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()));
  }
  if (a.empty()) throw Error(ErrorKind::kLengthMismatch, "empty sequences");
}

double population_variance(std::span<const double> x) {
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  double acc = 0.0;
  for (double v : x) acc += (v - mean) * (v - mean);
  return acc / static_cast<double>(x.size());
}

}  // namespace

double empirical_mse(std::span<const double> original, std::span<const double> watermarked) {
  require_same_length(original, watermarked);
  double acc = 0.0;
  for (std::size_t i = 0; i < original.size(); ++i) {
    const double d = watermarked[i] - original[i];
    acc += d * d;
  }
  return acc / static_cast<double>(original.size());
}

double theoretical_mse_fed(std::span<const ClientKey> keys) {
  if (keys.empty()) throw Error(ErrorKind::kParameter, "no keys");
  double total = 0.0;
  for (const ClientKey& k : keys) total += theoretical_mse_dc(k.dc);
  return total;
}

double theoretical_mse_per_element(std::span<const ClientKey> keys, std::size_t r) {
  if (r == 0) throw Error(ErrorKind::kParameter, "block dimension must be positive");
  return theoretical_mse_fed(keys) / static_cast<double>(r);
}

double empirical_swr(std::span<const double> original, std::span<const double> watermarked) {
  require_same_length(original, watermarked);
  std::vector<double> w(original.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = watermarked[i] - original[i];
  const double var_w = population_variance(w);
  if (!(var_w > 0.0)) {
    throw Error(ErrorKind::kUndefined, "SWR undefined: watermark variance is zero");
  }
  const double var_s = population_variance(original);
  if (!(var_s > 0.0)) {
    throw Error(ErrorKind::kUndefined, "SWR undefined: signal variance is zero");
  }
  return 10.0 * std::log10(var_s / var_w);
}

double swr_theorem_diagnostic(std::span<const ClientKey> keys, std::span<const double> betas,
                              std::size_t r) {
  if (keys.empty() || keys.size() != betas.size()) {
    throw Error(ErrorKind::kParameter, "one beta per key is required");
  }
  if (r == 0) throw Error(ErrorKind::kParameter, "dimension must be positive");
  double aggregate = 0.0;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const Vector& u = keys[i].active_vector;
    if (!keys[i].has_active_vector()) {
      throw Error(ErrorKind::kKey, "client " + keys[i].client_id + " has no active vector");
    }
    if (betas[i] < 0.0 || betas[i] >= keys[i].dc.delta / 2.0) {
      throw Error(ErrorKind::kParameter, "beta must lie in [0, delta/2)");
    }
    double sum = 0.0;
    for (double x : u) sum += x;
    const double rr = static_cast<double>(r);
    aggregate += keys[i].dc.alpha * betas[i] * sum * sum / (rr * rr * dot(u, u));
  }
  if (!(aggregate > 0.0)) {
    throw Error(ErrorKind::kUndefined, "SWR diagnostic undefined: non-positive aggregate");
  }
  return -20.0 * std::log10(aggregate);
}

DistortionReport distortion_report(std::span<const double> original,
                                   std::span<const double> watermarked,
                                   std::span<const ClientKey> keys, std::size_t r) {
  DistortionReport rep;
  rep.empirical_mse = empirical_mse(original, watermarked);
  rep.theoretical_mse = theoretical_mse_per_element(keys, r);
  rep.empirical_swr_db = empirical_swr(original, watermarked);
  rep.sample_count = original.size();
  return rep;
}

double bit_error_rate(std::span<const std::uint8_t> expected,
                      std::span<const std::uint8_t> actual, std::size_t bit_length) {
  const std::size_t bytes = (bit_length + 7) / 8;
  if (expected.size() != bytes || actual.size() != bytes) {
    throw Error(ErrorKind::kLengthMismatch,
                "bit strings do not both hold exactly " + std::to_string(bit_length) + " bits");
  }
  if (bit_length == 0) return 0.0;
  std::size_t errors = 0;
  for (std::size_t i = 0; i < bit_length; ++i) {
    const unsigned mask = 0x80u >> (i % 8);
    errors += ((expected[i / 8] ^ actual[i / 8]) & mask) != 0;
  }
  return static_cast<double>(errors) / static_cast<double>(bit_length);
}

void write_metrics_csv(std::ostream& os, std::span<const MetricsRow> rows) {
  os << "n,r,delta,alpha,mse_emp,mse_theory,swr_db,ber\n";
  std::ostringstream line;
  line << std::setprecision(17);
  for (const MetricsRow& row : rows) {
    line.str("");
    line << row.n << ',' << row.r << ',' << row.delta << ',' << row.alpha << ','
         << row.mse_emp << ',' << row.mse_theory << ',';
    if (row.swr_db) line << *row.swr_db;
    line << ',';
    if (row.ber) line << *row.ber;
    os << line.str() << '\n';
  }
}

std::string metrics_json(std::span<const MetricsRow> rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const MetricsRow& row : rows) {
    out.push_back({{"n", row.n},
                   {"r", row.r},
                   {"delta", row.delta},
                   {"alpha", row.alpha},
                   {"mse_emp", row.mse_emp},
                   {"mse_theory", row.mse_theory},
                   {"swr_db", row.swr_db ? nlohmann::json(*row.swr_db) : nlohmann::json()},
                   {"ber", row.ber ? nlohmann::json(*row.ber) : nlohmann::json()}});
  }
  return out.dump(2) + "\n";
}

}  // namespace fedreverse
