#include "fedreverse/metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <nlohmann/json.hpp>
#include <sstream>

#include "fedreverse/error.hpp"
#include "fedreverse/multiparty.hpp"
#include "test_support.hpp"

namespace fedreverse {
namespace {

using testing::keys_from_vectors;
using testing::random_orthogonal_family;

ClientKey key_with(double delta, double alpha) {
  return keys_from_vectors({{1, 0}}, DcParams{delta, alpha, 1, 0.0})[0];
}

TEST(EmpiricalMse, Basics) {
  const Vector a = {1, 2, 3};
  EXPECT_EQ(empirical_mse(a, a), 0.0);
  EXPECT_NEAR(empirical_mse(Vector{0, 0}, Vector{0.1, -0.1}), 0.01, 1e-17);
  EXPECT_THROW(empirical_mse(Vector{0}, Vector{0, 1}), Error);
  EXPECT_THROW(empirical_mse(Vector{}, Vector{}), Error);
}

TEST(EmpiricalMse, MonteCarloMatchesTheoryForOneClient) {
  // r = 10, n = 1: per-element MSE is alpha^2 delta^2 / (12 r) = 6.75e-5.
  const std::size_t r = 10;
  const auto keys = keys_from_vectors(random_orthogonal_family(r, 1, 5), DcParams{0.1, 0.9, 1, 0.0});
  const auto cover = testing::uniform_cover(1000000, -1.0, 1.0, 6);
  const auto plan = EmbeddingPlan::for_cover(cover.size(), r, {"client1"});
  const auto y = embed_payloads(cover, plan, {}, keys);
  EXPECT_NEAR(theoretical_mse_per_element(keys, r), 6.75e-5, 1e-18);
  EXPECT_NEAR(empirical_mse(cover, y), 6.75e-5, 0.02 * 6.75e-5);
}

TEST(TheoreticalMseFed, Additivity) {
  const std::vector<ClientKey> one = {key_with(0.1, 0.9)};
  EXPECT_NEAR(theoretical_mse_fed(one), 6.75e-4, 1e-18);
  const std::vector<ClientKey> two = {key_with(0.1, 0.9), key_with(0.1, 0.9)};
  EXPECT_EQ(theoretical_mse_fed(two), 2 * theoretical_mse_fed(one));
  const std::vector<ClientKey> low = {key_with(0.1, 0.5)};
  EXPECT_NEAR(theoretical_mse_fed(low), 0.25 * 0.01 / 12, 1e-18);
  EXPECT_THROW(theoretical_mse_fed({}), Error);
}

TEST(EmpiricalSwr, Definition) {
  const auto s = testing::gaussian_cover(1000, 1.0, 1);
  std::vector<double> w = testing::gaussian_cover(1000, 1.0, 2);
  // Scale the watermark so Var(s) = 100 Var(w) exactly.
  double ms = 0, mw = 0;
  for (std::size_t i = 0; i < s.size(); ++i) ms += s[i], mw += w[i];
  ms /= s.size(), mw /= w.size();
  double vs = 0, vw = 0;
  for (std::size_t i = 0; i < s.size(); ++i) vs += (s[i] - ms) * (s[i] - ms), vw += (w[i] - mw) * (w[i] - mw);
  const double k = std::sqrt(vs / vw / 100.0);
  std::vector<double> y(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) y[i] = s[i] + k * w[i];
  EXPECT_NEAR(empirical_swr(s, y), 20.0, 1e-9);

  std::vector<double> doubled(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) doubled[i] = 2 * s[i];
  EXPECT_NEAR(empirical_swr(s, doubled), 0.0, 1e-9);

  try {
    empirical_swr(s, s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kUndefined);
  }
}

TEST(SwrDiagnostic, FormulaAndScaleFreedom) {
  ClientKey k = keys_from_vectors({{1, 1}}, DcParams{0.1, 0.9, 1, 0.0})[0];
  const std::vector<double> beta = {0.03};
  const std::vector<ClientKey> keys = {k};
  // (sum u)^2 / |u|^2 = 4 / 2 = 2.
  const double expected = -20.0 * std::log10(0.9 * 0.03 * 2.0 / 4.0);
  EXPECT_NEAR(swr_theorem_diagnostic(keys, beta, 2), expected, 1e-12);
  k.active_vector = {7.5, 7.5};
  const std::vector<ClientKey> scaled = {k};
  EXPECT_NEAR(swr_theorem_diagnostic(scaled, beta, 2), expected, 1e-12);
  const std::vector<double> zero = {0.0};
  EXPECT_THROW(swr_theorem_diagnostic(keys, zero, 2), Error);
  const std::vector<double> too_big = {0.05};
  EXPECT_THROW(swr_theorem_diagnostic(keys, too_big, 2), Error);
}

TEST(BitErrorRate, Basics) {
  const std::vector<std::uint8_t> a = {0xA5};
  EXPECT_EQ(bit_error_rate(a, a, 8), 0.0);
  EXPECT_EQ(bit_error_rate(a, std::vector<std::uint8_t>{0x5A}, 8), 1.0);
  EXPECT_EQ(bit_error_rate(a, std::vector<std::uint8_t>{0xA4}, 8), 0.125);
  // Only the first 4 bits count.
  EXPECT_EQ(bit_error_rate(a, std::vector<std::uint8_t>{0xAF}, 4), 0.0);
  EXPECT_THROW(bit_error_rate(a, std::vector<std::uint8_t>{0xA5, 0}, 8), Error);
}

TEST(Attack, ZeroMagnitudeIsIdentity) {
  const auto w = testing::gaussian_cover(100, 0.05, 3);
  for (const char* kind : {"gaussian", "uniform", "prune_smallest", "prune_random"}) {
    EXPECT_EQ(apply_attack(w, AttackSpec{parse_attack_kind(kind), 0.0, 9}), w) << kind;
  }
}

TEST(Attack, FullPruneZeroesEverything) {
  const auto w = testing::gaussian_cover(100, 0.05, 3);
  for (auto kind : {AttackKind::kPruneSmallest, AttackKind::kPruneRandom}) {
    const auto out = apply_attack(w, AttackSpec{kind, 1.0, 1});
    for (double x : out) EXPECT_EQ(x, 0.0);
  }
}

TEST(Attack, PruneSmallestPicksSmallestMagnitudesWithIndexTies) {
  const Vector w = {0.5, -0.1, 0.1, 2.0, -0.3};
  const auto out = apply_attack(w, AttackSpec{AttackKind::kPruneSmallest, 0.4, 0});
  EXPECT_EQ(out, (Vector{0.5, 0.0, 0.0, 2.0, -0.3}));
  const auto one = apply_attack(w, AttackSpec{AttackKind::kPruneSmallest, 0.2, 0});
  EXPECT_EQ(one, (Vector{0.5, 0.0, 0.1, 2.0, -0.3}));
}

TEST(Attack, PruneRandomZeroesExactCount) {
  const auto w = testing::uniform_cover(1000, 1.0, 2.0, 4);
  const auto out = apply_attack(w, AttackSpec{AttackKind::kPruneRandom, 0.25, 17});
  EXPECT_EQ(std::count(out.begin(), out.end(), 0.0), 250);
}

TEST(Attack, DeterministicAndSeedSensitive) {
  const auto w = testing::gaussian_cover(1000, 0.05, 3);
  const AttackSpec spec{AttackKind::kGaussian, 0.01, 42};
  EXPECT_EQ(apply_attack(w, spec), apply_attack(w, spec));
  EXPECT_NE(apply_attack(w, spec), apply_attack(w, AttackSpec{AttackKind::kGaussian, 0.01, 43}));
}

TEST(Attack, NoiseStatistics) {
  const Vector w(200000, 0.0);
  const auto g = apply_attack(w, AttackSpec{AttackKind::kGaussian, 0.5, 7});
  const auto u = apply_attack(w, AttackSpec{AttackKind::kUniform, 0.5, 7});
  double mg = 0, vg = 0, vu = 0, maxu = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    mg += g[i];
    vg += g[i] * g[i];
    vu += u[i] * u[i];
    maxu = std::max(maxu, std::abs(u[i]));
  }
  mg /= w.size(), vg /= w.size(), vu /= w.size();
  EXPECT_NEAR(mg, 0.0, 0.01);
  EXPECT_NEAR(vg, 0.25, 0.01 * 0.25 * 2);
  EXPECT_NEAR(vu, 0.25 / 3, 0.02 * 0.25 / 3);
  EXPECT_LE(maxu, 0.5);
}

TEST(Attack, InvalidSpecs) {
  EXPECT_THROW(apply_attack(Vector{1}, AttackSpec{AttackKind::kGaussian, -1, 0}), Error);
  EXPECT_THROW(apply_attack(Vector{1}, AttackSpec{AttackKind::kPruneRandom, 1.5, 0}), Error);
  EXPECT_THROW(parse_attack_kind("laser"), Error);
}

TEST(Attack, ChaChaStreamIsPinned) {
  // Known-answer check for the original ChaCha20 construction:
  // all-zero key and nonce, block 0 starts 76 b8 e0 ad a0 f1 3d 90.
  ChaChaStream s(ChaChaStream::Key{});
  EXPECT_EQ(s.next_u64(), 0x903df1a0ade0b876ull);
}

TEST(Reports, CsvAndJson) {
  MetricsRow row{2, 8, 0.1, 0.9, 1e-4, 1.1e-4, 15.5, std::nullopt};
  const MetricsRow rows[] = {row};
  std::ostringstream os;
  write_metrics_csv(os, rows);
  EXPECT_EQ(os.str(),
            "n,r,delta,alpha,mse_emp,mse_theory,swr_db,ber\n"
            "2,8,0.10000000000000001,0.90000000000000002,0.0001,0.00011,15.5,\n");
  const auto j = nlohmann::json::parse(metrics_json(rows));
  EXPECT_EQ(j[0]["n"], 2);
  EXPECT_TRUE(j[0]["ber"].is_null());
}

TEST(Reports, DistortionReportUsesPerElementTheory) {
  const std::size_t r = 4;
  const auto keys = keys_from_vectors(random_orthogonal_family(r, 2, 8), DcParams{0.2, 0.75, 1, 0.0});
  const auto cover = testing::uniform_cover(r * 50000, -1, 1, 9);
  const auto plan = EmbeddingPlan::for_cover(cover.size(), r, {"client1", "client2"});
  const auto y = embed_payloads(cover, plan, {}, keys);
  const auto rep = distortion_report(cover, y, keys, r);
  EXPECT_EQ(rep.sample_count, cover.size());
  EXPECT_NEAR(rep.theoretical_mse, 2 * 0.75 * 0.75 * 0.04 / 12 / 4, 1e-18);
  EXPECT_NEAR(rep.empirical_mse, rep.theoretical_mse, 0.05 * rep.theoretical_mse);
  EXPECT_GT(rep.empirical_swr_db, 0.0);
}

}  // namespace
}  // namespace fedreverse
