#include "fedreverse/keygen.hpp"

#include <gtest/gtest.h>

#include <random>
#include <string>

#include "fedreverse/error.hpp"
#include "fedreverse/key_file.hpp"
#include "test_support.hpp"

namespace fedreverse {
namespace {

constexpr double kScale = 32768.0 / 4.0;

KeygenConfig worked_example() {
  KeygenConfig cfg;
  cfg.bits_per_entry = 2;
  cfg.dimension = 3;
  cfg.entry_range = 32768;
  cfg.key_int = 136777;
  cfg.client_quotas = {1, 2};
  return cfg;
}

/// Independent walker: renders key_int as a '0'/'1' string and slices it.
std::vector<Vector> walk_bits(const BigUint& key, int b, std::size_t r, std::uint64_t q) {
  std::string bits;
  BigUint v = key;
  while (v != 0) {
    bits.insert(bits.begin(), (v & 1) != 0 ? '1' : '0');
    v >>= 1;
  }
  bits.insert(bits.begin(), b * r * r - bits.size(), '0');
  std::vector<Vector> cols(r, Vector(r));
  std::size_t pos = 0;
  for (std::size_t j = 0; j < r; ++j) {
    for (std::size_t e = 0; e < r; ++e) {
      cols[j][e] = static_cast<double>(std::stoul(bits.substr(pos, b), nullptr, 2)) *
                   static_cast<double>(q >> b);
      pos += b;
    }
  }
  return cols;
}

void expect_vector_near(const Vector& got, const Vector& want, double rel) {
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    EXPECT_NEAR(got[i], want[i], rel * std::max(1.0, std::abs(want[i]))) << "entry " << i;
  }
}

Vector scaled(std::initializer_list<double> v) {
  Vector out(v);
  for (double& x : out) x *= kScale;
  return out;
}

TEST(MasterKeyInt, BypassReturnsLiteral) {
  const std::vector<std::vector<std::uint8_t>> contrib = {{0, 0, 0, 0, 0, 0x02, 0x16, 0x49}};
  EXPECT_EQ(master_key_int(contrib, 18, true), BigUint(136777));
}

TEST(MasterKeyInt, HashedValuesMatchIndependentSha256) {
  // Frozen from Python hashlib over (be64 length || bytes)*.
  const std::vector<std::vector<std::uint8_t>> a = {{'a'}};
  const std::vector<std::vector<std::uint8_t>> ab = {{'a'}, {'b'}};
  const std::vector<std::vector<std::uint8_t>> ba = {{'b'}, {'a'}};
  EXPECT_EQ(master_key_int(a, 18), BigUint(164394));
  EXPECT_EQ(master_key_int(ab, 18), BigUint(165599));
  EXPECT_EQ(master_key_int(ba, 18), BigUint(173209));
  EXPECT_NE(master_key_int(ab, 18), master_key_int(ba, 18));
  EXPECT_EQ(master_key_int(ab, 256),
            BigUint("0x3c9d591045bc8876f9d0399bbfb05c6a412096e906f73278f98406cd5dca86df"));
  // Past 256 bits: SHA-256(message || be64 counter) blocks follow the first digest.
  EXPECT_EQ(master_key_int(ab, 512),
            BigUint("0x3c9d591045bc8876f9d0399bbfb05c6a412096e906f73278f98406cd5dca86df"
                    "21ed991de22ee6457f37e00950e3b9e81ab76e3dbaa23f3165d8d75b121f0868"));
  EXPECT_EQ(master_key_int(ab, 600),
            BigUint("0xf73278f98406cd5dca86df21ed991de22ee6457f37e00950e3b9e81ab76e3dbaa23f3165d8d75b"
                    "121f086849b408f0b36a124405ecf91c5a478f694b1741c7865e3a32db2c423893a8fb99"));
  EXPECT_LT(master_key_int(a, 18), BigUint(1) << 18);
}

TEST(MasterKeyInt, EmptyListIsAnError) {
  EXPECT_THROW(master_key_int({}, 18), Error);
}

TEST(RandomMatrix, WorkedExample) {
  const KeyMatrix km = random_matrix(worked_example());
  ASSERT_EQ(km.columns.size(), 3u);
  EXPECT_EQ(km.columns[0], scaled({2, 0, 1}));
  EXPECT_EQ(km.columns[1], scaled({1, 2, 1}));
  EXPECT_EQ(km.columns[2], scaled({0, 2, 1}));
}

TEST(RandomMatrix, TinyBitSlicing) {
  KeygenConfig cfg;
  cfg.bits_per_entry = 1;
  cfg.dimension = 2;
  cfg.entry_range = 2;
  cfg.key_int = 0b1001;
  cfg.client_quotas = {2};
  const KeyMatrix km = random_matrix(cfg);
  EXPECT_EQ(km.columns[0], (Vector{1, 0}));
  EXPECT_EQ(km.columns[1], (Vector{0, 1}));
}

TEST(RandomMatrix, MatchesIndependentBitWalker) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    KeygenConfig cfg;
    cfg.bits_per_entry = 1 + static_cast<int>(rng() % 4);
    cfg.dimension = 1 + rng() % 8;
    cfg.entry_range = std::uint64_t{1} << (cfg.bits_per_entry + rng() % 6);
    cfg.client_quotas = {cfg.dimension};
    BigUint key = 0;
    for (std::size_t i = 0; i < cfg.bit_budget(); ++i) key = key << 1 | (rng() & 1);
    cfg.key_int = key;
    const KeyMatrix km = random_matrix(cfg);
    EXPECT_EQ(km.columns, walk_bits(key, cfg.bits_per_entry, cfg.dimension, cfg.entry_range));
  }
}

TEST(RandomMatrix, ZeroKeyGivesZeroMatrix) {
  KeygenConfig cfg = worked_example();
  cfg.key_int = 0;
  const KeyMatrix km = random_matrix(cfg);
  for (const auto& c : km.columns) EXPECT_EQ(c, Vector(3, 0.0));
  EXPECT_THROW(orthogonalize(km), RankDeficiencyError);
}

TEST(RandomMatrix, RejectsOversizedKeyAndBadConfig) {
  KeygenConfig cfg = worked_example();
  cfg.key_int = BigUint(1) << 18;
  EXPECT_THROW(random_matrix(cfg), Error);
  cfg.key_int = (BigUint(1) << 18) - 1;
  EXPECT_NO_THROW(random_matrix(cfg));

  cfg = worked_example();
  cfg.client_quotas = {1, 1};
  EXPECT_THROW(random_matrix(cfg), Error);
  cfg = worked_example();
  cfg.entry_range = 3;
  EXPECT_THROW(random_matrix(cfg), Error);
  cfg.entry_range = 2;  // below 2^B
  EXPECT_THROW(random_matrix(cfg), Error);
}

TEST(Orthogonalize, WorkedExample) {
  const auto v = orthogonalize(random_matrix(worked_example()));
  ASSERT_EQ(v.size(), 3u);
  expect_vector_near(v[0], scaled({2, 0, 1}), 1e-12);
  expect_vector_near(v[1], scaled({-1.0 / 5, 2, 2.0 / 5}), 1e-12);
  expect_vector_near(v[2], scaled({-4.0 / 21, -2.0 / 21, 8.0 / 21}), 1e-12);
}

TEST(Orthogonalize, AlreadyOrthogonalColumnsUnchanged) {
  KeyMatrix km{3, {{4, 0, 0}, {0, 2, 0}, {0, 0, 1}}};
  EXPECT_EQ(orthogonalize(km), km.columns);
}

TEST(Orthogonalize, DuplicatedColumnReportsIndependentCount) {
  KeyMatrix km{3, {{1, 2, 3}, {1, 2, 3}, {0, 1, 0}}};
  try {
    orthogonalize(km);
    FAIL();
  } catch (const RankDeficiencyError& e) {
    EXPECT_EQ(e.independent_columns(), 2u);
    EXPECT_EQ(e.required_columns(), 3u);
    EXPECT_EQ(e.kind(), ErrorKind::kRankDeficiency);
  }
}

TEST(Orthogonalize, RandomFamiliesArePairwiseOrthogonal) {
  std::mt19937_64 rng(5);
  int families = 0;
  for (int trial = 0; trial < 300; ++trial) {
    KeygenConfig cfg;
    cfg.bits_per_entry = 2 + static_cast<int>(rng() % 3);
    cfg.dimension = 2 + rng() % 15;
    cfg.entry_range = std::uint64_t{1} << 15;
    cfg.client_quotas = {cfg.dimension};
    BigUint key = 0;
    for (std::size_t i = 0; i < cfg.bit_budget(); ++i) key = key << 1 | (rng() & 1);
    cfg.key_int = key;
    std::vector<Vector> v;
    try {
      v = orthogonalize(random_matrix(cfg));
    } catch (const RankDeficiencyError&) {
      continue;
    }
    ++families;
    for (std::size_t i = 0; i < v.size(); ++i) {
      for (std::size_t j = i + 1; j < v.size(); ++j) {
        ASSERT_TRUE(nearly_orthogonal(v[i], v[j], 1e-10)) << "r=" << cfg.dimension;
      }
    }
  }
  EXPECT_GT(families, 200);
}

TEST(GenerateKeyFamily, RetriesWithIncrementedKey) {
  // key 0 and its successors up to 2^6 stay rank deficient (only the last
  // column is populated), so 64 attempts are exhausted.
  KeygenConfig cfg = worked_example();
  cfg.key_int = 0;
  EXPECT_THROW(generate_key_family(cfg), RankDeficiencyError);

  // Find a deficient key whose successor is usable and check the retry.
  for (BigUint k = 136777; k < 136777 + 5000; ++k) {
    cfg.key_int = k;
    bool deficient = false;
    try {
      orthogonalize(random_matrix(cfg));
    } catch (const RankDeficiencyError&) {
      deficient = true;
    }
    if (!deficient) continue;
    const KeyFamily fam = generate_key_family(cfg);
    EXPECT_GT(fam.attempts, 1u);
    EXPECT_EQ(fam.config.key_int, k + (fam.attempts - 1));
    return;
  }
  FAIL() << "no rank-deficient key found near the worked example";
}

TEST(GenerateKeyFamily, Deterministic) {
  const KeyFamily a = generate_key_family(worked_example());
  const KeyFamily b = generate_key_family(worked_example());
  EXPECT_EQ(key_matrix_digest(a.matrix), key_matrix_digest(b.matrix));
  EXPECT_EQ(a.directions, b.directions);
  EXPECT_EQ(a.attempts, 1u);
}

TEST(AssignKeys, WorkedExampleDistribution) {
  const auto v = orthogonalize(random_matrix(worked_example()));
  const std::vector<std::size_t> quotas = {1, 2};
  const std::vector<DcParams> dc(2, DcParams{0.1, 0.9, 1, 0.0});
  const auto keys = assign_keys(v, quotas, dc);
  ASSERT_EQ(keys.size(), 2u);
  EXPECT_EQ(keys[0].client_id, "client1");
  ASSERT_EQ(keys[0].partial_vectors.size(), 1u);
  expect_vector_near(keys[0].active_vector, scaled({2, 0, 1}), 1e-12);
  ASSERT_EQ(keys[1].partial_vectors.size(), 2u);
  EXPECT_TRUE(keys[1].active_vector.empty());
  EXPECT_EQ(keys[1].partial_vectors[0], v[1]);
  EXPECT_EQ(keys[1].partial_vectors[1], v[2]);
}

TEST(AssignKeys, SingleClientAndBijection) {
  const std::vector<Vector> v = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  const DcParams dc{1.0, 0.75, 1, 0.0};
  {
    const std::vector<std::size_t> quotas = {3};
    const std::vector<DcParams> params(1, dc);
    const auto keys = assign_keys(v, quotas, params);
    ASSERT_EQ(keys.size(), 1u);
    EXPECT_EQ(keys[0].partial_vectors, v);
  }
  {
    const std::vector<std::size_t> quotas = {1, 1, 1};
    const std::vector<DcParams> params(3, dc);
    const auto keys = assign_keys(v, quotas, params);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(keys[i].active_vector, v[i]);
  }
  const std::vector<std::size_t> bad = {1, 1};
  const std::vector<DcParams> params(2, dc);
  EXPECT_THROW(assign_keys(v, bad, params), Error);
}

TEST(CombinePartialKeys, WorkedExample) {
  const std::vector<Vector> partials = {{-1.0 / 5, 2, 2.0 / 5}, {-4.0 / 21, -2.0 / 21, 8.0 / 21}};
  const std::vector<double> coefs = {5, 21};
  expect_vector_near(combine_partial_keys(partials, coefs), Vector{-5, 8, 10}, 1e-14);
}

TEST(CombinePartialKeys, IdentityAndZero) {
  const std::vector<Vector> one = {{1, 2, 3}};
  const std::vector<double> c1 = {1};
  EXPECT_EQ(combine_partial_keys(one, c1), one[0]);
  const std::vector<Vector> two = {{1, 0}, {0, 1}};
  const std::vector<double> first = {1, 0};
  EXPECT_EQ(combine_partial_keys(two, first), two[0]);
  const std::vector<double> zero = {0, 0};
  EXPECT_THROW(combine_partial_keys(two, zero), Error);
  const std::vector<double> short_coefs = {1};
  EXPECT_THROW(combine_partial_keys(two, short_coefs), Error);
}

TEST(CombinePartialKeys, ClosureKeepsOrthogonalityToOtherClients) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> coef(-50, 50);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t r = 3 + rng() % 14;
    const auto family = testing::random_orthogonal_family(r, r, rng());
    const std::size_t split = 1 + rng() % (r - 1);
    std::vector<Vector> mine(family.begin(), family.begin() + split);
    std::vector<double> c(split);
    for (double& x : c) x = coef(rng);
    const Vector combined = combine_partial_keys(mine, c);
    for (std::size_t j = split; j < r; ++j) {
      ASSERT_TRUE(nearly_orthogonal(combined, family[j], 1e-10));
    }
  }
}

TEST(DeriveDither, RangeDeterminismAndOracle) {
  const std::vector<std::uint8_t> secret = {'k', 'e', 'y'};
  const double d1 = derive_dither(secret, 0.1);
  EXPECT_GE(d1, 0.0);
  EXPECT_LT(d1, 0.1);
  EXPECT_EQ(d1, derive_dither(secret, 0.1));
  // SHA-256("") starts e3b0c44298fc1c14; 0xe3b0c44298fc1c14 / 2^64.
  EXPECT_DOUBLE_EQ(derive_dither({}, 1.0), 0.8894159948913374);
  EXPECT_THROW(derive_dither(secret, 0.0), Error);
}

TEST(CheckKeyFamily, DetectsNonOrthogonalClients) {
  ClientKey a{"a", {{1, 0}}, {1, 0}, {}};
  ClientKey b{"b", {{1, 1}}, {1, 1}, {}};
  const std::vector<ClientKey> keys = {a, b};
  EXPECT_THROW(check_key_family(keys), Error);
}

TEST(KeyFile, RoundTripIsLossless) {
  const auto v = orthogonalize(random_matrix(worked_example()));
  const std::vector<std::size_t> quotas = {1, 2};
  const std::vector<DcParams> dc = {DcParams{0.1, 0.9, 1, 0.0123456789012345678},
                                    DcParams{0.2, 0.75, 1, 0.1999999999999}};
  auto keys = assign_keys(v, quotas, dc);
  const std::vector<double> coefs = {5, 21};
  keys[1].active_vector = combine_partial_keys(keys[1].partial_vectors, coefs);
  KeyFile file{3, 2, 32768, keys};
  const std::string text = serialize_key_file(file);
  const KeyFile back = parse_key_file(text);
  ASSERT_EQ(back.clients.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back.clients[i].partial_vectors, keys[i].partial_vectors);
    EXPECT_EQ(back.clients[i].active_vector, keys[i].active_vector);
    EXPECT_EQ(back.clients[i].dc, keys[i].dc);
  }
  EXPECT_EQ(serialize_key_file(back), text);
  EXPECT_NE(text.find("\"fedreverse-keys/1\""), std::string::npos);
}

TEST(KeyFile, RejectsMalformedInput) {
  EXPECT_THROW(parse_key_file("{"), Error);
  EXPECT_THROW(parse_key_file(R"({"format":"other","r":1,"B":1,"q":2,"clients":[]})"), Error);
  const char* bad_quota = R"({"format":"fedreverse-keys/1","r":2,"B":1,"q":2,"clients":[
    {"id":"a","quota":2,"partial_vectors":[[1,0]],"active_vector":[1,0],
     "delta":1,"alpha":0.75,"bits":1,"dither":0}]})";
  EXPECT_THROW(parse_key_file(bad_quota), Error);
  const char* non_orthogonal = R"({"format":"fedreverse-keys/1","r":2,"B":1,"q":2,"clients":[
    {"id":"a","quota":1,"partial_vectors":[[1,0]],"active_vector":[1,0],
     "delta":1,"alpha":0.75,"bits":1,"dither":0},
    {"id":"b","quota":1,"partial_vectors":[[1,1]],"active_vector":[1,1],
     "delta":1,"alpha":0.75,"bits":1,"dither":0}]})";
  try {
    parse_key_file(non_orthogonal);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kKey);
  }
}

}  // namespace
}  // namespace fedreverse
