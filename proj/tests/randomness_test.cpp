#include <gtest/gtest.h>

#include <cmath>

#include "circsketch/oracle.hpp"
#include "circsketch/randomness.hpp"

using namespace circsketch;

TEST(Seed, HexRoundTripAndValidation) {
  const Seed s = Seed::from_u64(42);
  EXPECT_EQ(Seed::from_hex(s.to_hex()), s);
  EXPECT_THROW(Seed::from_hex("abc"), DomainError);
  EXPECT_THROW(Seed::from_hex(std::string(64, 'g')), DomainError);
  EXPECT_NE(s.digest(), Seed::from_u64(43).digest());
}

// Frozen outputs: any change here changes every sketch on disk.
TEST(Prf, GoldenValues) {
  const Seed s = Seed::from_u64(42);
  EXPECT_EQ(s.to_hex(), "c77f04f860871c2d0470a7639bb57f0791cc9af773f08b77c4ee4688b93089fe");
  EXPECT_EQ(s.digest(), "eb59737ab8f97c69452880046d78503a61e14f7bac8915d8afe633e45d4a36cf");
  const Prf p(s, "golden");
  EXPECT_EQ(p.u64(0), 0xa565361a4e58b827ULL);
  EXPECT_EQ(p.u64(1), 0x44fdfe06a2478ba6ULL);
  EXPECT_EQ(p.u64(7, 9), 0x4a878533830bca19ULL);
  EXPECT_EQ(p.below(3, 1000), 192u);
}

TEST(Prf, DeterministicAndLabelSeparated) {
  const Seed s = Seed::from_u64(1);
  const Prf a(s, "x"), b(s, "x"), c(s, "y"), d(Seed::from_u64(2), "x");
  for (std::uint64_t i = 0; i < 100; ++i) {
    EXPECT_EQ(a.u64(i), b.u64(i));
    EXPECT_NE(a.u64(i), c.u64(i));
    EXPECT_NE(a.u64(i), d.u64(i));
  }
}

TEST(Prf, BelowStaysInRange) {
  const Prf p(Seed::from_u64(3), "below");
  std::vector<int> hist(7, 0);
  for (std::uint64_t i = 0; i < 7000; ++i) {
    const auto v = p.below(i, 7);
    ASSERT_LT(v, 7u);
    ++hist[v];
  }
  for (int h : hist) EXPECT_NEAR(h, 1000, 150);
}

TEST(Sampling, SizeWithinChernoffBand) {
  const std::size_t n = 20000;
  for (double rate : {0.01, 0.1, 0.5}) {
    const PositionSet a = sampled_set(Prf(Seed::from_u64(4), "rate"), n, rate);
    const double mu = rate * n;
    EXPECT_NEAR(static_cast<double>(a.size()), mu, 5.0 * std::sqrt(mu)) << rate;
  }
  EXPECT_EQ(sampled_set(Prf(Seed::from_u64(4), "all"), 50, 1.0).size(), 50u);
  EXPECT_EQ(sampled_set(Prf(Seed::from_u64(4), "none"), 50, 0.0).size(), 0u);
}

TEST(Sampling, MembershipMatchesSet) {
  const Prf p(Seed::from_u64(5), "member");
  const PositionSet a = sampled_set(p, 500, 0.3);
  for (std::size_t i = 1; i <= 500; ++i) EXPECT_EQ(a.contains(i), in_sampled_set(p, i, 0.3));
}

TEST(Params, DerivedQuantities) {
  const SchemeParams p = make_params(4096, 8, 0.25, Seed::from_u64(6));
  EXPECT_EQ(p.ell, 12u);
  EXPECT_FALSE(p.fallback);
  EXPECT_EQ(p.gamma_k(), Rational::of(4096, 36));
  EXPECT_EQ(p.alpha(), Rational::of(4096, 12));
  EXPECT_EQ(p.beta_h_prime(), Rational::of(4096, 36) + rational(8));
  EXPECT_EQ(p.t, static_cast<std::uint32_t>(std::ceil(18 * std::log(4096.0))));
  EXPECT_EQ(p.ams_buckets, 128u);
  EXPECT_EQ(p.ams_groups % 2, 1u);
  EXPECT_TRUE(make_params(1024, 32, std::nullopt, Seed::from_u64(6)).fallback);
  EXPECT_THROW(make_params(0, 1, std::nullopt, Seed::from_u64(6)), DomainError);
  EXPECT_THROW(make_params(16, 17, std::nullopt, Seed::from_u64(6)), DomainError);
  EXPECT_THROW(make_params(16, 1, 1.5, Seed::from_u64(6)), DomainError);
}

TEST(Params, FrozenFieldChoice) {
  const SchemeParams p = make_params(1024, 8, std::nullopt, Seed::from_u64(42));
  EXPECT_EQ(p.prime, 1051649u);
  EXPECT_EQ(p.omega, 589311u);
  EXPECT_EQ(p.verify_points, 30u);
}

TEST(KarpRabin, DistinctStringsRarelyCollide) {
  const PrimeField f(prime_congruent_one(1 << 20, 2));
  oracle::Generator g(7);
  const Str s = g.random_string(100, 4);
  const Str u = g.substitute(s, 1, 4);
  EXPECT_EQ(kr_fingerprint(f, 12345, s.symbols()), kr_fingerprint(f, 12345, s.symbols()));
  EXPECT_NE(kr_fingerprint(f, 12345, s.symbols()), kr_fingerprint(f, 12345, u.symbols()));
}

TEST(SubstringGate, RollingEqualsDirect) {
  const SchemeParams p = make_params(4096, 8, std::nullopt, Seed::from_u64(8));
  const SubstringGate gate(p, 3 * p.ell);
  oracle::Generator g(9);
  const Str s = g.random_string(500, 3);
  const auto fps = gate.window_fingerprints(s);
  for (std::size_t i = 1; i <= s.size(); ++i) {
    std::vector<Symbol> w;
    for (std::size_t j = 0; j < gate.window(); ++j) w.push_back(s.cyclic(static_cast<std::int64_t>(i + j)));
    ASSERT_EQ(fps[i - 1], gate.fingerprint(w)) << i;
    EXPECT_EQ(gate.accepts_fingerprint(fps[i - 1]), gate.accepts(w));
  }
}

TEST(SubstringGate, DependsOnlyOnContent) {
  const SchemeParams p = make_params(4096, 8, std::nullopt, Seed::from_u64(10));
  const SubstringGate gate(p, 3 * p.ell);
  oracle::Generator g(11);
  const Str s = g.random_string(300, 2);
  const auto a = gate.window_fingerprints(s);
  const auto b = gate.window_fingerprints(rotate(s, 17));
  for (std::size_t i = 1; i <= s.size(); ++i) EXPECT_EQ(b[i - 1], a[wrap(static_cast<std::int64_t>(i) + 17, s.size()) - 1]);
}

TEST(SubstringGate, AcceptanceRateNearTarget) {
  const SchemeParams p = make_params(4096, 8, std::nullopt, Seed::from_u64(12));
  const SubstringGate gate(p, 3 * p.ell);
  oracle::Generator g(13);
  const Str s = g.random_string(4096, 256);
  std::size_t acc = 0;
  for (auto fp : gate.window_fingerprints(s)) acc += gate.accepts_fingerprint(fp);
  const double mu = p.gate_rate * 4096;
  EXPECT_NEAR(static_cast<double>(acc), mu, 5.0 * std::sqrt(mu));
}
