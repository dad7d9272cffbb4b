#include <gtest/gtest.h>

#include "circsketch/circular_sketch.hpp"
#include "circsketch/oracle.hpp"

using namespace circsketch;

TEST(ZeroSketch, DecodesToZeroExactlyOnRotations) {
  oracle::Generator g(1);
  const SchemePtr sc = std::make_shared<const Scheme>(make_params(48, 1, std::nullopt, Seed::from_u64(1)), false);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 48;
    Str s1 = t % 3 == 0 ? g.periodic_with_noise(n, 12, 0, 2).base : g.random_string(n, 2);
    Str s2 = t % 2 ? Str(oracle::rotated(s1, static_cast<std::int64_t>(g.uniform(0, n - 1))))
                   : g.substitute(Str(oracle::rotated(s1, 5)), 1, 2);
    const ZeroSketch z1 = encode_zero(s1, *sc);
    const ZeroSketch z2 = encode_zero(s2, *sc);
    for (std::int64_t m = -static_cast<std::int64_t>(n); m < static_cast<std::int64_t>(2 * n); ++m) {
      const bool equal = s1 == rotate(s2, m);
      EXPECT_EQ(decode_zero(z1, z2, m) == 0.0, equal) << t << " " << m;
    }
  }
}

TEST(ZeroSketch, ShiftConvention) {
  const SchemePtr sc = std::make_shared<const Scheme>(make_params(5, 1, std::nullopt, Seed::from_u64(2)), false);
  const Str s = Str::from_bytes("abcde");
  const ZeroSketch z = encode_zero(s, *sc);
  EXPECT_EQ(decode_zero(z, encode_zero(rotate(s, 3), *sc), -3), 0.0);
  EXPECT_EQ(decode_zero(z, encode_zero(rotate(s, 3), *sc), 2), 0.0);
  EXPECT_EQ(decode_zero(z, encode_zero(rotate(s, 3), *sc), 3), kInfinity);
}

class ExactDecode : public ::testing::TestWithParam<std::pair<std::size_t, std::size_t>> {};

TEST_P(ExactDecode, AgreesWithOracleAtPlantedAndRandomShifts) {
  const auto [n, k] = GetParam();
  const SchemePtr sc = make_scheme(n, k, std::nullopt, Seed::from_u64(n * 31 + k));
  const SchemeParams& p = sc->params();
  oracle::Generator g(n + k);
  for (int t = 0; t < 30; ++t) {
    const std::size_t h = g.uniform(0, 3 * k);
    const auto regime = p.fallback ? oracle::Regime::nonperiodic : static_cast<oracle::Regime>(t % 3);
    const auto inst = g.planted(p, h, regime);
    const CircularSketch a = encode_exact(inst.s1, sc);
    const CircularSketch b = encode_exact(inst.s2, sc);
    for (std::int64_t m : {static_cast<std::int64_t>(inst.shift), static_cast<std::int64_t>(g.uniform(0, n - 1))}) {
      const std::size_t truth = oracle::hamming_at(inst.s1, inst.s2, m);
      const DecodeResult d = decode_exact(a, b, m);
      if (truth <= k) {
        EXPECT_EQ(d.value, static_cast<double>(truth)) << a.kind() << " h=" << h << " m=" << m;
      } else {
        EXPECT_TRUE(!d.finite() || d.value > static_cast<double>(k)) << a.kind() << " value " << d.value;
      }
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Grid, ExactDecode,
                         ::testing::Values(std::pair<std::size_t, std::size_t>{256, 2},
                                           std::pair<std::size_t, std::size_t>{512, 4},
                                           std::pair<std::size_t, std::size_t>{1024, 8},
                                           std::pair<std::size_t, std::size_t>{200, 10}));

TEST(ExactSketch, ComponentKinds) {
  oracle::Generator g(3);
  const SchemePtr sc = make_scheme(1024, 8, std::nullopt, Seed::from_u64(3));
  const auto periodic = g.planted(sc->params(), 0, oracle::Regime::pseudoperiodic);
  const auto random = g.planted(sc->params(), 0, oracle::Regime::nonperiodic);
  EXPECT_EQ(encode_exact(random.s1, sc).kind(), "EXACT_NP");
  EXPECT_EQ(encode_exact(periodic.s1, sc).kind(), "EXACT_PP");
  const SchemePtr small = make_scheme(100, 10, std::nullopt, Seed::from_u64(3));
  EXPECT_EQ(encode_exact(g.random_string(100, 256), small).kind(), "VERBATIM");
}

TEST(ExactSketch, RejectsBadInputs) {
  const SchemePtr sc = make_scheme(64, 2, std::nullopt, Seed::from_u64(4), 4);
  EXPECT_THROW(encode_exact(Str(std::vector<Symbol>(63, 0)), sc), DomainError);
  EXPECT_THROW(encode_exact(Str(std::vector<Symbol>(64, 4)), sc), DomainError);
  const SchemePtr other = make_scheme(64, 2, std::nullopt, Seed::from_u64(5), 4);
  const Str s(std::vector<Symbol>(64, 1));
  EXPECT_THROW(decode_exact(encode_exact(s, sc), encode_exact(s, other), 0), InconsistencyError);
}

TEST(ExactSketch, Deterministic) {
  oracle::Generator g(6);
  const Str s = g.random_string(1024, 256);
  const CircularSketch a = encode_exact(s, make_scheme(1024, 8, std::nullopt, Seed::from_u64(6)));
  const CircularSketch b = encode_exact(s, make_scheme(1024, 8, std::nullopt, Seed::from_u64(6)));
  EXPECT_EQ(a, b);
}

TEST(ApproxDecode, WithinFactorForCloseAndRejectsFar) {
  const std::size_t n = 1024, k = 16;
  const SchemePtr sc = make_scheme(n, k, 0.25, Seed::from_u64(7));
  const SchemeParams& p = sc->params();
  oracle::Generator g(7);
  int close_ok = 0, close = 0, far_ok = 0, far = 0;
  for (int t = 0; t < 40; ++t) {
    const bool near = t % 2 == 0;
    const std::size_t h = near ? g.uniform(1, k - 3) : g.uniform(k + 3, 4 * k);
    const auto inst = g.planted(p, h, p.fallback ? oracle::Regime::nonperiodic : static_cast<oracle::Regime>(t % 3));
    const DecodeResult d = decode_approx(encode_approx(inst.s1, sc), encode_approx(inst.s2, sc),
                                         static_cast<std::int64_t>(inst.shift));
    if (near) {
      ++close;
      close_ok += d.value >= 0.75 * h && d.value <= 1.25 * h;
    } else {
      ++far;
      far_ok += d.value > 0.75 * k;
    }
  }
  EXPECT_GE(close_ok, close * 9 / 10);
  EXPECT_EQ(far_ok, far);
}

TEST(ApproxDecode, ZeroOnRotations) {
  const SchemePtr sc = make_scheme(512, 8, 0.25, Seed::from_u64(8));
  oracle::Generator g(8);
  const Str s = g.random_string(512, 256);
  const CircularSketch a = encode_approx(s, sc);
  const CircularSketch b = encode_approx(rotate(s, -40), sc);
  EXPECT_EQ(decode_approx(a, b, 40).value, 0.0);
  EXPECT_GT(decode_approx(a, b, 41).value, 0.75 * 8);
}

TEST(ApproxSketch, LevelsAreDoublingAndCapped) {
  const SchemePtr sc = make_scheme(1024, 24, 0.25, Seed::from_u64(9));
  std::vector<std::uint32_t> ks;
  for (const auto& l : sc->levels()) ks.push_back(l->params().k);
  EXPECT_EQ(ks, (std::vector<std::uint32_t>{1, 2, 4, 8, 16, 32, 64}));
  const SchemePtr tiny = make_scheme(16, 12, 0.25, Seed::from_u64(9));
  EXPECT_EQ(tiny->levels().back()->params().k, 16u);
}

TEST(ApproxSketch, AlternativeComponentWhenBudgetIsLarge) {
  oracle::Generator g(10);
  const SchemePtr sc = make_scheme(256, 128, 0.25, Seed::from_u64(10));
  const CircularSketch a = encode_approx(g.random_string(256, 256), sc);
  EXPECT_EQ(a.levels.back().kind(), "ALT");
}
