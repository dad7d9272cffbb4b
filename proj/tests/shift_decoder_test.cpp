#include <gtest/gtest.h>

#include "circsketch/oracle.hpp"
#include "circsketch/shift_decoder.hpp"

using namespace circsketch;

TEST(ShiftHistogram, CountsPairDifferences) {
  const auto h = shift_histogram({1, 4}, {2, 4}, 5);
  // differences: 2-1=1, 4-1=3, 2-4=-2=3, 4-4=0
  EXPECT_EQ(h, (std::vector<std::uint32_t>{1, 1, 0, 2, 0}));
  EXPECT_EQ(candidate_shifts(h, 1), (std::vector<std::size_t>{3, 0, 1}));
}

class ShiftExact : public ::testing::TestWithParam<std::pair<std::size_t, std::size_t>> {};

// shift_exact equals the minimum over m of decode_exact, after clipping values above k.
TEST_P(ShiftExact, EqualsClippedMinimumOfPerShiftDecodes) {
  const auto [n, k] = GetParam();
  const SchemePtr sc = make_scheme(n, k, std::nullopt, Seed::from_u64(n + k));
  const SchemeParams& p = sc->params();
  oracle::Generator g(n * 7 + k);
  for (int t = 0; t < 12; ++t) {
    const auto regime = p.fallback ? oracle::Regime::nonperiodic : static_cast<oracle::Regime>(t % 3);
    const auto inst = g.planted(p, g.uniform(0, 2 * k), regime);
    const CircularSketch a = encode_exact(inst.s1, sc);
    const CircularSketch b = encode_exact(inst.s2, sc);
    double best = kInfinity;
    for (std::size_t m = 0; m < n; ++m) best = std::min(best, decode_exact(a, b, static_cast<std::int64_t>(m)).value);
    const DecodeResult s = shift_exact(a, b);
    const auto clip = [&](double v) { return v <= static_cast<double>(k) ? v : kInfinity; };
    EXPECT_EQ(clip(s.value), clip(best)) << a.kind();
    const auto truth = oracle::shift_distance(inst.s1, inst.s2);
    EXPECT_EQ(clip(s.value), clip(static_cast<double>(truth.value)));
    if (s.value <= static_cast<double>(k)) {
      ASSERT_TRUE(s.shift.has_value());
      EXPECT_EQ(static_cast<double>(oracle::hamming_at(inst.s1, inst.s2, static_cast<std::int64_t>(*s.shift))), s.value);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Grid, ShiftExact,
                         ::testing::Values(std::pair<std::size_t, std::size_t>{256, 2},
                                           std::pair<std::size_t, std::size_t>{512, 4},
                                           std::pair<std::size_t, std::size_t>{128, 8}));

TEST(ShiftZero, RotationPairs) {
  const SchemePtr sc = std::make_shared<const Scheme>(make_params(64, 1, std::nullopt, Seed::from_u64(1)), false);
  oracle::Generator g(1);
  const Str s = g.random_string(64, 4);
  const DecodeResult r = shift_zero(encode_zero(s, *sc), encode_zero(rotate(s, -9), *sc), 64);
  EXPECT_EQ(r.value, 0.0);
  EXPECT_EQ(rotate(rotate(s, -9), static_cast<std::int64_t>(*r.shift)), s);
  EXPECT_FALSE(shift_zero(encode_zero(s, *sc), encode_zero(g.substitute(s, 1, 4), *sc), 64).finite());
}

TEST(ShiftApprox, WithinFactorOnPlantedDistances) {
  const std::size_t n = 1024, k = 16;
  const SchemePtr sc = make_scheme(n, k, 0.25, Seed::from_u64(2));
  const SchemeParams& p = sc->params();
  oracle::Generator g(2);
  int ok = 0;
  const int trials = 20;
  for (int t = 0; t < trials; ++t) {
    const std::size_t h = g.uniform(k / 4, k - 3);
    const auto inst = g.planted(p, h, p.fallback ? oracle::Regime::nonperiodic : static_cast<oracle::Regime>(t % 3));
    const DecodeResult r = shift_approx(encode_approx(inst.s1, sc), encode_approx(inst.s2, sc));
    ok += r.value >= 0.75 * h && r.value <= 1.25 * h;
  }
  EXPECT_GE(ok, trials * 9 / 10);
}

TEST(ShiftApprox, FarPairsFail) {
  const SchemePtr sc = make_scheme(512, 8, 0.25, Seed::from_u64(3));
  oracle::Generator g(3);
  for (int t = 0; t < 5; ++t) {
    const Str a = g.random_string(512, 256);
    const Str b = g.random_string(512, 256);
    EXPECT_GT(shift_approx(encode_approx(a, sc), encode_approx(b, sc)).value, 0.75 * 8);
  }
}
