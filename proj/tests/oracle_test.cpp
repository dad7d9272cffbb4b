#include <gtest/gtest.h>

#include "circsketch/oracle.hpp"

using namespace circsketch;

TEST(Oracle, HammingBasics) {
  const Str s = Str::from_bytes("abc");
  EXPECT_EQ(oracle::hamming(s, s), 0u);
  EXPECT_EQ(oracle::hamming(s, Str::from_bytes("abd")), 1u);
}

TEST(Oracle, ShiftDistanceBasics) {
  oracle::Generator g(1);
  const Str s = g.random_string(50, 4);
  EXPECT_EQ(oracle::shift_distance(s, rotate(s, 3)).value, 0u);
  EXPECT_EQ(oracle::shift_distance(Str(std::vector<Symbol>(9, 0)), Str(std::vector<Symbol>(9, 1))).value, 9u);
}

TEST(Oracle, ShiftDistanceIsSymmetricAndRotationInvariant) {
  oracle::Generator g(2);
  for (int t = 0; t < 50; ++t) {
    const Str a = g.random_string(40, 3);
    const Str b = g.random_string(40, 3);
    const auto ab = oracle::shift_distance(a, b).value;
    EXPECT_EQ(ab, oracle::shift_distance(b, a).value);
    EXPECT_EQ(ab, oracle::shift_distance(rotate(a, 1), rotate(b, 1)).value);
    EXPECT_EQ(ab, oracle::shift_distance(a, rotate(b, 7)).value);
  }
}

TEST(Oracle, ShiftDistanceIsMinimumOverHistogram) {
  oracle::Generator g(3);
  const Str a = g.random_string(256, 4);
  const Str b = g.random_string(256, 4);
  std::size_t best = 1000;
  for (std::int64_t m = 0; m < 256; ++m) best = std::min(best, oracle::hamming(a, rotate(b, m)));
  EXPECT_EQ(oracle::shift_distance(a, b).value, best);
}

TEST(Oracle, PlantedInstancesReverify) {
  oracle::Generator g(4);
  const SchemeParams p = make_params(1024, 8, std::nullopt, Seed::from_u64(4));
  for (auto regime : {oracle::Regime::nonperiodic, oracle::Regime::pseudoperiodic, oracle::Regime::mixed}) {
    for (std::size_t h : {0, 1, 8, 20}) {
      const auto inst = g.planted(p, h, regime);
      EXPECT_EQ(oracle::hamming_at(inst.s1, inst.s2, static_cast<std::int64_t>(inst.shift)), h);
      if (h > 0) {
        EXPECT_EQ(oracle::shift_distance(inst.s1, inst.s2).value, h);
      } else {
        EXPECT_EQ(rotate(inst.s2, static_cast<std::int64_t>(inst.shift)), inst.s1);
      }
      if (regime == oracle::Regime::pseudoperiodic) {
        EXPECT_TRUE(oracle::pseudo_periodic(inst.s1, p.alpha(), p.beta_h()));
      } else {
        EXPECT_FALSE(oracle::pseudo_periodic(inst.s1, p.alpha(), p.beta_h()));
      }
      if (regime == oracle::Regime::mixed) {
        EXPECT_TRUE(oracle::pseudo_periodic(inst.s1, p.alpha(), p.beta_h_prime()));
      }
    }
  }
}

TEST(Oracle, MismatchesAgreeWithStringsCore) {
  oracle::Generator g(5);
  for (int t = 0; t < 1000; ++t) {
    const Str a = g.random_string(g.uniform(1, 40), 3);
    const Str b = g.substitute(a, g.uniform(0, a.size()), 3);
    EXPECT_EQ(oracle::mismatches(a, b), mismatch_info(a, b).entries());
  }
}

TEST(Oracle, GeneratorIsDeterministic) {
  oracle::Generator a(9), b(9);
  EXPECT_EQ(a.random_string(100, 256), b.random_string(100, 256));
}
