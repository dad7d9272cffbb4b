#include <gtest/gtest.h>

#include <numeric>

#include "circsketch/hamming_sketch.hpp"
#include "circsketch/oracle.hpp"

using namespace circsketch;

namespace {

PositionSet everything(std::size_t n) {
  std::vector<Pos> v(n);
  std::iota(v.begin(), v.end(), Pos{1});
  return PositionSet(n, std::move(v));
}

SyndromeCodec codec(std::size_t n, std::size_t t, PositionSet a, std::uint64_t sigma = 256) {
  const SchemeParams p = make_params(n, 1, std::nullopt, Seed::from_u64(n + t), sigma);
  return SyndromeCodec(n, sigma, p.prime, p.omega, t, p.verify_points, std::move(a), Prf(p.seed, "verify"));
}

}  // namespace

TEST(BerlekampMassey, FindsShortestRecurrence) {
  const PrimeField f(prime_congruent_one(1 << 17, 2));
  // Fibonacci: s_j = s_{j-1} + s_{j-2}
  std::vector<std::uint64_t> fib{1, 1};
  for (int i = 0; i < 10; ++i) fib.push_back(f.add(fib[fib.size() - 1], fib[fib.size() - 2]));
  const Lfsr lf = berlekamp_massey(f, fib);
  EXPECT_EQ(lf.length, 2u);
  EXPECT_EQ(lf.c[1], f.neg(1));
  EXPECT_EQ(lf.c[2], f.neg(1));
  const std::vector<std::uint64_t> zeros(8, 0);
  EXPECT_EQ(berlekamp_massey(f, zeros).length, 0u);
  // Geometric sequence has complexity 1.
  std::vector<std::uint64_t> geo{5};
  for (int i = 0; i < 9; ++i) geo.push_back(f.mul(geo.back(), 7));
  EXPECT_EQ(berlekamp_massey(f, geo).length, 1u);
}

TEST(SyndromeCodec, SingleMismatchMomentRatioIsLocator) {
  const std::size_t n = 64;
  const SyndromeCodec c = codec(n, 4, everything(n));
  oracle::Generator g(1);
  const Str s = g.random_string(n, 256);
  const Str u = g.substitute(s, 1, 256);
  const auto mi = oracle::mismatches(s, u);
  const SyndromeDiff d = c.difference(c.encode(s), c.encode(u));
  const PrimeField& f = c.field();
  const SchemeParams p = make_params(n, 1, std::nullopt, Seed::from_u64(n + 4));
  const std::uint64_t locator = f.pow(p.omega, mi[0].pos);
  for (std::size_t j = 0; j + 1 < d.d1.size(); ++j) EXPECT_EQ(d.d1[j + 1], f.mul(d.d1[j], locator));
}

TEST(SyndromeCodec, RecoversEveryErrorCountUpToCapacity) {
  const std::size_t n = 256, t = 12;
  const SyndromeCodec c = codec(n, t, everything(n));
  oracle::Generator g(2);
  for (std::size_t e = 0; e <= t; ++e) {
    for (int trial = 0; trial < 20; ++trial) {
      const Str s = g.random_string(n, 256);
      const Str u = g.substitute(s, e, 256);
      const auto mi = c.decode(c.encode(s), c.encode(u));
      ASSERT_TRUE(mi.has_value()) << e;
      EXPECT_EQ(mi->entries(), oracle::mismatches(s, u));
    }
  }
}

TEST(SyndromeCodec, OverflowsBeyondCapacity) {
  const std::size_t n = 256, t = 12;
  const SyndromeCodec c = codec(n, t, everything(n));
  oracle::Generator g(3);
  int overflow = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Str s = g.random_string(n, 256);
    const Str u = g.substitute(s, g.uniform(t + 1, 4 * t), 256);
    overflow += !c.decode(c.encode(s), c.encode(u)).has_value();
  }
  EXPECT_GE(overflow, 198);
}

TEST(SyndromeCodec, SampledPositionsRestrictRecovery) {
  const std::size_t n = 200;
  const PositionSet a = sampled_set(Prf(Seed::from_u64(4), "A"), n, 0.3);
  const SyndromeCodec c = codec(n, 10, a);
  EXPECT_FALSE(c.full_sample());
  oracle::Generator g(4);
  for (int trial = 0; trial < 50; ++trial) {
    const Str s = g.random_string(n, 256);
    const Str u = g.substitute(s, g.uniform(0, 25), 256);
    const MismatchInfo truth = mismatch_info(s, u, a);
    const auto mi = c.decode(c.encode(s), c.encode(u));
    if (truth.size() <= 10) {
      ASSERT_TRUE(mi.has_value());
      EXPECT_EQ(*mi, truth);
    } else {
      EXPECT_FALSE(mi.has_value());
    }
  }
}

TEST(SyndromeCodec, RotationEncodingEqualsEncodingOfRotation) {
  const std::size_t n = 96;
  oracle::Generator g(5);
  const Str s = g.random_string(n, 256);
  for (const PositionSet& a : {everything(n), sampled_set(Prf(Seed::from_u64(5), "A"), n, 0.5)}) {
    const SyndromeCodec c = codec(n, 6, a);
    std::vector<Pos> idx{1, 2, 17, 50, 96};
    const auto batch = c.encode_rotations(s, idx);
    for (std::size_t j = 0; j < idx.size(); ++j) {
      EXPECT_EQ(c.encode_rotation(s, idx[j]), c.encode(rotate(s, idx[j])));
      EXPECT_EQ(batch[j], c.encode(rotate(s, idx[j])));
    }
  }
}

TEST(SyndromeCodec, RotatedDifferenceDetected) {
  const std::size_t n = 128;
  const SyndromeCodec c = codec(n, 8, everything(n));
  oracle::Generator g(6);
  const Str s = g.random_string(n, 256);
  const Str u = g.substitute(s, 3, 256);
  const SyndromeDiff base = c.difference(c.encode(s), c.encode(u));
  const SyndromeDiff moved = c.difference(c.encode_rotation(s, 5), c.encode_rotation(u, 5));
  EXPECT_TRUE(c.is_rotation_of(moved, base, 5));
  EXPECT_FALSE(c.is_rotation_of(moved, base, 4));
  EXPECT_EQ(c.linear_complexity(base, 16), 3u);
}

TEST(SyndromeCodec, RejectsForeignShapesAndSymbols) {
  const SyndromeCodec c = codec(32, 4, everything(32), 4);
  const SyndromeCodec other = codec(32, 5, everything(32), 4);
  oracle::Generator g(7);
  const Str s = g.random_string(32, 4);
  EXPECT_THROW(c.decode(c.encode(s), other.encode(s)), InconsistencyError);
  EXPECT_THROW(c.encode(Str(std::vector<Symbol>(32, 8))), DomainError);
  EXPECT_THROW(c.encode(g.random_string(31, 4)), DomainError);
}

TEST(AmsCodec, CoordinatesAreInRange) {
  const AmsCodec c(100, 5, 50, Prf(Seed::from_u64(8), "ams"));
  for (std::uint32_t g = 0; g < 5; ++g)
    for (std::size_t q = 1; q <= 100; ++q)
      for (Symbol x : {0u, 1u, 255u}) {
        const auto [b, sign] = c.coordinate(g, q, x);
        EXPECT_LT(b, 50u);
        EXPECT_TRUE(sign == 1 || sign == -1);
      }
}

TEST(AmsCodec, SketchIsSumOfOneHotCoordinates) {
  const std::size_t n = 60;
  const AmsCodec c(n, 7, 32, Prf(Seed::from_u64(9), "ams"));
  oracle::Generator g(9);
  const Str s = g.random_string(n, 256);
  const AmsSketch sk = c.encode(s);
  std::vector<std::int32_t> expect(7 * 32, 0);
  for (std::uint32_t grp = 0; grp < 7; ++grp)
    for (std::size_t q = 1; q <= n; ++q) {
      const auto [b, sign] = c.coordinate(grp, q, s.at(q));
      expect[grp * 32 + b] += sign;
    }
  EXPECT_EQ(sk.counters, expect);
  for (std::int64_t i : {1, 7, 59, 60}) EXPECT_EQ(c.encode_rotation(s, i), c.encode(rotate(s, i)));
}

TEST(AmsCodec, EstimatesHammingDistance) {
  const std::size_t n = 2048;
  const double eps = 0.25;
  const auto buckets = static_cast<std::uint32_t>(std::ceil(8 / (eps * eps)));
  oracle::Generator g(10);
  int good = 0;
  const int trials = 100;
  for (int t = 0; t < trials; ++t) {
    const AmsCodec c(n, 9, buckets, Prf(Seed::from_u64(100 + t), "ams"));
    const Str s = g.random_string(n, 256);
    const std::size_t h = g.uniform(1, 200);
    const Str u = g.substitute(s, h, 256);
    const double est = c.decode(c.encode(s), c.encode(u));
    good += std::abs(est - static_cast<double>(h)) <= eps * static_cast<double>(h);
  }
  EXPECT_GE(good, 90);
  const AmsCodec c(n, 9, buckets, Prf(Seed::from_u64(1), "ams"));
  const Str s = g.random_string(n, 256);
  EXPECT_EQ(c.decode(c.encode(s), c.encode(s)), 0.0);
}

TEST(AmsCodec, CappedDecodeAgreesBelowCap) {
  const std::size_t n = 512;
  const AmsCodec c(n, 9, 128, Prf(Seed::from_u64(11), "ams"));
  oracle::Generator g(11);
  const Str s = g.random_string(n, 256);
  const Str u = g.substitute(s, 40, 256);
  const double full = c.decode(c.encode(s), c.encode(u));
  EXPECT_EQ(c.decode_capped(c.encode(s), c.encode(u), full + 1).value(), full);
  EXPECT_FALSE(c.decode_capped(c.encode(s), c.encode(u), full / 4).has_value());
}
