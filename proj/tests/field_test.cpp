#include <gtest/gtest.h>

#include <random>

#include "circsketch/field.hpp"

using namespace circsketch;

TEST(Primality, SmallNumbersAgainstTrialDivision) {
  auto naive = [](std::uint64_t x) {
    if (x < 2) return false;
    for (std::uint64_t d = 2; d * d <= x; ++d)
      if (x % d == 0) return false;
    return true;
  };
  for (std::uint64_t x = 0; x < 20000; ++x) EXPECT_EQ(is_prime(x), naive(x)) << x;
  EXPECT_TRUE(is_prime(4294967291ULL));
  EXPECT_FALSE(is_prime(4294967297ULL));  // 641 * 6700417
}

TEST(Primality, PrimeFactors) {
  EXPECT_EQ(prime_factors(360), (std::vector<std::uint64_t>{2, 3, 5}));
  EXPECT_EQ(prime_factors(97), (std::vector<std::uint64_t>{97}));
}

TEST(PrimeField, ArithmeticMatchesWideIntegers) {
  const PrimeField f(4294967291ULL);
  std::mt19937_64 rng(1);
  for (int t = 0; t < 10000; ++t) {
    const std::uint64_t a = rng() % f.modulus();
    const std::uint64_t b = rng() % f.modulus();
    EXPECT_EQ(f.mul(a, b), static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % f.modulus()));
    EXPECT_EQ(f.add(a, b), (a + b) % f.modulus());
    EXPECT_EQ(f.add(f.sub(a, b), b), a);
    if (a) {
      EXPECT_EQ(f.mul(a, f.inv(a)), 1u);
    }
  }
}

TEST(PrimeField, ReduceHandlesFullRange) {
  const PrimeField f(prime_congruent_one(1 << 20, 2));
  std::mt19937_64 rng(2);
  for (int t = 0; t < 10000; ++t) {
    const std::uint64_t x = rng() >> (rng() % 64);
    EXPECT_EQ(f.reduce(x), x % f.modulus());
  }
}

TEST(Parameters, PrimeCongruentToOneAndOmegaOrder) {
  for (std::uint64_t n : {1ULL, 2ULL, 7ULL, 256ULL, 1024ULL, 4096ULL, 32768ULL}) {
    const std::uint64_t lb = std::max<std::uint64_t>(n * n, 1 << 17);
    const std::uint64_t p = prime_congruent_one(lb, n);
    EXPECT_TRUE(is_prime(p));
    EXPECT_GE(p, lb);
    EXPECT_EQ((p - 1) % n, 0u);
    const PrimeField f(p);
    const std::uint64_t w = element_of_order(f, n);
    EXPECT_EQ(f.pow(w, n), 1u);
    for (std::uint64_t q : prime_factors(n)) EXPECT_NE(f.pow(w, n / q), 1u);
  }
}
