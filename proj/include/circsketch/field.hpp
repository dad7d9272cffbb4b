#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "circsketch/errors.hpp"

namespace circsketch {

namespace detail {

inline std::uint64_t mulmod_wide(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

inline std::uint64_t powmod_wide(std::uint64_t a, std::uint64_t e, std::uint64_t m) {
  std::uint64_t r = 1 % m;
  a %= m;
  while (e) {
    if (e & 1) r = mulmod_wide(r, a, m);
    a = mulmod_wide(a, a, m);
    e >>= 1;
  }
  return r;
}

}  // namespace detail

// Deterministic Miller-Rabin, exact for every 64-bit input.
inline bool is_prime(std::uint64_t x) {
  if (x < 2) return false;
  for (std::uint64_t q : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (x % q == 0) return x == q;
  }
  std::uint64_t d = x - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (std::uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    std::uint64_t y = detail::powmod_wide(a, d, x);
    if (y == 1 || y == x - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      y = detail::mulmod_wide(y, y, x);
      if (y == x - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

inline std::vector<std::uint64_t> prime_factors(std::uint64_t x) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t q = 2; q * q <= x; ++q) {
    if (x % q == 0) {
      out.push_back(q);
      while (x % q == 0) x /= q;
    }
  }
  if (x > 1) out.push_back(x);
  return out;
}

// Arithmetic modulo a prime p < 2^32. Elements are canonical residues in [0, p).
class PrimeField {
 public:
  using Elem = std::uint64_t;

  explicit PrimeField(std::uint64_t p) : p_(p), barrett_(std::numeric_limits<std::uint64_t>::max() / p) {
    require(p >= 3 && p < (1ULL << 32) && is_prime(p), "field modulus must be an odd prime below 2^32");
    const std::uint64_t sq = (p - 1) * (p - 1);
    lazy_terms_ = (std::numeric_limits<std::uint64_t>::max() - p) / sq;
    if (lazy_terms_ == 0) lazy_terms_ = 1;
  }

  std::uint64_t modulus() const { return p_; }

  // Any 64-bit input; one conditional subtraction suffices because r < 2p.
  Elem reduce(std::uint64_t x) const {
    const auto q = static_cast<std::uint64_t>((static_cast<unsigned __int128>(x) * barrett_) >> 64);
    std::uint64_t r = x - q * p_;
    return r >= p_ ? r - p_ : r;
  }

  Elem add(Elem a, Elem b) const {
    Elem r = a + b;
    return r >= p_ ? r - p_ : r;
  }
  Elem sub(Elem a, Elem b) const { return a >= b ? a - b : a + p_ - b; }
  Elem neg(Elem a) const { return a == 0 ? 0 : p_ - a; }
  Elem mul(Elem a, Elem b) const { return reduce(a * b); }

  Elem pow(Elem a, std::uint64_t e) const {
    Elem r = 1;
    while (e) {
      if (e & 1) r = mul(r, a);
      a = mul(a, a);
      e >>= 1;
    }
    return r;
  }

  Elem inv(Elem a) const {
    if (a == 0) throw DomainError("inverse of zero");
    return pow(a, p_ - 2);
  }

  // sum a[i]*b[i], reducing only when the 64-bit accumulator could overflow.
  Elem dot(std::span<const Elem> a, std::span<const Elem> b) const {
    std::uint64_t acc = 0;
    std::size_t pending = 0;
    const std::size_t len = a.size() < b.size() ? a.size() : b.size();
    for (std::size_t i = 0; i < len; ++i) {
      acc += a[i] * b[i];
      if (++pending == lazy_terms_) {
        acc = reduce(acc);
        pending = 0;
      }
    }
    return reduce(acc);
  }

  std::size_t lazy_terms() const { return lazy_terms_; }

  // Bytes needed for a fixed-width little-endian element: ceil(ceil(log2 p) / 8).
  std::size_t element_bytes() const {
    std::size_t bits = 0;
    while ((1ULL << bits) < p_) ++bits;
    return (bits + 7) / 8;
  }

 private:
  std::uint64_t p_;
  std::uint64_t barrett_;
  std::size_t lazy_terms_ = 1;
};

// Smallest prime p >= lower_bound with p = 1 (mod n).
inline std::uint64_t prime_congruent_one(std::uint64_t lower_bound, std::uint64_t n) {
  require(n >= 1, "modulus order must be positive");
  std::uint64_t c = lower_bound <= 1 ? 1 : ((lower_bound - 1 + n - 1) / n) * n + 1;
  if (c < lower_bound) c += n;
  if (n % 2 == 1 && c % 2 == 0) c += n;  // keep candidates odd
  const std::uint64_t step = n % 2 == 1 ? 2 * n : n;
  while (!is_prime(c)) c += step;
  return c;
}

// An element of multiplicative order exactly n; requires n | p - 1.
inline std::uint64_t element_of_order(const PrimeField& f, std::uint64_t n) {
  const std::uint64_t p = f.modulus();
  require((p - 1) % n == 0, "n must divide p - 1");
  const auto factors = prime_factors(n);
  for (std::uint64_t g = 2; g < p; ++g) {
    const std::uint64_t w = f.pow(g, (p - 1) / n);
    bool ok = true;
    for (std::uint64_t q : factors) {
      if (f.pow(w, n / q) == 1) {
        ok = false;
        break;
      }
    }
    if (ok) return w;
  }
  throw DomainError("no element of the requested order");
}

}  // namespace circsketch
