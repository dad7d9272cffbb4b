#pragma once

#include <sodium.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "circsketch/errors.hpp"
#include "circsketch/field.hpp"
#include "circsketch/strings.hpp"

namespace circsketch {

inline constexpr const char* kPrfId = "blake2b-siphashx24-v1";

namespace detail {

inline void ensure_sodium() {
  static const bool ok = sodium_init() >= 0;
  if (!ok) throw std::runtime_error("libsodium initialisation failed");
}

inline std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 15]);
  }
  return out;
}

inline void store_le64(std::uint8_t* out, std::uint64_t x) {
  for (int i = 0; i < 8; ++i) out[i] = static_cast<std::uint8_t>(x >> (8 * i));
}

inline std::uint64_t load_le64(const std::uint8_t* in) {
  std::uint64_t x = 0;
  for (int i = 7; i >= 0; --i) x = (x << 8) | in[i];
  return x;
}

// Murmur3 64-bit finaliser; a bijection on 64-bit words.
inline std::uint64_t fmix64(std::uint64_t x) {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ULL;
  x ^= x >> 33;
  return x;
}

}  // namespace detail

// 256-bit shared seed.
struct Seed {
  std::array<std::uint8_t, 32> bytes{};

  static Seed from_hex(std::string_view hex) {
    require(hex.size() == 64, "seed must be 64 hex characters");
    Seed s;
    auto nibble = [](char c) -> int {
      if (c >= '0' && c <= '9') return c - '0';
      if (c >= 'a' && c <= 'f') return c - 'a' + 10;
      if (c >= 'A' && c <= 'F') return c - 'A' + 10;
      return -1;
    };
    for (std::size_t i = 0; i < 32; ++i) {
      const int hi = nibble(hex[2 * i]);
      const int lo = nibble(hex[2 * i + 1]);
      require(hi >= 0 && lo >= 0, "seed must be hexadecimal");
      s.bytes[i] = static_cast<std::uint8_t>(hi * 16 + lo);
    }
    return s;
  }

  // Expands a 64-bit value into a seed; for tests and trial generators.
  static Seed from_u64(std::uint64_t x) {
    Seed s;
    for (std::size_t w = 0; w < 4; ++w) detail::store_le64(s.bytes.data() + 8 * w, detail::fmix64(x + 0x9e3779b97f4a7c15ULL * (w + 1)));
    return s;
  }

  std::string to_hex() const { return detail::to_hex(bytes); }

  // BLAKE2b-256 of the seed; identifies the seed in sketch headers without revealing it.
  std::string digest() const {
    detail::ensure_sodium();
    std::array<std::uint8_t, 32> out{};
    crypto_generichash(out.data(), out.size(), bytes.data(), bytes.size(), nullptr, 0);
    return detail::to_hex(out);
  }

  friend bool operator==(const Seed&, const Seed&) = default;
};

// Keyed pseudorandom function with a domain-separation label.
class Prf {
 public:
  Prf(const Seed& seed, std::string_view label) : label_(label) {
    detail::ensure_sodium();
    static_assert(crypto_shorthash_siphashx24_KEYBYTES == 16);
    crypto_generichash(key_.data(), key_.size(), reinterpret_cast<const unsigned char*>(label.data()), label.size(),
                       seed.bytes.data(), seed.bytes.size());
  }

  const std::string& label() const { return label_; }

  std::array<std::uint64_t, 2> eval128(std::span<const std::uint64_t> words) const {
    std::vector<std::uint8_t> buf(words.size() * 8);
    for (std::size_t i = 0; i < words.size(); ++i) detail::store_le64(buf.data() + 8 * i, words[i]);
    std::array<std::uint8_t, 16> out{};
    crypto_shorthash_siphashx24(out.data(), buf.data(), buf.size(), key_.data());
    return {detail::load_le64(out.data()), detail::load_le64(out.data() + 8)};
  }

  std::uint64_t u64(std::uint64_t x) const {
    std::array<std::uint8_t, 8> buf{};
    detail::store_le64(buf.data(), x);
    std::array<std::uint8_t, 16> out{};
    crypto_shorthash_siphashx24(out.data(), buf.data(), buf.size(), key_.data());
    return detail::load_le64(out.data());
  }

  std::uint64_t u64(std::uint64_t x, std::uint64_t y) const {
    const std::array<std::uint64_t, 2> w{x, y};
    return eval128(w)[0];
  }

  // Uniform in [0, bound) by rejection on the PRF stream (x, attempt).
  std::uint64_t below(std::uint64_t x, std::uint64_t bound) const {
    require(bound > 0, "empty range");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    for (std::uint64_t attempt = 0;; ++attempt) {
      const std::uint64_t r = u64(x, attempt);
      if (r < limit) return r % bound;
    }
  }

 private:
  std::string label_;
  std::array<std::uint8_t, 16> key_{};
};

// floor(rate * 2^64), saturating; rate clamped to [0, 1].
inline std::uint64_t rate_threshold(double rate) {
  if (!(rate > 0.0)) return 0;
  if (rate >= 1.0) return std::numeric_limits<std::uint64_t>::max();
  return static_cast<std::uint64_t>(std::ldexp(rate, 64));
}

inline bool in_sampled_set(const Prf& prf, std::uint64_t i, double rate) {
  if (rate >= 1.0) return true;
  return prf.u64(i) < rate_threshold(rate);
}

// {i in [1..n] : in_sampled_set(prf, i, rate)}.
inline PositionSet sampled_set(const Prf& prf, std::size_t n, double rate) {
  std::vector<Pos> v;
  if (rate >= 1.0) {
    v.resize(n);
    std::iota(v.begin(), v.end(), Pos{1});
  } else {
    const std::uint64_t thr = rate_threshold(rate);
    for (std::size_t i = 1; i <= n; ++i)
      if (prf.u64(i) < thr) v.push_back(static_cast<Pos>(i));
  }
  return PositionSet(n, std::move(v));
}

// Exact non-negative rational with 64-bit parts.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational of(std::int64_t num, std::int64_t den) {
    require(den != 0, "zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    return {num / (g == 0 ? 1 : g), den / (g == 0 ? 1 : g)};
  }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::int64_t floor() const { return num >= 0 ? num / den : -((-num + den - 1) / den); }

  friend Rational operator+(Rational a, Rational b) { return of(a.num * b.den + b.num * a.den, a.den * b.den); }
  friend Rational operator*(Rational a, Rational b) { return of(a.num * b.num, a.den * b.den); }
  friend bool operator==(const Rational&, const Rational&) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    const auto l = static_cast<__int128>(a.num) * b.den;
    const auto r = static_cast<__int128>(b.num) * a.den;
    return l < r ? std::strong_ordering::less : (l > r ? std::strong_ordering::greater : std::strong_ordering::equal);
  }
};

inline Rational rational(std::int64_t x) { return {x, 1}; }

// Shared parameters of one scheme instance. Identical inputs give identical values.
struct SchemeParams {
  std::uint32_t n = 0;
  std::uint32_t k = 0;
  std::optional<double> eps;  // approximate schemes only
  Seed seed;
  std::uint64_t sigma = 256;

  std::uint32_t ell = 0;             // floor(n / 42k); 0 in the fallback regime
  std::optional<Rational> gamma;     // n / (3 ell k)
  bool fallback = true;
  std::uint64_t prime = 0;
  std::uint64_t omega = 0;           // element of order n in GF(prime)
  std::uint32_t t = 0;               // syndrome capacity ceil(18 ln n)
  std::uint32_t verify_points = 0;   // ceil(3 log2 n)
  double eps_eff = 0.0;              // min(eps, 1/4)
  double exact_rate = 1.0;           // 9 ln n / k
  double gate_rate = 1.0;            // 4 k ln n / n
  double np_rate = 1.0;              // 2 * 2 sqrt(ln n / k)
  double pp_rate = 1.0;              // 2 * sqrt(ln n / (eps^2 k))
  double alt_rate = 1.0;             // 2 * sqrt(ln n / (eps^2 k))
  std::uint32_t ams_buckets = 0;     // ceil(8 / eps^2)
  std::uint32_t ams_groups = 0;      // ceil(ln n), odd

  bool approximate() const { return eps.has_value(); }

  // gamma * k = n / (3 ell).
  Rational gamma_k() const { return Rational::of(n, 3 * static_cast<std::int64_t>(ell)); }
  // alpha = 3 gamma k = n / ell.
  Rational alpha() const { return Rational::of(n, ell); }
  // beta for H_{n,k}: gamma k; for H'_{n,k}: (gamma + 1) k.
  Rational beta_h() const { return gamma_k(); }
  Rational beta_h_prime() const { return gamma_k() + rational(k); }

  // Label prefix binding PRF streams to this instance.
  std::string label(std::string_view what) const {
    return std::string(what) + "/n=" + std::to_string(n) + "/k=" + std::to_string(k);
  }

  friend bool operator==(const SchemeParams&, const SchemeParams&) = default;
};

inline double clamp_rate(double r) { return r < 0.0 ? 0.0 : (r > 1.0 ? 1.0 : r); }

inline SchemeParams make_params(std::size_t n, std::size_t k, std::optional<double> eps, const Seed& seed,
                                std::uint64_t sigma = 256) {
  require(n >= 1 && n <= kMaxLength, "n must be in [1, 2^15]");
  require(k >= 1 && k <= n, "k must be in [1, n]");
  require(sigma >= 2 && sigma <= kMaxSigma, "alphabet size must be in [2, 2^30]");
  if (eps) require(*eps > 0.0 && *eps < 1.0, "eps must be in (0, 1)");

  SchemeParams p;
  p.n = static_cast<std::uint32_t>(n);
  p.k = static_cast<std::uint32_t>(k);
  p.eps = eps;
  p.seed = seed;
  p.sigma = sigma;
  p.ell = static_cast<std::uint32_t>(n / (42 * k));
  p.fallback = p.ell == 0;
  if (!p.fallback) p.gamma = Rational::of(static_cast<std::int64_t>(n), 3 * static_cast<std::int64_t>(p.ell) * static_cast<std::int64_t>(k));

  const std::uint64_t nsq = static_cast<std::uint64_t>(n) * n;
  p.prime = prime_congruent_one(std::max({2 * sigma + 1, nsq, std::uint64_t{1} << 17}), n);
  p.omega = element_of_order(PrimeField(p.prime), n);

  const double ln_n = std::log(static_cast<double>(n));
  p.t = std::max<std::uint32_t>(1, static_cast<std::uint32_t>(std::ceil(18.0 * ln_n)));
  p.verify_points = std::max<std::uint32_t>(1, static_cast<std::uint32_t>(std::ceil(3.0 * std::log2(static_cast<double>(n)))));
  const double kd = static_cast<double>(k);
  p.exact_rate = clamp_rate(9.0 * ln_n / kd);
  p.gate_rate = clamp_rate(4.0 * kd * ln_n / static_cast<double>(n));
  p.np_rate = clamp_rate(2.0 * 2.0 * std::sqrt(ln_n / kd));
  if (eps) {
    p.eps_eff = std::min(*eps, 0.25);
    const double e2 = p.eps_eff * p.eps_eff;
    p.pp_rate = clamp_rate(2.0 * std::sqrt(ln_n / (e2 * kd)));
    p.alt_rate = p.pp_rate;
    p.ams_buckets = static_cast<std::uint32_t>(std::ceil(8.0 / e2));
    p.ams_groups = std::max<std::uint32_t>(1, static_cast<std::uint32_t>(std::ceil(ln_n))) | 1U;
  }
  return p;
}

// Karp-Rabin polynomial fingerprint sum x^(i-1) val(S[i]) mod p, with val(s) = s + 1.
inline std::uint64_t kr_fingerprint(const PrimeField& f, std::uint64_t x, std::span<const Symbol> s) {
  std::uint64_t acc = 0;
  for (std::size_t i = s.size(); i-- > 0;) acc = f.add(f.mul(acc, x), f.reduce(std::uint64_t{s[i]} + 1));
  return acc;
}

// Arithmetic modulo the Mersenne prime 2^61 - 1.
namespace m61 {
inline constexpr std::uint64_t kP = (std::uint64_t{1} << 61) - 1;
inline std::uint64_t reduce(unsigned __int128 x) {
  std::uint64_t lo = static_cast<std::uint64_t>(x & kP);
  std::uint64_t hi = static_cast<std::uint64_t>(x >> 61);
  std::uint64_t r = lo + hi;
  while (r >= kP) r -= kP;
  return r;
}
inline std::uint64_t mul(std::uint64_t a, std::uint64_t b) { return reduce(static_cast<unsigned __int128>(a) * b); }
inline std::uint64_t add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = a + b;
  return r >= kP ? r - kP : r;
}
inline std::uint64_t sub(std::uint64_t a, std::uint64_t b) { return a >= b ? a - b : a + kP - b; }
}  // namespace m61

// Content-only randomised membership test h(u) for substrings of a fixed length.
class SubstringGate {
 public:
  SubstringGate(const SchemeParams& params, std::size_t window)
      : prf_(params.seed, params.label("gate")), window_(window), threshold_(rate_threshold(params.gate_rate)),
        always_(params.gate_rate >= 1.0) {
    const Prf base_prf(params.seed, params.label("gate-fingerprint"));
    base_ = 2 + base_prf.u64(0) % (m61::kP - 3);
    top_ = 1;
    for (std::size_t i = 1; i < window_; ++i) top_ = m61::mul(top_, base_);
  }

  std::size_t window() const { return window_; }

  // sum_{j} u[j] * base^(w-1-j) mod 2^61-1 with symbols offset by one.
  std::uint64_t fingerprint(std::span<const Symbol> u) const {
    require(u.size() == window_, "gate window length mismatch");
    std::uint64_t h = 0;
    for (Symbol c : u) h = m61::add(m61::mul(h, base_), std::uint64_t{c} + 1);
    return h;
  }

  bool accepts_fingerprint(std::uint64_t fp) const { return always_ || prf_.u64(fp) < threshold_; }
  bool accepts(std::span<const Symbol> u) const { return accepts_fingerprint(fingerprint(u)); }

  // fingerprint of S*[i..i+w-1] for every i in [1..n], by rolling.
  std::vector<std::uint64_t> window_fingerprints(const Str& s) const {
    const std::size_t n = s.size();
    std::vector<std::uint64_t> out(n);
    std::uint64_t h = 0;
    for (std::size_t j = 0; j < window_; ++j) h = m61::add(m61::mul(h, base_), std::uint64_t{s.cyclic(static_cast<std::int64_t>(j) + 1)} + 1);
    out[0] = h;
    for (std::size_t i = 2; i <= n; ++i) {
      const std::uint64_t drop = std::uint64_t{s.cyclic(static_cast<std::int64_t>(i) - 1)} + 1;
      const std::uint64_t add = std::uint64_t{s.cyclic(static_cast<std::int64_t>(i + window_) - 1)} + 1;
      h = m61::sub(h, m61::mul(drop, top_));
      h = m61::add(m61::mul(h, base_), add);
      out[i - 1] = h;
    }
    return out;
  }

 private:
  Prf prf_;
  std::size_t window_;
  std::uint64_t threshold_;
  bool always_;
  std::uint64_t base_ = 0;
  std::uint64_t top_ = 1;
};

}  // namespace circsketch
