#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "circsketch/field.hpp"
#include "circsketch/randomness.hpp"
#include "circsketch/strings.hpp"

namespace circsketch {

// Power sums of the restricted string over locators omega^q, plus randomised check values.
struct SyndromeSketch {
  std::vector<std::uint64_t> m1;      // sum val * omega^(qj), j < 2t
  std::vector<std::uint64_t> m2;      // sum val^2 * omega^(qj), j < 2t
  std::vector<std::uint64_t> verify;  // sum val * r_c^q, c < v

  friend bool operator==(const SyndromeSketch&, const SyndromeSketch&) = default;
};

// Coordinate-wise difference of two syndrome sketches.
struct SyndromeDiff {
  std::vector<std::uint64_t> d1;
  std::vector<std::uint64_t> d2;
  std::vector<std::uint64_t> dv;

  bool moments_zero() const {
    return std::all_of(d1.begin(), d1.end(), [](auto x) { return x == 0; }) &&
           std::all_of(d2.begin(), d2.end(), [](auto x) { return x == 0; });
  }
};

// Connection polynomial C(x) = 1 + c_1 x + ... + c_L x^L of the shortest LFSR generating s.
struct Lfsr {
  std::vector<std::uint64_t> c;
  std::size_t length = 0;
};

inline Lfsr berlekamp_massey(const PrimeField& f, std::span<const std::uint64_t> s) {
  std::vector<std::uint64_t> c{1};
  std::vector<std::uint64_t> b{1};
  std::size_t len = 0;
  std::size_t shift = 1;
  std::uint64_t bd = 1;
  for (std::size_t r = 0; r < s.size(); ++r) {
    std::uint64_t d = s[r];
    for (std::size_t i = 1; i <= len && i < c.size(); ++i) d = f.add(d, f.mul(c[i], s[r - i]));
    if (d == 0) {
      ++shift;
      continue;
    }
    const std::uint64_t coef = f.mul(d, f.inv(bd));
    std::vector<std::uint64_t> prev;
    const bool grow = 2 * len <= r;
    if (grow) prev = c;
    if (c.size() < b.size() + shift) c.resize(b.size() + shift, 0);
    for (std::size_t i = 0; i < b.size(); ++i) c[i + shift] = f.sub(c[i + shift], f.mul(coef, b[i]));
    if (grow) {
      len = r + 1 - len;
      b = std::move(prev);
      bd = d;
      shift = 1;
    } else {
      ++shift;
    }
  }
  c.resize(len + 1, 0);
  return {std::move(c), len};
}

// Exact k-mismatch sketch over a sampled position set A: recovers MI_A whenever |MI_A| <= t.
class SyndromeCodec {
 public:
  // General form: explicit capacity t and v verification points drawn from verify_prf.
  SyndromeCodec(std::size_t n, std::uint64_t sigma, std::uint64_t prime, std::uint64_t omega, std::size_t t,
                std::size_t v, PositionSet a, const Prf& verify_prf)
      : n_(n), sigma_(sigma), f_(prime), omega_(omega), t_(t), a_(std::move(a)) {
    require(a_.universe() == n_, "sampled set universe mismatch");
    require(t_ >= 1, "capacity must be positive");
    require(f_.pow(omega_, n_) == 1, "omega must have order dividing n");
    full_ = a_.size() == n_;
    mask_.assign(n_ + 1, 0);
    for (Pos q : a_.members()) mask_[q] = 1;
    omega_inv_ = f_.inv(omega_);
    pow_omega_.resize(n_ + 1);
    pow_omega_inv_.resize(n_ + 1);
    pow_omega_[0] = pow_omega_inv_[0] = 1;
    for (std::size_t q = 1; q <= n_; ++q) {
      pow_omega_[q] = f_.mul(pow_omega_[q - 1], omega_);
      pow_omega_inv_[q] = f_.mul(pow_omega_inv_[q - 1], omega_inv_);
    }
    points_.resize(v);
    rpow_.assign(v, std::vector<std::uint32_t>(n_ + 1));
    rinv_pow_.assign(v, std::vector<std::uint32_t>(n_ + 1));
    for (std::size_t c = 0; c < v; ++c) {
      points_[c] = 1 + verify_prf.below(c, prime - 1);
      const std::uint64_t inv = f_.inv(points_[c]);
      rpow_[c][0] = rinv_pow_[c][0] = 1;
      for (std::size_t q = 1; q <= n_; ++q) {
        rpow_[c][q] = static_cast<std::uint32_t>(f_.mul(rpow_[c][q - 1], points_[c]));
        rinv_pow_[c][q] = static_cast<std::uint32_t>(f_.mul(rinv_pow_[c][q - 1], inv));
      }
    }
  }

  std::size_t length() const { return n_; }
  std::size_t capacity() const { return t_; }
  std::size_t verify_points() const { return points_.size(); }
  const PrimeField& field() const { return f_; }
  const PositionSet& sampled() const { return a_; }
  bool in_sample(std::size_t q) const { return mask_[q] != 0; }
  bool full_sample() const { return full_; }

  SyndromeSketch encode(const Str& s) const { return encode_rotation(s, 0); }

  // Sketch of cyc^i(S) restricted to A.
  SyndromeSketch encode_rotation(const Str& s, std::int64_t i) const {
    const std::vector<Pos> one{static_cast<Pos>(shift_mod(i, n_))};
    return encode_rotations(s, one).front();
  }

  // Sketches of cyc^i(S) for every i in idx (positions in [1..n]; n is the identity rotation).
  std::vector<SyndromeSketch> encode_rotations(const Str& s, std::span<const Pos> idx) const {
    require(s.size() == n_, "string length differs from codec length");
    check_alphabet(s);
    std::vector<SyndromeSketch> out;
    out.reserve(idx.size());
    if (full_) {
      const Base base = base_terms(s);
      for (Pos i : idx) out.push_back(rotate_base(base, i % n_));
    } else {
      for (Pos i : idx) out.push_back(encode_generic(s, i % n_));
    }
    return out;
  }

  SyndromeDiff difference(const SyndromeSketch& x, const SyndromeSketch& y) const {
    check_shape(x);
    check_shape(y);
    SyndromeDiff d;
    d.d1.resize(2 * t_);
    d.d2.resize(2 * t_);
    d.dv.resize(points_.size());
    for (std::size_t j = 0; j < 2 * t_; ++j) {
      d.d1[j] = f_.sub(x.m1[j], y.m1[j]);
      d.d2[j] = f_.sub(x.m2[j], y.m2[j]);
    }
    for (std::size_t c = 0; c < points_.size(); ++c) d.dv[c] = f_.sub(x.verify[c], y.verify[c]);
    return d;
  }

  // MI_A(S, T) from the sketches of S and T, or nullopt (OVERFLOW).
  std::optional<MismatchInfo> decode(const SyndromeSketch& x, const SyndromeSketch& y) const {
    return decode_diff(difference(x, y));
  }

  std::optional<MismatchInfo> decode_diff(const SyndromeDiff& d) const {
    if (d.moments_zero()) {
      if (std::all_of(d.dv.begin(), d.dv.end(), [](auto v) { return v == 0; })) return MismatchInfo(n_, {});
      return std::nullopt;
    }
    const Lfsr lf = berlekamp_massey(f_, d.d1);
    const std::size_t len = lf.length;
    if (len == 0 || len > t_) return std::nullopt;
    // the same recurrence must generate the squared-value moments
    for (std::size_t j = len; j < 2 * t_; ++j) {
      std::uint64_t acc = d.d2[j];
      for (std::size_t l = 1; l <= len; ++l) acc = f_.add(acc, f_.mul(lf.c[l], d.d2[j - l]));
      if (acc != 0) return std::nullopt;
    }
    const std::vector<Pos> roots = chien(lf);
    if (roots.size() != len) return std::nullopt;

    const auto omega1 = error_evaluator(lf, d.d1);
    const auto omega2 = error_evaluator(lf, d.d2);
    // C'(x) coefficients
    std::vector<std::uint64_t> deriv(len, 0);
    for (std::size_t l = 1; l <= len; ++l) deriv[l - 1] = f_.mul(lf.c[l], l % f_.modulus());

    const std::uint64_t inv2 = f_.inv(2);
    std::vector<Mismatch> entries;
    entries.reserve(len);
    for (Pos q : roots) {
      const std::uint64_t x = pow_omega_[q];
      const std::uint64_t xinv = pow_omega_inv_[q];
      const std::uint64_t dc = eval(deriv, xinv);
      if (dc == 0) return std::nullopt;
      const std::uint64_t scale = f_.neg(f_.mul(x, f_.inv(dc)));
      const std::uint64_t y = f_.mul(scale, eval(omega1, xinv));
      const std::uint64_t z = f_.mul(scale, eval(omega2, xinv));
      if (y == 0) return std::nullopt;
      const std::uint64_t sum = f_.mul(z, f_.inv(y));  // val(a) + val(b)
      const std::uint64_t a = f_.mul(f_.add(sum, y), inv2);
      const std::uint64_t b = f_.mul(f_.sub(sum, y), inv2);
      if (a < 1 || a > sigma_ || b < 1 || b > sigma_ || a == b) return std::nullopt;
      entries.push_back({q, static_cast<Symbol>(a - 1), static_cast<Symbol>(b - 1)});
    }
    MismatchInfo mi(n_, std::move(entries));
    if (!verify(d, mi)) return std::nullopt;
    return mi;
  }

  // True when the randomised check values agree with the candidate mismatch list.
  bool verify(const SyndromeDiff& d, const MismatchInfo& mi) const {
    for (std::size_t c = 0; c < points_.size(); ++c) {
      std::uint64_t acc = 0;
      for (const auto& m : mi.entries()) {
        const std::uint64_t delta = f_.sub(m.left + 1ULL, m.right + 1ULL);
        acc = f_.add(acc, f_.mul(delta, rpow_[c][m.pos]));
      }
      if (acc != d.dv[c]) return false;
    }
    return true;
  }

  // d's moments equal those of base rotated by delta positions: d_j = omega^(-delta j) base_j.
  bool is_rotation_of(const SyndromeDiff& d, const SyndromeDiff& base, std::int64_t delta) const {
    const std::uint64_t step = pow_omega_inv_[shift_mod(delta, n_)];
    std::uint64_t w = 1;
    for (std::size_t j = 0; j < 2 * t_; ++j) {
      if (d.d1[j] != f_.mul(base.d1[j], w) || d.d2[j] != f_.mul(base.d2[j], w)) return false;
      w = f_.mul(w, step);
    }
    return true;
  }

  // Lower bound on |MI_A| available from the first len moments: their linear complexity.
  std::size_t linear_complexity(const SyndromeDiff& d, std::size_t len) const {
    len = std::min(len, d.d1.size());
    return berlekamp_massey(f_, std::span<const std::uint64_t>(d.d1.data(), len)).length;
  }

 private:
  struct Base {
    std::vector<std::uint64_t> m1;
    std::vector<std::uint64_t> m2;
    std::vector<std::vector<std::uint64_t>> prefix;  // prefix[c][i] = sum_{q<=i} val_q r_c^q
  };

  void check_alphabet(const Str& s) const {
    require(s.max_symbol() < sigma_, "symbol outside the alphabet");
  }

  void check_shape(const SyndromeSketch& x) const {
    if (x.m1.size() != 2 * t_ || x.m2.size() != 2 * t_ || x.verify.size() != points_.size())
      throw InconsistencyError("syndrome sketch shape does not match codec");
  }

  Base base_terms(const Str& s) const {
    Base b;
    b.m1.assign(2 * t_, 0);
    b.m2.assign(2 * t_, 0);
    auto sym = s.symbols();
    // m_j = P(omega^j) with P(y) = sum_q val_q y^q, by Horner from the top position
    for (std::size_t j = 0; j < 2 * t_; ++j) {
      const std::uint64_t y = pow_omega_[j % n_];
      std::uint64_t h1 = 0;
      std::uint64_t h2 = 0;
      for (std::size_t q = n_; q >= 1; --q) {
        const std::uint64_t v = sym[q - 1] + 1ULL;
        h1 = f_.reduce(f_.mul(h1, y) + v);
        h2 = f_.reduce(f_.mul(h2, y) + f_.mul(v, v));
      }
      b.m1[j] = f_.mul(h1, y);
      b.m2[j] = f_.mul(h2, y);
    }
    b.prefix.assign(points_.size(), std::vector<std::uint64_t>(n_ + 1, 0));
    for (std::size_t c = 0; c < points_.size(); ++c) {
      auto& pre = b.prefix[c];
      for (std::size_t q = 1; q <= n_; ++q) pre[q] = f_.add(pre[q - 1], f_.mul(sym[q - 1] + 1ULL, rpow_[c][q]));
    }
    return b;
  }

  // cyc^i(S): moments scale by omega^(-ij); check values split at the wrap point.
  SyndromeSketch rotate_base(const Base& b, std::size_t i) const {
    SyndromeSketch out;
    out.m1.resize(2 * t_);
    out.m2.resize(2 * t_);
    const std::uint64_t step = pow_omega_inv_[i];
    std::uint64_t w = 1;
    for (std::size_t j = 0; j < 2 * t_; ++j) {
      out.m1[j] = f_.mul(b.m1[j], w);
      out.m2[j] = f_.mul(b.m2[j], w);
      w = f_.mul(w, step);
    }
    out.verify.resize(points_.size());
    for (std::size_t c = 0; c < points_.size(); ++c) {
      const auto& pre = b.prefix[c];
      const std::uint64_t tail = f_.sub(pre[n_], pre[i]);
      out.verify[c] = f_.add(f_.mul(rinv_pow_[c][i], tail), f_.mul(rpow_[c][n_ - i], pre[i]));
    }
    return out;
  }

  SyndromeSketch encode_generic(const Str& s, std::size_t i) const {
    SyndromeSketch out;
    out.m1.assign(2 * t_, 0);
    out.m2.assign(2 * t_, 0);
    out.verify.assign(points_.size(), 0);
    for (Pos q : a_.members()) {
      const std::uint64_t v = s.cyclic(static_cast<std::int64_t>(q + i)) + 1ULL;
      const std::uint64_t v2 = f_.mul(v, v);
      const std::uint64_t x = pow_omega_[q];
      std::uint64_t pw = 1;
      for (std::size_t j = 0; j < 2 * t_; ++j) {
        out.m1[j] = f_.add(out.m1[j], f_.mul(v, pw));
        out.m2[j] = f_.add(out.m2[j], f_.mul(v2, pw));
        pw = f_.mul(pw, x);
      }
      for (std::size_t c = 0; c < points_.size(); ++c) out.verify[c] = f_.add(out.verify[c], f_.mul(v, rpow_[c][q]));
    }
    return out;
  }

  // Positions q in [1..n] with C(omega^-q) = 0; stops after length(C) roots.
  std::vector<Pos> chien(const Lfsr& lf) const {
    const std::size_t len = lf.length;
    std::vector<std::uint64_t> term(lf.c.begin(), lf.c.begin() + static_cast<std::ptrdiff_t>(len + 1));
    std::vector<std::uint64_t> step(len + 1);
    for (std::size_t l = 0; l <= len; ++l) step[l] = pow_omega_inv_[l % n_];
    std::vector<Pos> roots;
    for (std::size_t q = 1; q <= n_; ++q) {
      std::uint64_t acc = 0;
      for (std::size_t l = 0; l <= len; ++l) {
        term[l] = f_.mul(term[l], step[l]);
        acc += term[l];
      }
      if (f_.reduce(acc) == 0) {
        if (!mask_[q]) return {};
        roots.push_back(static_cast<Pos>(q));
        if (roots.size() == len) break;
      }
    }
    return roots;
  }

  // Omega(x) = S(x) C(x) mod x^L.
  std::vector<std::uint64_t> error_evaluator(const Lfsr& lf, const std::vector<std::uint64_t>& s) const {
    const std::size_t len = lf.length;
    std::vector<std::uint64_t> om(len, 0);
    for (std::size_t i = 0; i < len; ++i) {
      std::uint64_t acc = 0;
      for (std::size_t l = 0; l <= i; ++l) acc = f_.add(acc, f_.mul(lf.c[l], s[i - l]));
      om[i] = acc;
    }
    return om;
  }

  std::uint64_t eval(const std::vector<std::uint64_t>& poly, std::uint64_t x) const {
    std::uint64_t acc = 0;
    for (std::size_t i = poly.size(); i-- > 0;) acc = f_.add(f_.mul(acc, x), poly[i]);
    return acc;
  }

  std::size_t n_;
  std::uint64_t sigma_;
  PrimeField f_;
  std::uint64_t omega_;
  std::uint64_t omega_inv_ = 1;
  std::size_t t_;
  PositionSet a_;
  bool full_ = false;
  std::vector<std::uint8_t> mask_;
  std::vector<std::uint64_t> pow_omega_;
  std::vector<std::uint64_t> pow_omega_inv_;
  std::vector<std::uint64_t> points_;
  std::vector<std::vector<std::uint32_t>> rpow_;
  std::vector<std::vector<std::uint32_t>> rinv_pow_;
};

// Bucketed AMS sketch of the one-hot encoding of a string: groups x buckets signed counters.
struct AmsSketch {
  std::uint32_t groups = 0;
  std::uint32_t buckets = 0;
  std::vector<std::int32_t> counters;  // counters[g * buckets + b]

  friend bool operator==(const AmsSketch&, const AmsSketch&) = default;
};

class AmsCodec {
 public:
  AmsCodec(std::size_t n, std::uint32_t groups, std::uint32_t buckets, const Prf& prf)
      : n_(n), groups_(groups), buckets_(buckets) {
    require(groups >= 1 && buckets >= 1 && buckets <= (1U << 15), "AMS shape out of range");
    keys_.resize((groups_ + 3) / 4);
    for (std::size_t w = 0; w < keys_.size(); ++w) keys_[w] = prf.u64(w);
  }

  AmsCodec(const SchemeParams& p, const Prf& prf) : AmsCodec(p.n, p.ams_groups, p.ams_buckets, prf) {}

  std::uint32_t groups() const { return groups_; }
  std::uint32_t buckets() const { return buckets_; }

  // Equal codecs produce identical sketches for every input.
  friend bool operator==(const AmsCodec&, const AmsCodec&) = default;

  AmsSketch encode(const Str& s) const { return encode_rotation(s, 0); }

  // Sketch of cyc^i(S): coordinate (q, S[q+i]) for q in [1..n].
  AmsSketch encode_rotation(const Str& s, std::int64_t i) const {
    require(s.size() == n_, "string length differs from codec length");
    AmsSketch out{groups_, buckets_, std::vector<std::int32_t>(std::size_t{groups_} * buckets_, 0)};
    auto sym = s.symbols();
    const std::size_t off = shift_mod(i, n_);
    for (std::size_t w = 0; w < keys_.size(); ++w) {
      const std::uint32_t g0 = static_cast<std::uint32_t>(4 * w);
      const std::uint32_t gcount = std::min<std::uint32_t>(4, groups_ - g0);
      std::int32_t* c0 = out.counters.data() + std::size_t{g0} * buckets_;
      std::int32_t* c1 = c0 + buckets_;
      std::int32_t* c2 = c1 + buckets_;
      std::int32_t* c3 = c2 + buckets_;
      const std::uint64_t key = keys_[w];
      const std::uint64_t nb = buckets_;
      std::size_t src = off;
      auto bump = [nb](std::int32_t* c, std::uint64_t slice) {
        c[(((slice & 0xffffU) >> 1) * nb) >> 15] += static_cast<std::int32_t>((slice & 1U) << 1) - 1;
      };
      if (gcount == 4) {
        for (std::size_t q = 1; q <= n_; ++q) {
          const std::uint64_t h = detail::fmix64(((static_cast<std::uint64_t>(q) << 32) | sym[src]) ^ key);
          if (++src == n_) src = 0;
          bump(c0, h);
          bump(c1, h >> 16);
          bump(c2, h >> 32);
          bump(c3, h >> 48);
        }
      } else {
        std::int32_t* cs[4] = {c0, c1, c2, c3};
        for (std::size_t q = 1; q <= n_; ++q) {
          const std::uint64_t h = detail::fmix64(((static_cast<std::uint64_t>(q) << 32) | sym[src]) ^ key);
          if (++src == n_) src = 0;
          for (std::uint32_t g = 0; g < gcount; ++g) bump(cs[g], h >> (16 * g));
        }
      }
    }
    return out;
  }

  // (bucket, sign) of coordinate (q, c) in group g.
  std::pair<std::uint32_t, int> coordinate(std::uint32_t g, std::size_t q, Symbol c) const {
    const std::uint64_t h = hash(g / 4, q, c);
    const std::uint32_t slice = static_cast<std::uint32_t>(h >> (16 * (g % 4))) & 0xffffU;
    return {((slice >> 1) * buckets_) >> 15, (slice & 1U) ? 1 : -1};
  }

  // Median over groups of half the squared counter distance; estimates Ham.
  double decode(const AmsSketch& x, const AmsSketch& y) const {
    return *decode_capped(x, y, std::numeric_limits<double>::infinity());
  }

  // As decode, or nullopt once the median provably exceeds cap.
  std::optional<double> decode_capped(const AmsSketch& x, const AmsSketch& y, double cap) const {
    check(x);
    check(y);
    const double limit = 2.0 * cap;
    const std::uint32_t need_over = groups_ / 2 + 1;
    std::uint32_t over = 0;
    std::vector<double> est;
    est.reserve(groups_);
    for (std::uint32_t g = 0; g < groups_; ++g) {
      const std::int32_t* a = x.counters.data() + std::size_t{g} * buckets_;
      const std::int32_t* b = y.counters.data() + std::size_t{g} * buckets_;
      std::int64_t acc = 0;
      bool exceeded = false;
      for (std::uint32_t j = 0; j < buckets_; ++j) {
        const std::int64_t d = static_cast<std::int64_t>(a[j]) - b[j];
        acc += d * d;
        if (static_cast<double>(acc) > limit) {
          exceeded = true;
          break;
        }
      }
      if (exceeded) {
        if (++over >= need_over) return std::nullopt;
        est.push_back(std::numeric_limits<double>::infinity());
      } else {
        est.push_back(static_cast<double>(acc) / 2.0);
      }
    }
    std::nth_element(est.begin(), est.begin() + groups_ / 2, est.end());
    return est[groups_ / 2];
  }

 private:
  std::uint64_t hash(std::size_t word, std::size_t q, Symbol c) const {
    return detail::fmix64(((static_cast<std::uint64_t>(q) << 32) | c) ^ keys_[word]);
  }

  void check(const AmsSketch& x) const {
    if (x.groups != groups_ || x.buckets != buckets_ || x.counters.size() != std::size_t{groups_} * buckets_)
      throw InconsistencyError("AMS sketch shape does not match codec");
  }

  std::size_t n_;
  std::uint32_t groups_;
  std::uint32_t buckets_;
  std::vector<std::uint64_t> keys_;
};

}  // namespace circsketch
