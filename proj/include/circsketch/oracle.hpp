#pragma once

// Brute-force reference implementations and planted-instance generators.
// Nothing here calls into the sketching modules.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "circsketch/randomness.hpp"
#include "circsketch/strings.hpp"

namespace circsketch::oracle {

inline std::size_t hamming(const Str& s, const Str& t) {
  std::size_t d = 0;
  for (std::size_t i = 1; i <= s.size(); ++i) d += s.at(i) != t.at(i);
  return d;
}

// Ham(S, cyc^m(T)) by direct indexing.
inline std::size_t hamming_at(const Str& s, const Str& t, std::int64_t m) {
  const auto n = static_cast<std::int64_t>(s.size());
  std::size_t d = 0;
  for (std::int64_t i = 1; i <= n; ++i) {
    const std::int64_t j = ((i + m - 1) % n + n) % n + 1;
    d += s.at(static_cast<std::size_t>(i)) != t.at(static_cast<std::size_t>(j));
  }
  return d;
}

inline std::vector<Mismatch> mismatches(const Str& s, const Str& t) {
  std::vector<Mismatch> out;
  for (std::size_t i = 1; i <= s.size(); ++i)
    if (s.at(i) != t.at(i)) out.push_back({static_cast<Pos>(i), s.at(i), t.at(i)});
  return out;
}

struct ShiftDistance {
  std::size_t value;
  std::size_t shift;  // smallest minimising m in [0, n)
};

// min over all m of Ham(S, cyc^m(T)).
inline ShiftDistance shift_distance(const Str& s, const Str& t) {
  ShiftDistance best{s.size() + 1, 0};
  for (std::size_t m = 0; m < s.size(); ++m) {
    const std::size_t d = hamming_at(s, t, static_cast<std::int64_t>(m));
    if (d < best.value) best = {d, m};
  }
  return best;
}

// True when some shift has distance below h.
inline bool some_shift_below(const Str& s, const Str& t, std::size_t h) {
  const std::size_t n = s.size();
  auto x = s.symbols();
  auto y = t.symbols();
  for (std::size_t m = 0; m < n; ++m) {
    std::size_t d = 0;
    for (std::size_t q = 0; q < n && d < h; ++q) d += x[q] != y[(q + m) % n];
    if (d < h) return true;
  }
  return false;
}

inline std::vector<Symbol> rotated(const Str& s, std::int64_t m) {
  const auto n = static_cast<std::int64_t>(s.size());
  std::vector<Symbol> v;
  for (std::int64_t i = 1; i <= n; ++i) v.push_back(s.at(static_cast<std::size_t>(((i + m - 1) % n + n) % n + 1)));
  return v;
}

// Smallest p with u[i] = u[i + p] for all valid i, by trying every p.
inline std::size_t period(const std::vector<Symbol>& u) {
  for (std::size_t p = 1; p < u.size(); ++p) {
    bool ok = true;
    for (std::size_t i = 0; i + p < u.size() && ok; ++i) ok = u[i] == u[i + p];
    if (ok) return p;
  }
  return u.size();
}

// Smallest divisor d of n with S = (S[1..d])^(n/d).
inline std::size_t root(const Str& s) {
  const std::size_t n = s.size();
  for (std::size_t d = 1; d <= n; ++d) {
    if (n % d) continue;
    bool ok = true;
    for (std::size_t i = 1; i + d <= n && ok; ++i) ok = s.at(i) == s.at(i + d);
    if (ok) return d;
  }
  return n;
}

// Lexicographically least rotation, by comparing all of them.
inline std::vector<Symbol> least_rotation(const Str& s) {
  std::vector<Symbol> best = rotated(s, 0);
  for (std::size_t m = 1; m < s.size(); ++m) best = std::min(best, rotated(s, static_cast<std::int64_t>(m)));
  return best;
}

// min over divisors d of n with d * alpha <= n of the distance to the best d-periodic string.
inline std::optional<std::size_t> pseudo_periodic_distance(const Str& s, Rational alpha) {
  const std::size_t n = s.size();
  std::optional<std::size_t> best;
  for (std::size_t d = 1; d <= n; ++d) {
    if (n % d) continue;
    if (static_cast<__int128>(d) * alpha.num > static_cast<__int128>(n) * alpha.den) continue;
    std::size_t agree = 0;
    for (std::size_t r = 1; r <= d; ++r) {
      std::map<Symbol, std::size_t> counts;
      for (std::size_t i = r; i <= n; i += d) ++counts[s.at(i)];
      std::size_t top = 0;
      for (const auto& [sym, c] : counts) top = std::max(top, c);
      agree += top;
    }
    if (!best || n - agree < *best) best = n - agree;
  }
  return best;
}

inline bool pseudo_periodic(const Str& s, Rational alpha, Rational beta) {
  const auto d = pseudo_periodic_distance(s, alpha);
  return d && Rational{static_cast<std::int64_t>(*d), 1} <= beta;
}

enum class Regime { nonperiodic, pseudoperiodic, mixed };

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::nonperiodic:
      return "nonperiodic";
    case Regime::pseudoperiodic:
      return "pseudoperiodic";
    case Regime::mixed:
      return "mixed";
  }
  return "?";
}

struct PlantedInstance {
  Str s1;
  Str s2;
  std::size_t h;              // sh(S1, S2) = Ham(S1, cyc^shift(S2))
  std::size_t shift;          // planted shift in [0, n)
  std::size_t base_period;    // period of the planted base, 0 when nonperiodic
  std::size_t noise;          // Ham(S1, base) for periodic regimes
  Regime regime;
};

class Generator {
 public:
  explicit Generator(std::uint64_t seed) : rng_(seed) {}

  std::mt19937_64& rng() { return rng_; }

  std::size_t uniform(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng_);
  }

  Str random_string(std::size_t n, std::uint64_t sigma) {
    std::vector<Symbol> v(n);
    std::uniform_int_distribution<std::uint64_t> d(0, sigma - 1);
    for (auto& c : v) c = static_cast<Symbol>(d(rng_));
    return Str(std::move(v));
  }

  // Replace `count` distinct positions by different symbols.
  Str substitute(const Str& s, std::size_t count, std::uint64_t sigma) {
    const std::size_t n = s.size();
    require(count <= n, "more substitutions than positions");
    std::vector<Symbol> v(s.symbols().begin(), s.symbols().end());
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = 0; i < count; ++i) {
      std::swap(idx[i], idx[uniform(i, n - 1)]);
      const Symbol old = v[idx[i]];
      Symbol c = old;
      while (c == old) c = static_cast<Symbol>(uniform(0, sigma - 1));
      v[idx[i]] = c;
    }
    return Str(std::move(v));
  }

  // Primitive word of length d.
  std::vector<Symbol> primitive_word(std::size_t d, std::uint64_t sigma) {
    for (;;) {
      std::vector<Symbol> q(d);
      for (auto& c : q) c = static_cast<Symbol>(uniform(0, sigma - 1));
      if (d == 1 || root(Str(q)) == d) return q;
    }
  }

  struct Periodic {
    Str noisy;
    Str base;  // Q^(n/d)
    std::size_t period;
  };

  // Q^(n/d) with d | n, d <= max_period, plus exactly `noise` substitutions.
  Periodic periodic_with_noise(std::size_t n, std::size_t max_period, std::size_t noise, std::uint64_t sigma) {
    std::vector<std::size_t> divs;
    for (std::size_t d = 1; d <= std::min(n, max_period); ++d)
      if (n % d == 0) divs.push_back(d);
    require(!divs.empty(), "no admissible period");
    const std::size_t d = divs[uniform(0, divs.size() - 1)];
    const auto q = primitive_word(d, sigma);
    std::vector<Symbol> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = q[i % d];
    Str base(std::move(v));
    Str noisy = substitute(base, noise, sigma);
    return {std::move(noisy), std::move(base), d};
  }

  // Pair with sh(S1, S2) = h attained at the planted shift; rejection-sampled.
  PlantedInstance planted(const SchemeParams& p, std::size_t h, Regime regime) {
    require(h <= p.n, "planted distance exceeds n");
    require(regime == Regime::nonperiodic || !p.fallback, "periodic regimes need n >= 42k");
    const std::size_t n = p.n;
    for (int attempt = 0; attempt < 1000; ++attempt) {
      PlantedInstance inst{};
      inst.regime = regime;
      inst.h = h;
      if (regime == Regime::nonperiodic) {
        inst.s1 = random_string(n, p.sigma);
        if (!p.fallback && pseudo_periodic(inst.s1, p.alpha(), p.beta_h_prime())) continue;
      } else {
        const Rational gk = p.gamma_k();
        const auto lo_h = static_cast<std::size_t>(gk.floor());
        const auto hi = static_cast<std::size_t>((gk + rational(p.k)).floor());
        const std::size_t noise = regime == Regime::pseudoperiodic ? uniform(0, lo_h) : uniform(lo_h + 1, hi);
        auto per = periodic_with_noise(n, p.ell, noise, p.sigma);
        inst.s1 = std::move(per.noisy);
        inst.base_period = per.period;
        inst.noise = noise;
        const bool in_h = pseudo_periodic(inst.s1, p.alpha(), p.beta_h());
        if (regime == Regime::pseudoperiodic && !in_h) continue;
        if (regime == Regime::mixed && (in_h || !pseudo_periodic(inst.s1, p.alpha(), p.beta_h_prime()))) continue;
      }
      const Str t = substitute(inst.s1, h, p.sigma);
      inst.shift = uniform(0, n - 1);
      inst.s2 = Str(rotated(t, -static_cast<std::int64_t>(inst.shift)));
      if (h > 0 && some_shift_below(inst.s1, inst.s2, h)) continue;
      return inst;
    }
    throw DomainError("planted instance generation exceeded its rejection budget");
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace circsketch::oracle
