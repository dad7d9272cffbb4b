#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "circsketch/hamming_sketch.hpp"
#include "circsketch/scheme.hpp"
#include "circsketch/selection.hpp"
#include "circsketch/strings.hpp"

namespace circsketch {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Decoder output: a non-negative value or infinity, plus the minimising shift for shift decoders.
struct DecodeResult {
  double value = kInfinity;
  std::optional<std::size_t> shift;

  bool finite() const { return std::isfinite(value); }
  static DecodeResult infinite() { return {}; }
  static DecodeResult of(double v, std::optional<std::size_t> m = std::nullopt) { return {v, m}; }
};

// 0-mismatch circular sketch: fingerprint of minrot(S), |root(S)|, and S = cyc^shift(minrot(S)).
struct ZeroSketch {
  std::uint64_t fingerprint = 0;
  std::uint32_t root = 0;
  std::uint32_t shift = 0;

  friend bool operator==(const ZeroSketch&, const ZeroSketch&) = default;
};

inline ZeroSketch encode_zero(const Str& s, const Scheme& scheme) {
  const MinRotation mr = min_rotation(s);
  return {kr_fingerprint(scheme.field(), scheme.zero_point(), mr.rotation.symbols()),
          static_cast<std::uint32_t>(root_length(s)), static_cast<std::uint32_t>(mr.shift)};
}

// 0 when S1 = cyc^m(S2) (up to fingerprint collision), otherwise infinity.
inline double decode_zero(const ZeroSketch& a, const ZeroSketch& b, std::int64_t m) {
  if (a.fingerprint != b.fingerprint || a.root != b.root || a.root == 0) return kInfinity;
  const std::int64_t d = m + static_cast<std::int64_t>(b.shift) - static_cast<std::int64_t>(a.shift);
  const auto r = static_cast<std::int64_t>(a.root);
  return ((d % r) + r) % r == 0 ? 0.0 : kInfinity;
}

struct ExactNp {
  std::vector<Pos> indices;                // f(S), ascending
  std::vector<SyndromeSketch> sketches;    // sketch of cyc^i(S) per index
  friend bool operator==(const ExactNp&, const ExactNp&) = default;
};

struct ExactPp {
  ZeroSketch base;   // of S'
  MismatchInfo mi;   // MI(S, S')
  friend bool operator==(const ExactPp&, const ExactPp&) = default;
};

struct ApproxNp {
  std::vector<Pos> indices;            // f(S) restricted to A u B, ascending
  std::vector<AmsSketch> sketches;
  friend bool operator==(const ApproxNp&, const ApproxNp&) = default;
};

struct ApproxPp {
  ZeroSketch base;         // of S'
  std::uint32_t full_ham;  // Ham(S, S')
  MismatchInfo mi;         // MI(S, S') restricted to A u B
  friend bool operator==(const ApproxPp&, const ApproxPp&) = default;
};

struct Alt {
  std::vector<Pos> positions;  // A u B, ascending
  std::vector<Symbol> symbols;
  friend bool operator==(const Alt&, const Alt&) = default;
};

enum class SketchMode : std::uint8_t { exact = 0, relaxed = 1, leveled = 2 };

struct CircularSketch {
  SchemePtr scheme;
  SketchMode mode = SketchMode::exact;
  std::optional<ExactNp> exact_np;
  std::optional<ExactPp> exact_pp;
  std::optional<Str> verbatim;
  std::optional<ApproxNp> approx_np;
  std::optional<ApproxPp> approx_pp;
  std::optional<Alt> alt;
  std::optional<ZeroSketch> zero;         // leveled
  std::vector<CircularSketch> levels;     // leveled, ascending k'

  const SchemeParams& params() const { return scheme->params(); }

  std::string kind() const {
    if (mode == SketchMode::leveled) return "LEVELED";
    std::string out;
    auto add = [&](bool present, const char* name) {
      if (!present) return;
      if (!out.empty()) out += "+";
      out += name;
    };
    add(exact_np.has_value(), "EXACT_NP");
    add(exact_pp.has_value(), "EXACT_PP");
    add(verbatim.has_value(), "VERBATIM");
    add(approx_np.has_value(), "APPROX_NP");
    add(approx_pp.has_value(), "APPROX_PP");
    add(alt.has_value(), "ALT");
    return out.empty() ? "EMPTY" : out;
  }

  friend bool operator==(const CircularSketch& a, const CircularSketch& b) {
    return a.scheme->params() == b.scheme->params() && a.mode == b.mode && a.exact_np == b.exact_np &&
           a.exact_pp == b.exact_pp && a.verbatim == b.verbatim && a.approx_np == b.approx_np &&
           a.approx_pp == b.approx_pp && a.alt == b.alt && a.zero == b.zero && a.levels == b.levels;
  }
};

namespace detail {

inline void check_input(const Str& s, const SchemeParams& p) {
  require(s.size() == p.n, "string length differs from scheme length");
  require(s.max_symbol() < p.sigma, "symbol outside the alphabet");
}

inline void check_pair(const CircularSketch& a, const CircularSketch& b) {
  if (!(a.params() == b.params()) || a.mode != b.mode) throw InconsistencyError("sketches come from different schemes");
}

// Index into idx of each position, or -1.
inline std::vector<std::int32_t> index_map(const std::vector<Pos>& idx, std::size_t n) {
  std::vector<std::int32_t> m(n + 1, -1);
  for (std::size_t j = 0; j < idx.size(); ++j) m[idx[j]] = static_cast<std::int32_t>(j);
  return m;
}

}  // namespace detail

// Exact k-mismatch circular sketch.
inline CircularSketch encode_exact(const Str& s, const SchemePtr& scheme) {
  const SchemeParams& p = scheme->params();
  require(!p.approximate(), "exact encoding needs an exact scheme");
  detail::check_input(s, p);
  CircularSketch out;
  out.scheme = scheme;
  out.mode = SketchMode::exact;
  if (p.fallback) {
    out.verbatim = s;
    return out;
  }
  if (!find_base(s, p.alpha(), p.beta_h())) {
    ExactNp np;
    np.indices = select(s, p.ell, scheme->gate()).all.members();
    np.sketches = scheme->syndrome().encode_rotations(s, np.indices);
    out.exact_np = std::move(np);
  }
  if (auto base = find_base(s, p.alpha(), p.beta_h_prime())) {
    out.exact_pp = ExactPp{encode_zero(base->base, *scheme), std::move(base->mi)};
  }
  return out;
}

namespace detail {

// Rotation sketches already computed for one input string, valid for a single codec.
struct AmsCache {
  const AmsCodec* codec = nullptr;
  std::unordered_map<Pos, AmsSketch> sketches;

  AmsSketch get(const AmsCodec& c, const Str& s, Pos i) {
    if (!codec) codec = &c;
    if (!(*codec == c)) return c.encode_rotation(s, i);
    auto [it, fresh] = sketches.try_emplace(i);
    if (fresh) it->second = c.encode_rotation(s, i);
    return it->second;
  }
};

}  // namespace detail

// Relaxed (eps, k)-sketch for a single level.
inline CircularSketch encode_relaxed(const Str& s, const SchemePtr& scheme, detail::AmsCache* cache = nullptr) {
  const SchemeParams& p = scheme->params();
  require(p.approximate(), "approximate encoding needs eps");
  detail::check_input(s, p);
  CircularSketch out;
  out.scheme = scheme;
  out.mode = SketchMode::relaxed;
  if (p.fallback || static_cast<double>(p.k) > p.eps_eff * p.n) {
    Alt alt;
    for (std::size_t q = 1; q <= p.n; ++q) {
      if (scheme->alt_a().contains(q) || scheme->alt_b().contains(q)) {
        alt.positions.push_back(static_cast<Pos>(q));
        alt.symbols.push_back(s.at(q));
      }
    }
    out.alt = std::move(alt);
    return out;
  }
  if (!find_base(s, p.alpha(), p.beta_h())) {
    ApproxNp np;
    const Selection sel = select(s, p.ell, scheme->gate());
    for (Pos i : sel.all.members())
      if (scheme->np_a().contains(i) || scheme->np_b().contains(i)) np.indices.push_back(i);
    np.sketches.reserve(np.indices.size());
    for (Pos i : np.indices)
      np.sketches.push_back(cache ? cache->get(scheme->ams(), s, i) : scheme->ams().encode_rotation(s, i));
    out.approx_np = std::move(np);
  }
  if (auto base = find_base(s, p.alpha(), p.beta_h_prime())) {
    std::vector<Mismatch> kept;
    for (const auto& e : base->mi.entries())
      if (scheme->pp_a().contains(e.pos) || scheme->pp_b().contains(e.pos)) kept.push_back(e);
    out.approx_pp = ApproxPp{encode_zero(base->base, *scheme), static_cast<std::uint32_t>(base->mi.size()),
                             MismatchInfo(p.n, std::move(kept))};
  }
  return out;
}

// (eps, k)-approximate circular sketch: zero payload plus one relaxed sketch per level.
inline CircularSketch encode_approx(const Str& s, const SchemePtr& scheme) {
  const SchemeParams& p = scheme->params();
  require(p.approximate(), "approximate encoding needs eps");
  require(!scheme->levels().empty(), "scheme built without levels");
  detail::check_input(s, p);
  CircularSketch out;
  out.scheme = scheme;
  out.mode = SketchMode::leveled;
  out.zero = encode_zero(s, *scheme);
  detail::AmsCache cache;
  for (const auto& level : scheme->levels()) out.levels.push_back(encode_relaxed(s, level, &cache));
  return out;
}

namespace detail {

// MI(cyc^m(S2), cyc^m(S2')) from MI(S2, S2'), keeping positions accepted by keep.
template <class Keep>
inline std::vector<Mismatch> shifted_entries(const MismatchInfo& mi, std::int64_t m, Keep keep) {
  std::vector<Mismatch> out;
  const std::size_t n = mi.universe();
  for (const auto& e : mi.entries()) {
    const auto q = static_cast<Pos>(wrap(static_cast<std::int64_t>(e.pos) - m, n));
    if (keep(e.pos, q)) out.push_back({q, e.left, e.right});
  }
  return out;
}

// Ham of S1 vs cyc^m(S2) from aligned bases: compose MI(S1,S1') with MI(S1', cyc^m S2).
inline std::optional<std::size_t> composed_distance(const MismatchInfo& mi1, std::vector<Mismatch> shifted2) {
  for (auto& e : shifted2) std::swap(e.left, e.right);
  try {
    return compose_mismatches(mi1, MismatchInfo(mi1.universe(), std::move(shifted2))).size();
  } catch (const InconsistencyError&) {
    return std::nullopt;  // bases disagree despite equal fingerprints
  }
}

// Per-shift exact NP decode. With a bound b, returns nullopt early once the result is provably >= b.
inline std::optional<std::size_t> exact_np_at(const SyndromeCodec& codec, const ExactNp& a, const ExactNp& b,
                                              const std::vector<std::int32_t>& bmap, std::int64_t m, std::size_t k,
                                              std::optional<std::size_t> bound = std::nullopt) {
  const std::size_t n = codec.length();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t j = 0; j < a.indices.size(); ++j) {
    const std::int32_t jj = bmap[wrap(static_cast<std::int64_t>(a.indices[j]) + m, n)];
    if (jj >= 0) pairs.emplace_back(j, static_cast<std::size_t>(jj));
  }
  if (pairs.size() < k) return std::nullopt;

  std::vector<std::uint8_t> marks(n + 1, 0);
  std::size_t count = 0;
  auto mark = [&](std::size_t q) {
    if (!marks[q]) {
      marks[q] = 1;
      ++count;
    }
  };
  const auto i0 = static_cast<std::int64_t>(a.indices[pairs[0].first]);
  const SyndromeDiff first = codec.difference(a.sketches[pairs[0].first], b.sketches[pairs[0].second]);
  if (bound && codec.linear_complexity(first, 2 * *bound) >= *bound) return std::nullopt;
  const auto mi0 = codec.decode_diff(first);
  if (!mi0) return std::nullopt;
  for (const auto& e : mi0->entries()) mark(wrap(i0 + e.pos, n));
  if (bound && count >= *bound) return std::nullopt;

  for (std::size_t pi = 1; pi < pairs.size(); ++pi) {
    const auto i = static_cast<std::int64_t>(a.indices[pairs[pi].first]);
    const SyndromeDiff d = codec.difference(a.sketches[pairs[pi].first], b.sketches[pairs[pi].second]);
    const std::int64_t delta = i - i0;
    if (codec.is_rotation_of(d, first, delta)) {
      // same mismatch pattern seen from a different rotation; only the check values remain
      std::vector<Mismatch> moved;
      bool inside = true;
      for (const auto& e : mi0->entries()) {
        const auto q = static_cast<Pos>(wrap(static_cast<std::int64_t>(e.pos) - delta, n));
        inside = inside && codec.in_sample(q);
        moved.push_back({q, e.left, e.right});
      }
      if (inside) {
        if (!codec.verify(d, MismatchInfo(n, std::move(moved)))) return std::nullopt;
        continue;
      }
    }
    const auto mi = codec.decode_diff(d);
    if (!mi) return std::nullopt;
    for (const auto& e : mi->entries()) mark(wrap(i + e.pos, n));
    if (bound && count >= *bound) return std::nullopt;
  }
  return count;
}

inline std::size_t verbatim_distance(const Str& a, const Str& b, std::int64_t m) {
  const std::size_t n = a.size();
  std::size_t d = 0;
  const std::size_t off = shift_mod(m, n);
  auto x = a.symbols();
  auto y = b.symbols();
  for (std::size_t q = 0; q < n; ++q) d += x[q] != y[(q + off) % n];
  return d;
}

}  // namespace detail

// Ham(S1, cyc^m(S2)) when it is at most k; a value > k or infinity otherwise.
inline DecodeResult decode_exact(const CircularSketch& a, const CircularSketch& b, std::int64_t m) {
  detail::check_pair(a, b);
  require(a.mode == SketchMode::exact, "decode_exact needs exact sketches");
  const SchemeParams& p = a.params();
  if (a.verbatim && b.verbatim) return DecodeResult::of(static_cast<double>(detail::verbatim_distance(*a.verbatim, *b.verbatim, m)));
  if (a.exact_pp && b.exact_pp) {
    if (!std::isfinite(decode_zero(a.exact_pp->base, b.exact_pp->base, m))) return DecodeResult::infinite();
    const auto d = detail::composed_distance(a.exact_pp->mi,
                                             detail::shifted_entries(b.exact_pp->mi, m, [](Pos, Pos) { return true; }));
    return d ? DecodeResult::of(static_cast<double>(*d)) : DecodeResult::infinite();
  }
  if (a.exact_np && b.exact_np) {
    const auto bmap = detail::index_map(b.exact_np->indices, p.n);
    const auto d = detail::exact_np_at(a.scheme->syndrome(), *a.exact_np, *b.exact_np, bmap, m, p.k);
    return d ? DecodeResult::of(static_cast<double>(*d)) : DecodeResult::infinite();
  }
  return DecodeResult::infinite();
}

namespace detail {

inline double alt_estimate(const Scheme& sc, const Alt& a, const Alt& b, std::int64_t m) {
  const std::size_t n = sc.params().n;
  const auto bmap = index_map(b.positions, n);
  std::size_t mism = 0;
  for (std::size_t j = 0; j < a.positions.size(); ++j) {
    const Pos q = a.positions[j];
    if (!sc.alt_a().contains(q)) continue;
    const std::size_t q2 = wrap(static_cast<std::int64_t>(q) + m, n);
    if (!sc.alt_b().contains(q2)) continue;
    const std::int32_t jj = bmap[q2];
    if (jj >= 0 && a.symbols[j] != b.symbols[static_cast<std::size_t>(jj)]) ++mism;
  }
  return static_cast<double>(mism) / (sc.alt_a().rate() * sc.alt_b().rate());
}

inline std::optional<double> pp_estimate(const Scheme& sc, const ApproxPp& a, const ApproxPp& b, std::int64_t m) {
  if (!std::isfinite(decode_zero(a.base, b.base, m))) return std::nullopt;
  const std::size_t n = sc.params().n;
  auto in_set = [&](std::size_t q) { return sc.pp_a().contains(q) && sc.pp_b().contains(wrap(static_cast<std::int64_t>(q) + m, n)); };
  std::vector<Mismatch> first;
  for (const auto& e : a.mi.entries())
    if (in_set(e.pos)) first.push_back(e);
  auto second = shifted_entries(b.mi, m, [&](Pos, Pos q) { return in_set(q); });
  const auto d = composed_distance(MismatchInfo(n, std::move(first)), std::move(second));
  if (!d) return std::nullopt;
  return static_cast<double>(*d) / (sc.pp_a().rate() * sc.pp_b().rate());
}

inline std::optional<double> np_estimate(const Scheme& sc, const ApproxNp& a, const ApproxNp& b, std::int64_t m,
                                         double cap = kInfinity) {
  const std::size_t n = sc.params().n;
  for (std::size_t j = 0; j < a.indices.size(); ++j) {
    const Pos i = a.indices[j];
    if (!sc.np_a().contains(i)) continue;
    const std::size_t i2 = wrap(static_cast<std::int64_t>(i) + m, n);
    if (!sc.np_b().contains(i2)) continue;
    const auto it = std::lower_bound(b.indices.begin(), b.indices.end(), static_cast<Pos>(i2));
    if (it == b.indices.end() || *it != i2) continue;
    return sc.ams().decode_capped(a.sketches[j], b.sketches[static_cast<std::size_t>(it - b.indices.begin())], cap);
  }
  return std::nullopt;
}

}  // namespace detail

// Single-level relaxed decode: estimate of Ham(S1, cyc^m(S2)), reliable for distances in [k'/4, k'].
inline DecodeResult decode_relaxed(const CircularSketch& a, const CircularSketch& b, std::int64_t m) {
  detail::check_pair(a, b);
  require(a.mode == SketchMode::relaxed, "decode_relaxed needs relaxed sketches");
  const Scheme& sc = *a.scheme;
  if (a.alt && b.alt) return DecodeResult::of(detail::alt_estimate(sc, *a.alt, *b.alt, m));
  if (a.approx_pp && b.approx_pp) {
    const auto v = detail::pp_estimate(sc, *a.approx_pp, *b.approx_pp, m);
    return v ? DecodeResult::of(*v) : DecodeResult::infinite();
  }
  if (a.approx_np && b.approx_np) {
    const auto v = detail::np_estimate(sc, *a.approx_np, *b.approx_np, m);
    return v ? DecodeResult::of(*v) : DecodeResult::infinite();
  }
  return DecodeResult::infinite();
}

// (1 +- eps) estimate of Ham(S1, cyc^m(S2)) when it is at most k; a value > (1-eps)k or infinity otherwise.
inline DecodeResult decode_approx(const CircularSketch& a, const CircularSketch& b, std::int64_t m) {
  detail::check_pair(a, b);
  require(a.mode == SketchMode::leveled, "decode_approx needs leveled sketches");
  if (decode_zero(*a.zero, *b.zero, m) == 0.0) return DecodeResult::of(0.0);
  const double eps = a.params().eps_eff;
  for (std::size_t l = 0; l < a.levels.size(); ++l) {
    const DecodeResult r = decode_relaxed(a.levels[l], b.levels[l], m);
    if (r.value <= (1.0 - eps) * a.levels[l].params().k) return r;
  }
  return DecodeResult::infinite();
}

}  // namespace circsketch
