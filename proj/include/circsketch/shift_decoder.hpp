#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "circsketch/circular_sketch.hpp"

namespace circsketch {

// s_m = #{(i, i') in I1 x I2 : i' - i = m (mod n)}, indexed by m in [0, n).
inline std::vector<std::uint32_t> shift_histogram(const std::vector<Pos>& i1, const std::vector<Pos>& i2, std::size_t n) {
  std::vector<std::uint32_t> h(n, 0);
  for (Pos a : i1) {
    const std::size_t base = n - a % n;
    for (Pos b : i2) {
      std::size_t m = base + b;
      if (m >= n) m -= n;
      if (m >= n) m -= n;
      ++h[m];
    }
  }
  return h;
}

// Shifts with s_m >= threshold, most supported first, ties by smaller shift.
inline std::vector<std::size_t> candidate_shifts(const std::vector<std::uint32_t>& hist, std::uint32_t threshold) {
  std::vector<std::size_t> out;
  for (std::size_t m = 0; m < hist.size(); ++m)
    if (hist[m] >= threshold && hist[m] > 0) out.push_back(m);
  std::stable_sort(out.begin(), out.end(), [&](std::size_t x, std::size_t y) { return hist[x] > hist[y]; });
  return out;
}

// Both zero sketches describe rotations of one string: 0 with the aligning shift, else infinity.
inline DecodeResult shift_zero(const ZeroSketch& a, const ZeroSketch& b, std::size_t n) {
  if (a.fingerprint != b.fingerprint || a.root != b.root || a.root == 0) return DecodeResult::infinite();
  const auto m = static_cast<std::int64_t>(a.shift) - static_cast<std::int64_t>(b.shift);
  return DecodeResult::of(0.0, shift_mod(m, n));
}

namespace detail {

struct PpCounts {
  std::vector<std::uint32_t> p;        // |P_m|
  std::vector<std::uint32_t> p_equal;  // |P'_m|
};

// Double loop over both mismatch lists; pair (i, i') lands in bucket m = i' - i.
template <class Keep>
inline PpCounts pp_counts(const MismatchInfo& a, const MismatchInfo& b, std::size_t n, Keep keep) {
  PpCounts c{std::vector<std::uint32_t>(n, 0), std::vector<std::uint32_t>(n, 0)};
  for (const auto& x : a.entries()) {
    for (const auto& y : b.entries()) {
      if (!keep(x.pos, y.pos)) continue;
      const std::size_t m = shift_mod(static_cast<std::int64_t>(y.pos) - x.pos, n);
      ++c.p[m];
      if (x.left == y.left) ++c.p_equal[m];
    }
  }
  return c;
}

// min over aligned shifts of H1 + H2 - scale * (|P_m| + |P'_m|), including H1 + H2 itself.
inline DecodeResult pp_shift_min(const ZeroSketch& za, const ZeroSketch& zb, double h1, double h2, const PpCounts& c,
                                 double scale, std::size_t n) {
  const DecodeResult gate = shift_zero(za, zb, n);
  if (!gate.finite()) return gate;
  const std::size_t root = za.root;
  const std::size_t anchor = *gate.shift % root;
  DecodeResult best = DecodeResult::infinite();
  for (std::size_t m = anchor; m < n; m += root) {
    const double v = c.p[m] ? h1 + h2 - scale * (c.p[m] + c.p_equal[m]) : h1 + h2;
    if (v < best.value) best = DecodeResult::of(v, m);
  }
  return best;
}

inline DecodeResult verbatim_shift(const Str& a, const Str& b) {
  const std::size_t n = a.size();
  auto x = a.symbols();
  auto y = b.symbols();
  DecodeResult best = DecodeResult::infinite();
  std::size_t best_d = n + 1;
  for (std::size_t m = 0; m < n; ++m) {
    std::size_t d = 0;
    for (std::size_t q = 0; q < n && d < best_d; ++q) {
      std::size_t r = q + m;
      if (r >= n) r -= n;
      d += x[q] != y[r];
    }
    if (d < best_d) {
      best_d = d;
      best = DecodeResult::of(static_cast<double>(d), m);
    }
  }
  return best;
}

inline DecodeResult alt_shift(const Scheme& sc, const Alt& a, const Alt& b) {
  const std::size_t n = sc.params().n;
  std::vector<Pos> pa, pb;
  std::vector<Symbol> sa, sb;
  for (std::size_t j = 0; j < a.positions.size(); ++j)
    if (sc.alt_a().contains(a.positions[j])) {
      pa.push_back(a.positions[j]);
      sa.push_back(a.symbols[j]);
    }
  for (std::size_t j = 0; j < b.positions.size(); ++j)
    if (sc.alt_b().contains(b.positions[j])) {
      pb.push_back(b.positions[j]);
      sb.push_back(b.symbols[j]);
    }
  std::vector<std::uint32_t> mism(n, 0), seen(n, 0);
  for (std::size_t x = 0; x < pa.size(); ++x) {
    const std::size_t base = n - pa[x] % n;
    for (std::size_t y = 0; y < pb.size(); ++y) {
      std::size_t m = base + pb[y];
      if (m >= n) m -= n;
      if (m >= n) m -= n;
      ++seen[m];
      mism[m] += sa[x] != sb[y];
    }
  }
  const double scale = 1.0 / (sc.alt_a().rate() * sc.alt_b().rate());
  DecodeResult best = DecodeResult::infinite();
  for (std::size_t m = 0; m < n; ++m) {
    if (!seen[m]) continue;
    const double v = scale * mism[m];
    if (v < best.value) best = DecodeResult::of(v, m);
  }
  return best;
}

}  // namespace detail

// sh(S1, S2) when it is at most k, with a minimising shift; a value > k or infinity otherwise.
inline DecodeResult shift_exact(const CircularSketch& a, const CircularSketch& b) {
  detail::check_pair(a, b);
  require(a.mode == SketchMode::exact, "shift_exact needs exact sketches");
  const SchemeParams& p = a.params();
  const std::size_t n = p.n;
  if (a.verbatim && b.verbatim) return detail::verbatim_shift(*a.verbatim, *b.verbatim);
  if (a.exact_pp && b.exact_pp) {
    const auto c = detail::pp_counts(a.exact_pp->mi, b.exact_pp->mi, n, [](Pos, Pos) { return true; });
    return detail::pp_shift_min(a.exact_pp->base, b.exact_pp->base, static_cast<double>(a.exact_pp->mi.size()),
                                static_cast<double>(b.exact_pp->mi.size()), c, 1.0, n);
  }
  if (a.exact_np && b.exact_np) {
    const auto hist = shift_histogram(a.exact_np->indices, b.exact_np->indices, n);
    const auto bmap = detail::index_map(b.exact_np->indices, n);
    std::size_t bound = p.k + 1;
    DecodeResult best = DecodeResult::infinite();
    for (std::size_t m : candidate_shifts(hist, p.k)) {
      const auto d = detail::exact_np_at(a.scheme->syndrome(), *a.exact_np, *b.exact_np, bmap,
                                         static_cast<std::int64_t>(m), p.k, bound);
      if (d && *d < bound) {
        bound = *d;
        best = DecodeResult::of(static_cast<double>(*d), m);
      }
    }
    return best;
  }
  return DecodeResult::infinite();
}

// Single-level relaxed shift estimate; values above cap may be reported as infinity.
inline DecodeResult shift_relaxed(const CircularSketch& a, const CircularSketch& b, double cap = kInfinity) {
  detail::check_pair(a, b);
  require(a.mode == SketchMode::relaxed, "shift_relaxed needs relaxed sketches");
  const Scheme& sc = *a.scheme;
  const std::size_t n = sc.params().n;
  if (a.alt && b.alt) return detail::alt_shift(sc, *a.alt, *b.alt);
  if (a.approx_pp && b.approx_pp) {
    const auto keep = [&](Pos x, Pos y) { return sc.pp_a().contains(x) && sc.pp_b().contains(y); };
    const auto c = detail::pp_counts(a.approx_pp->mi, b.approx_pp->mi, n, keep);
    const double scale = 1.0 / (sc.pp_a().rate() * sc.pp_b().rate());
    return detail::pp_shift_min(a.approx_pp->base, b.approx_pp->base, a.approx_pp->full_ham, b.approx_pp->full_ham, c,
                                scale, n);
  }
  if (a.approx_np && b.approx_np) {
    const auto& na = *a.approx_np;
    const auto& nb = *b.approx_np;
    std::vector<Pos> ia, ib;
    std::vector<std::size_t> ja, jb;
    for (std::size_t j = 0; j < na.indices.size(); ++j)
      if (sc.np_a().contains(na.indices[j])) ia.push_back(na.indices[j]);
    for (std::size_t j = 0; j < nb.indices.size(); ++j)
      if (sc.np_b().contains(nb.indices[j])) ib.push_back(nb.indices[j]);
    const auto hist = shift_histogram(ia, ib, n);
    DecodeResult best = DecodeResult::infinite();
    double limit = cap;
    for (std::size_t m : candidate_shifts(hist, 1)) {
      const auto v = detail::np_estimate(sc, na, nb, static_cast<std::int64_t>(m), limit);
      if (v && *v < best.value) {
        best = DecodeResult::of(*v, m);
        limit = std::min(limit, *v);
      }
    }
    return best;
  }
  return DecodeResult::infinite();
}

// (1 +- eps) estimate of sh(S1, S2) when it is at most k; a value > (1-eps)k or infinity otherwise.
inline DecodeResult shift_approx(const CircularSketch& a, const CircularSketch& b) {
  detail::check_pair(a, b);
  require(a.mode == SketchMode::leveled, "shift_approx needs leveled sketches");
  const std::size_t n = a.params().n;
  if (const DecodeResult z = shift_zero(*a.zero, *b.zero, n); z.finite()) return z;
  const double eps = a.params().eps_eff;
  for (std::size_t l = 0; l < a.levels.size(); ++l) {
    const double cap = (1.0 - eps) * a.levels[l].params().k;
    const DecodeResult r = shift_relaxed(a.levels[l], b.levels[l], cap);
    if (r.value <= cap) return r;
  }
  return DecodeResult::infinite();
}

}  // namespace circsketch
