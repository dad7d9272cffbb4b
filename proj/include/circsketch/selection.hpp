#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "circsketch/randomness.hpp"
#include "circsketch/strings.hpp"

namespace circsketch {

// Cubic classification of the length-3l windows u_i = S*[i..i+3l-1].
struct CubicAnalysis {
  std::size_t ell = 0;
  std::vector<Pos> cubic;              // per(u_i) <= l
  std::vector<Pos> noncubic;
  std::vector<std::uint32_t> period;   // period[i-1] = per(u_i) when cubic, else 0
};

inline CubicAnalysis analyze_cubic(const Str& s, std::size_t ell) {
  require(ell >= 1, "cubic analysis needs ell >= 1");
  const std::size_t n = s.size();
  const std::size_t w = 3 * ell;
  CubicAnalysis out;
  out.ell = ell;
  out.period.assign(n, 0);
  std::vector<Symbol> u(w);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 0; j < w; ++j) u[j] = s.cyclic(static_cast<std::int64_t>(i + j));
    const std::size_t p = shortest_period(u);
    if (p <= ell) {
      out.cubic.push_back(static_cast<Pos>(i));
      out.period[i - 1] = static_cast<std::uint32_t>(p);
    } else {
      out.noncubic.push_back(static_cast<Pos>(i));
    }
  }
  return out;
}

// Greedy extension of the periodic run starting at cubic position i, in unwrapped coordinates.
struct Extension {
  std::int64_t start = 0;                 // i
  std::size_t rho = 0;                    // per(u_i)
  std::size_t tau = 0;                    // length of R_i = [i, i+tau-1]
  std::vector<std::int64_t> mismatches;   // M_i, ascending
};

// tau = least tau with tau < 3l * Ham(S*[i..i+tau-1], mu_i*[1..tau]); fails past 2n.
inline Extension extend(const Str& s, std::size_t i, std::size_t rho, std::size_t ell) {
  const std::size_t n = s.size();
  Extension e;
  e.start = static_cast<std::int64_t>(i);
  e.rho = rho;
  std::size_t count = 0;
  for (std::size_t tau = 1; tau <= 2 * n; ++tau) {
    const auto pos = static_cast<std::int64_t>(i + tau - 1);
    const auto ref = static_cast<std::int64_t>(i + (tau - 1) % rho);
    if (s.cyclic(pos) != s.cyclic(ref)) {
      ++count;
      e.mismatches.push_back(pos);
      if (tau < 3 * ell * count) {
        e.tau = tau;
        return e;
      }
    }
  }
  throw PseudoPeriodicityError("cubic extension exceeded 2n; the input is pseudo-periodic");
}

// A_i = {j in R_i : [j, j+2l) within R_i \ M_i}, as disjoint closed intervals.
inline std::vector<std::pair<std::int64_t, std::int64_t>> anchor_intervals(const Extension& e, std::size_t ell) {
  std::vector<std::pair<std::int64_t, std::int64_t>> out;
  const auto span = static_cast<std::int64_t>(2 * ell);
  std::int64_t lo = e.start;
  auto flush = [&](std::int64_t hi) {
    if (hi - lo + 1 >= span) out.emplace_back(lo, hi - span + 1);
  };
  for (std::int64_t m : e.mismatches) {
    flush(m - 1);
    lo = m + 1;
  }
  flush(e.start + static_cast<std::int64_t>(e.tau) - 1);
  return out;
}

// f_n(S) = {i non-cubic : h(u_i) = 1}.
inline PositionSet select_noncubic(const Str& s, const CubicAnalysis& ca, const SubstringGate& gate) {
  require(gate.window() == 3 * ca.ell, "gate window must be 3l");
  const auto fps = gate.window_fingerprints(s);
  std::vector<Pos> v;
  for (Pos i : ca.noncubic)
    if (gate.accepts_fingerprint(fps[i - 1])) v.push_back(i);
  return PositionSet(s.size(), std::move(v));
}

struct CubicSelection {
  PositionSet positions;          // f_c(S)
  std::vector<Pos> representatives;  // Gamma
};

// f_c(S) = union of M_i wrapped, over i in Gamma; Gamma keeps i when A_i misses every earlier A_j.
inline CubicSelection select_cubic(const Str& s, const CubicAnalysis& ca) {
  const std::size_t n = s.size();
  const std::size_t ell = ca.ell;
  std::vector<std::uint8_t> covered(3 * n + 2, 0);
  std::vector<std::uint8_t> chosen(n + 1, 0);
  CubicSelection out;
  for (Pos i : ca.cubic) {
    const Extension e = extend(s, i, ca.period[i - 1], ell);
    const auto anchors = anchor_intervals(e, ell);
    bool disjoint = true;
    for (const auto& [lo, hi] : anchors) {
      for (std::int64_t j = lo; j <= hi && disjoint; ++j) disjoint = covered[static_cast<std::size_t>(j)] == 0;
      if (!disjoint) break;
    }
    for (const auto& [lo, hi] : anchors)
      for (std::int64_t j = lo; j <= hi; ++j) covered[static_cast<std::size_t>(j)] = 1;
    if (disjoint) {
      out.representatives.push_back(i);
      for (std::int64_t m : e.mismatches) chosen[wrap(m, n)] = 1;
    }
  }
  std::vector<Pos> v;
  for (std::size_t q = 1; q <= n; ++q)
    if (chosen[q]) v.push_back(static_cast<Pos>(q));
  out.positions = PositionSet(n, std::move(v));
  return out;
}

// Union of M_i wrapped over every cubic i; equals f_c(S).
inline PositionSet select_cubic_unpruned(const Str& s, const CubicAnalysis& ca) {
  std::vector<Pos> v;
  for (Pos i : ca.cubic) {
    const Extension e = extend(s, i, ca.period[i - 1], ca.ell);
    for (std::int64_t m : e.mismatches) v.push_back(static_cast<Pos>(wrap(m, s.size())));
  }
  return PositionSet(s.size(), std::move(v));
}

struct Selection {
  PositionSet noncubic;  // f_n(S)
  PositionSet cubic;     // f_c(S)
  PositionSet all;       // f(S)
};

// f(S) = f_n(S) u f_c(S); requires S outside H_{n,k}.
inline Selection select(const Str& s, std::size_t ell, const SubstringGate& gate) {
  const CubicAnalysis ca = analyze_cubic(s, ell);
  Selection out;
  out.noncubic = select_noncubic(s, ca, gate);
  out.cubic = select_cubic(s, ca).positions;
  std::vector<Pos> v = out.noncubic.members();
  v.insert(v.end(), out.cubic.members().begin(), out.cubic.members().end());
  out.all = PositionSet(s.size(), std::move(v));
  return out;
}

inline Selection select(const Str& s, const SchemeParams& params) {
  require(!params.fallback, "selection needs n >= 42k");
  require(s.size() == params.n, "string length differs from scheme length");
  return select(s, params.ell, SubstringGate(params, 3 * params.ell));
}

// S = S' + sparse noise with |root(S')| <= n / alpha and Ham(S, S') <= beta.
struct BaseDecomposition {
  Str base;             // S'
  std::size_t period;   // d with S' = (S'[1..d])^(n/d)
  MismatchInfo mi;      // MI(S, S')
  Rational alpha;
  Rational beta;
};

// Per divisor d <= n / alpha: residue-class majority (smallest symbol on ties); minimal distance wins,
// smallest d on ties.
inline std::optional<BaseDecomposition> find_base(const Str& s, Rational alpha, Rational beta) {
  const std::size_t n = s.size();
  auto sym = s.symbols();
  std::optional<std::size_t> best_d;
  std::size_t best_ham = n + 1;
  std::vector<Symbol> best_q;
  std::vector<Symbol> cls;
  for (std::size_t d = 1; d <= n; ++d) {
    if (n % d != 0) continue;
    if (rational(static_cast<std::int64_t>(d)) * alpha > rational(static_cast<std::int64_t>(n))) break;
    std::vector<Symbol> q(d);
    std::size_t agree = 0;
    for (std::size_t r = 0; r < d; ++r) {
      cls.clear();
      for (std::size_t j = r; j < n; j += d) cls.push_back(sym[j]);
      std::sort(cls.begin(), cls.end());
      std::size_t run_best = 0;
      Symbol winner = cls.front();
      for (std::size_t a = 0; a < cls.size();) {
        std::size_t b = a;
        while (b < cls.size() && cls[b] == cls[a]) ++b;
        if (b - a > run_best) {
          run_best = b - a;
          winner = cls[a];
        }
        a = b;
      }
      q[r] = winner;
      agree += run_best;
    }
    const std::size_t ham = n - agree;
    if (ham < best_ham) {
      best_ham = ham;
      best_d = d;
      best_q = std::move(q);
    }
  }
  if (!best_d || rational(static_cast<std::int64_t>(best_ham)) > beta) return std::nullopt;
  std::vector<Symbol> base(n);
  for (std::size_t j = 0; j < n; ++j) base[j] = best_q[j % *best_d];
  Str b(std::move(base));
  MismatchInfo mi = mismatch_info(s, b);
  return BaseDecomposition{std::move(b), *best_d, std::move(mi), alpha, beta};
}

// Membership in H_{n,k}: (3 gamma k, gamma k)-pseudo-periodic.
inline bool in_h(const Str& s, const SchemeParams& p) {
  return !p.fallback && find_base(s, p.alpha(), p.beta_h()).has_value();
}

// Membership in H'_{n,k}: (3 gamma k, (gamma + 1) k)-pseudo-periodic.
inline bool in_h_prime(const Str& s, const SchemeParams& p) {
  return !p.fallback && find_base(s, p.alpha(), p.beta_h_prime()).has_value();
}

}  // namespace circsketch
