#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "circsketch/errors.hpp"

namespace circsketch {

using Symbol = std::uint32_t;
using Pos = std::uint32_t;  // 1-based string position

inline constexpr std::size_t kMaxLength = std::size_t{1} << 15;
inline constexpr std::uint64_t kMaxSigma = std::uint64_t{1} << 30;

// i wrapped into [1..n]: ((i - 1) mod n) + 1.
inline std::size_t wrap(std::int64_t i, std::size_t n) {
  const auto nn = static_cast<std::int64_t>(n);
  std::int64_t r = (i - 1) % nn;
  if (r < 0) r += nn;
  return static_cast<std::size_t>(r + 1);
}

// Shift normalised to [0, n).
inline std::size_t shift_mod(std::int64_t m, std::size_t n) { return wrap(m + 1, n) - 1; }

// Non-empty string over [0, sigma), addressed with 1-based positions.
class Str {
 public:
  Str() = default;
  explicit Str(std::vector<Symbol> symbols) : s_(std::move(symbols)) {
    require(!s_.empty(), "string must be non-empty");
    require(s_.size() <= kMaxLength, "string longer than supported maximum");
  }

  static Str from_bytes(std::string_view bytes) {
    std::vector<Symbol> v(bytes.size());
    std::transform(bytes.begin(), bytes.end(), v.begin(), [](char c) { return static_cast<unsigned char>(c); });
    return Str(std::move(v));
  }

  std::size_t size() const { return s_.size(); }
  bool empty() const { return s_.empty(); }

  // S[pos] for pos in [1..n].
  Symbol at(std::size_t pos) const {
    require(pos >= 1 && pos <= s_.size(), "position out of range");
    return s_[pos - 1];
  }

  // S*[pos] of the infinite periodic extension, any integer pos.
  Symbol cyclic(std::int64_t pos) const { return s_[wrap(pos, s_.size()) - 1]; }

  std::span<const Symbol> symbols() const { return s_; }

  Symbol max_symbol() const { return *std::max_element(s_.begin(), s_.end()); }

  friend bool operator==(const Str&, const Str&) = default;
  friend auto operator<=>(const Str&, const Str&) = default;

 private:
  std::vector<Symbol> s_;
};

// cyc^m(S)[i] = S[(i + m) wrapped], m any integer.
inline Str rotate(const Str& s, std::int64_t m) {
  const std::size_t n = s.size();
  const std::size_t off = shift_mod(m, n);
  std::vector<Symbol> v(n);
  auto src = s.symbols();
  std::rotate_copy(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(off), src.end(), v.begin());
  return Str(std::move(v));
}

inline std::size_t hamming(const Str& a, const Str& b) {
  if (a.size() != b.size()) throw InconsistencyError("hamming: length mismatch");
  std::size_t d = 0;
  auto x = a.symbols();
  auto y = b.symbols();
  for (std::size_t i = 0; i < x.size(); ++i) d += x[i] != y[i];
  return d;
}

// Sorted subset of [1..n].
class PositionSet {
 public:
  PositionSet() = default;
  PositionSet(std::size_t n, std::vector<Pos> members) : n_(n), m_(std::move(members)) {
    std::sort(m_.begin(), m_.end());
    m_.erase(std::unique(m_.begin(), m_.end()), m_.end());
    require(m_.empty() || (m_.front() >= 1 && m_.back() <= n_), "position outside [1..n]");
  }

  std::size_t universe() const { return n_; }
  std::size_t size() const { return m_.size(); }
  bool empty() const { return m_.empty(); }
  bool contains(std::size_t p) const { return std::binary_search(m_.begin(), m_.end(), static_cast<Pos>(p)); }
  const std::vector<Pos>& members() const { return m_; }

  friend bool operator==(const PositionSet&, const PositionSet&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<Pos> m_;
};

// rot^m(P) = {(i - m) wrapped : i in P}; rot^1 is the single-step map i -> (i - 1) wrapped.
inline PositionSet rot_set(const PositionSet& p, std::int64_t m = 1) {
  std::vector<Pos> v;
  v.reserve(p.size());
  for (Pos i : p.members()) v.push_back(static_cast<Pos>(wrap(static_cast<std::int64_t>(i) - m, p.universe())));
  return PositionSet(p.universe(), std::move(v));
}

struct Mismatch {
  Pos pos;
  Symbol left;
  Symbol right;
  friend auto operator<=>(const Mismatch&, const Mismatch&) = default;
};

// Set of (i, S[i], T[i]) with S[i] != T[i], sorted by position.
class MismatchInfo {
 public:
  MismatchInfo() = default;
  MismatchInfo(std::size_t n, std::vector<Mismatch> entries) : n_(n), e_(std::move(entries)) {
    std::sort(e_.begin(), e_.end());
    for (std::size_t i = 0; i < e_.size(); ++i) {
      require(e_[i].pos >= 1 && e_[i].pos <= n_, "mismatch position outside [1..n]");
      require(e_[i].left != e_[i].right, "mismatch entry with equal symbols");
      require(i == 0 || e_[i - 1].pos != e_[i].pos, "duplicate mismatch position");
    }
  }

  std::size_t universe() const { return n_; }
  std::size_t size() const { return e_.size(); }
  bool empty() const { return e_.empty(); }
  const std::vector<Mismatch>& entries() const { return e_; }

  PositionSet positions() const {
    std::vector<Pos> v;
    v.reserve(e_.size());
    for (const auto& m : e_) v.push_back(m.pos);
    return PositionSet(n_, std::move(v));
  }

  friend bool operator==(const MismatchInfo&, const MismatchInfo&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<Mismatch> e_;
};

inline MismatchInfo mismatch_info(const Str& s, const Str& t) {
  if (s.size() != t.size()) throw InconsistencyError("mismatch_info: length mismatch");
  std::vector<Mismatch> v;
  auto x = s.symbols();
  auto y = t.symbols();
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] != y[i]) v.push_back({static_cast<Pos>(i + 1), x[i], y[i]});
  }
  return MismatchInfo(s.size(), std::move(v));
}

// MI restricted to positions in A.
inline MismatchInfo mismatch_info(const Str& s, const Str& t, const PositionSet& a) {
  if (s.size() != t.size() || a.universe() != s.size()) throw InconsistencyError("mismatch_info: length mismatch");
  std::vector<Mismatch> v;
  for (Pos i : a.members()) {
    const Symbol x = s.at(i);
    const Symbol y = t.at(i);
    if (x != y) v.push_back({i, x, y});
  }
  return MismatchInfo(s.size(), std::move(v));
}

// MI(S,T) and MI(T,U) give MI(S,U). An entry present on both sides must agree on the middle symbol.
inline MismatchInfo compose_mismatches(const MismatchInfo& st, const MismatchInfo& tu) {
  if (st.universe() != tu.universe()) throw InconsistencyError("compose: length mismatch");
  std::vector<Mismatch> out;
  const auto& a = st.entries();
  const auto& b = tu.entries();
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].pos < b[j].pos)) {
      out.push_back(a[i++]);
    } else if (i == a.size() || b[j].pos < a[i].pos) {
      out.push_back(b[j++]);
    } else {
      if (a[i].right != b[j].left) throw InconsistencyError("compose: middle symbols disagree");
      if (a[i].left != b[j].right) out.push_back({a[i].pos, a[i].left, b[j].right});
      ++i;
      ++j;
    }
  }
  return MismatchInfo(st.universe(), std::move(out));
}

// Failure function of the KMP automaton; border[i] = longest proper border of u[0..i].
inline std::vector<std::size_t> kmp_borders(std::span<const Symbol> u) {
  std::vector<std::size_t> b(u.size(), 0);
  for (std::size_t i = 1; i < u.size(); ++i) {
    std::size_t k = b[i - 1];
    while (k > 0 && u[i] != u[k]) k = b[k - 1];
    if (u[i] == u[k]) ++k;
    b[i] = k;
  }
  return b;
}

// per(u): smallest p >= 1 with u[i] = u[i+p] throughout.
inline std::size_t shortest_period(std::span<const Symbol> u) {
  require(!u.empty(), "period of empty string");
  return u.size() - kmp_borders(u).back();
}

inline std::size_t shortest_period(const Str& s) { return shortest_period(s.symbols()); }

// |root(S)|: smallest divisor d of n with S = (S[1..d])^(n/d).
inline std::size_t root_length(const Str& s) {
  const std::size_t n = s.size();
  const std::size_t p = shortest_period(s);
  return n % p == 0 ? p : n;
}

// Offset j (0-based) of the lexicographically least rotation, smallest such j (Booth).
inline std::size_t least_rotation_offset(std::span<const Symbol> s) {
  const std::size_t n = s.size();
  std::vector<std::ptrdiff_t> f(2 * n, -1);
  std::size_t k = 0;
  for (std::size_t j = 1; j < 2 * n; ++j) {
    const Symbol sj = s[j % n];
    std::ptrdiff_t i = f[j - k - 1];
    while (i != -1 && sj != s[(k + static_cast<std::size_t>(i) + 1) % n]) {
      if (sj < s[(k + static_cast<std::size_t>(i) + 1) % n]) k = j - static_cast<std::size_t>(i) - 1;
      i = f[static_cast<std::size_t>(i)];
    }
    if (i == -1 && sj != s[(k + static_cast<std::size_t>(i) + 1) % n]) {
      if (sj < s[(k + static_cast<std::size_t>(i) + 1) % n]) k = j;
      f[j - k] = -1;
    } else {
      f[j - k] = i + 1;
    }
  }
  return k;
}

struct MinRotation {
  Str rotation;       // minrot(S)
  std::size_t shift;  // smallest r >= 0 with S = cyc^r(minrot(S))
};

inline MinRotation min_rotation(const Str& s) {
  const std::size_t n = s.size();
  const std::size_t j = least_rotation_offset(s.symbols()) % n;
  const std::size_t root = root_length(s);
  return {rotate(s, static_cast<std::int64_t>(j)), ((n - j) % n) % root};
}

}  // namespace circsketch
