#pragma once

// Acceptance suite: eleven criteria checked against the brute-force oracle.
// Shared by the acceptance test binary and the `selftest` CLI subcommand.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include "circsketch/circsketch.hpp"
#include "circsketch/oracle.hpp"
#include "json.hpp"

namespace circsketch::selftest {

struct Config {
  bool full = true;
  unsigned threads = 0;       // 0: hardware concurrency
  std::string cli;            // path of the circsketch executable; empty skips nothing but fails C11
  std::uint64_t seed = 0x5eed5eed5eedULL;
  std::function<void(const std::string&)> log;
};

struct Criterion {
  std::string id;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
  nlohmann::json metrics = nlohmann::json::object();
};

struct Cell {
  std::size_t n;
  std::size_t k;
};

inline const std::vector<Cell>& grid() {
  static const std::vector<Cell> g{{1024, 8}, {1024, 32}, {1024, 128}, {4096, 8}, {4096, 32}, {4096, 128}};
  return g;
}

inline constexpr double kEps = 0.25;
inline constexpr double kExactSizeC = 200.0;
inline constexpr double kApproxSizeC = 128.0;
inline constexpr double kApproxSizeCWide = 32.0;

namespace detail {

inline std::uint64_t trial_seed(std::uint64_t base, std::uint64_t tag, std::uint64_t cell, std::uint64_t t) {
  return circsketch::detail::fmix64(base ^ circsketch::detail::fmix64((tag << 48) ^ (cell << 32) ^ t));
}

// out[t] = fn(t) for t in [0, count), spread over a fixed number of worker threads.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t count, unsigned threads, Fn fn) {
  std::vector<T> out(count);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t t = next.fetch_add(1);
      if (t >= count) return;
      try {
        out[t] = fn(t);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = count;
      }
    }
  };
  const unsigned w = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < w; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return out;
}

inline oracle::Regime regime_for(std::size_t t, const SchemeParams& p) {
  if (p.fallback) return oracle::Regime::nonperiodic;
  return static_cast<oracle::Regime>(t % 3);
}

inline double ratio(std::size_t a, std::size_t b) { return b ? static_cast<double>(a) / static_cast<double>(b) : 1.0; }

inline std::string frac(std::size_t a, std::size_t b) { return std::to_string(a) + "/" + std::to_string(b); }

inline std::string cell_name(std::size_t n, std::size_t k) { return "n=" + std::to_string(n) + ",k=" + std::to_string(k); }

inline std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

// Runs a shell command; returns its exit status.
inline int run(const std::string& cmd) {
  const int rc = std::system(cmd.c_str());
  if (rc == -1) return -1;
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

inline std::string quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return out + "'";
}

inline std::vector<std::uint8_t> slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string capture(const std::string& cmd, int& status) {
  std::string out;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) {
    status = -1;
    return out;
  }
  char buf[256];
  while (std::fgets(buf, sizeof buf, pipe)) out += buf;
  const int rc = pclose(pipe);
  status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  while (!out.empty() && (out.back() == '\n' || out.back() == '\r')) out.pop_back();
  return out;
}

}  // namespace detail

class Suite {
 public:
  explicit Suite(Config cfg) : cfg_(std::move(cfg)) {
    if (cfg_.threads == 0) cfg_.threads = std::max(1U, std::thread::hardware_concurrency());
  }

  std::vector<Criterion> run_all() {
    std::vector<Criterion> out;
    using Method = Criterion (Suite::*)();
    const std::vector<Method> all{&Suite::c1, &Suite::c2, &Suite::c3, &Suite::c4,  &Suite::c5, &Suite::c6,
                                  &Suite::c7, &Suite::c8, &Suite::c9, &Suite::c10, &Suite::c11};
    for (std::size_t i = 0; i < all.size(); ++i) out.push_back(timed(all[i], i + 1));
    return out;
  }

  Criterion run_one(int index) {
    using Method = Criterion (Suite::*)();
    const Method all[] = {&Suite::c1, &Suite::c2, &Suite::c3, &Suite::c4,  &Suite::c5, &Suite::c6,
                          &Suite::c7, &Suite::c8, &Suite::c9, &Suite::c10, &Suite::c11};
    require(index >= 1 && index <= 11, "criterion index must be in [1, 11]");
    return timed(all[index - 1], static_cast<std::size_t>(index));
  }

 private:
  // Per-trial outcomes of the exact correctness run, reused by the shift criteria.
  struct ExactTrial {
    bool near = false;
    bool ok = false;
    bool wrong_finite = false;
    bool shift_checked = false;
    bool shift_ok = false;
  };
  struct ApproxTrial {
    bool near = false;
    bool ok = false;
    bool shift_checked = false;
    bool shift_ok = false;
  };

  Criterion timed(Criterion (Suite::*m)(), std::size_t index) {
    const auto t0 = std::chrono::steady_clock::now();
    Criterion c;
    try {
      c = (this->*m)();
    } catch (const std::exception& e) {
      c.id = "C" + std::to_string(index);
      c.pass = false;
      c.detail = std::string("exception: ") + e.what();
    }
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (cfg_.log) cfg_.log(c.id + (c.pass ? " PASS " : " FAIL ") + c.title + ": " + c.detail);
    return c;
  }

  std::size_t trials(std::size_t full_count) const {
    return cfg_.full ? full_count : std::max<std::size_t>(10, full_count / 20);
  }

  Seed scheme_seed(std::size_t cell) const {
    return Seed::from_u64(detail::trial_seed(cfg_.seed, 0xff, cell, 0));
  }

  SchemePtr exact_scheme(std::size_t ci) {
    const auto key = std::make_pair(ci, false);
    if (!schemes_.count(key)) schemes_[key] = make_scheme(grid()[ci].n, grid()[ci].k, std::nullopt, scheme_seed(ci));
    return schemes_[key];
  }

  SchemePtr approx_scheme(std::size_t ci) {
    const auto key = std::make_pair(ci, true);
    if (!schemes_.count(key)) schemes_[key] = make_scheme(grid()[ci].n, grid()[ci].k, kEps, scheme_seed(ci));
    return schemes_[key];
  }

  // Exact circular correctness.
  Criterion c1() {
    Criterion c;
    c.id = "C1";
    c.title = "exact circular correctness";
    std::size_t near = 0, near_ok = 0, far = 0, far_ok = 0, wrong = 0;
    const std::size_t count = trials(1000);
    for (std::size_t ci = 0; ci < grid().size(); ++ci) {
      const SchemePtr sc = exact_scheme(ci);
      const SchemeParams& p = sc->params();
      auto res = detail::parallel_map<ExactTrial>(count, cfg_.threads, [&](std::size_t t) {
        oracle::Generator gen(detail::trial_seed(cfg_.seed, 1, ci, t));
        ExactTrial r;
        r.near = t % 2 == 0;
        const std::size_t h = r.near ? gen.uniform(0, p.k) : gen.uniform(p.k + 1, 4 * p.k);
        const auto inst = gen.planted(p, h, detail::regime_for(t / 2, p));
        const CircularSketch a = encode_exact(inst.s1, sc);
        const CircularSketch b = encode_exact(inst.s2, sc);
        const DecodeResult d = decode_exact(a, b, static_cast<std::int64_t>(inst.shift));
        if (r.near) {
          r.ok = d.finite() && d.value == static_cast<double>(h);
        } else {
          r.ok = !d.finite() || d.value > static_cast<double>(p.k);
        }
        if (d.finite() && d.value <= static_cast<double>(p.k) && d.value != static_cast<double>(h)) r.wrong_finite = true;
        const std::size_t other = gen.uniform(0, p.n - 1);
        const DecodeResult e = decode_exact(a, b, static_cast<std::int64_t>(other));
        const std::size_t truth = oracle::hamming_at(inst.s1, inst.s2, static_cast<std::int64_t>(other));
        if (e.finite() && e.value <= static_cast<double>(p.k) && e.value != static_cast<double>(truth)) r.wrong_finite = true;
        if (r.near) {
          r.shift_checked = true;
          const DecodeResult s = shift_exact(a, b);
          r.shift_ok = s.finite() && s.value == static_cast<double>(h);
        }
        return r;
      });
      std::size_t cn = 0, cno = 0, cf = 0, cfo = 0;
      for (const auto& r : res) {
        (r.near ? cn : cf) += 1;
        (r.near ? cno : cfo) += r.ok;
        wrong += r.wrong_finite;
      }
      near += cn;
      near_ok += cno;
      far += cf;
      far_ok += cfo;
      exact_trials_[ci] = std::move(res);
      c.metrics[detail::cell_name(p.n, p.k)] = {{"near", detail::frac(cno, cn)}, {"far", detail::frac(cfo, cf)}};
    }
    c.pass = detail::ratio(near_ok, near) >= 0.99 && detail::ratio(far_ok, far) >= 0.99 && wrong == 0;
    c.detail = "d<=k exact " + detail::frac(near_ok, near) + ", d in (k,4k] rejected " + detail::frac(far_ok, far) +
               ", wrong finite values " + std::to_string(wrong);
    return c;
  }

  // Exact sketch size against C k ln^3 n, and the doubling ratio.
  Criterion c2() {
    Criterion c;
    c.id = "C2";
    c.title = "exact sketch size";
    const std::vector<std::size_t> ks{8, 16, 32, 64, 128, 256};
    double worst_c = 0.0, worst_ratio = 0.0;
    const std::size_t strings = cfg_.full ? 6 : 3;
    for (std::size_t n : {std::size_t{1024}, std::size_t{4096}}) {
      std::vector<std::size_t> sizes;
      for (std::size_t k : ks) {
        const SchemeParams p = make_params(n, k, std::nullopt, scheme_seed(100 + n + k));
        const SchemePtr sc = make_scheme(p);
        auto got = detail::parallel_map<std::size_t>(strings, cfg_.threads, [&](std::size_t t) {
          oracle::Generator gen(detail::trial_seed(cfg_.seed, 2, n + k, t));
          const auto inst = gen.planted(p, 0, detail::regime_for(t, p));
          return serialized_size(encode_exact(inst.s1, sc));
        });
        const std::size_t size = *std::max_element(got.begin(), got.end());
        const double cst = static_cast<double>(size) / (static_cast<double>(k) * std::pow(std::log(double(n)), 3));
        worst_c = std::max(worst_c, cst);
        if (!sizes.empty()) worst_ratio = std::max(worst_ratio, detail::ratio(size, sizes.back()));
        sizes.push_back(size);
        c.metrics[detail::cell_name(n, k)] = {{"bytes", size}, {"C", cst}};
      }
    }
    c.pass = worst_c <= kExactSizeC && worst_ratio <= 2.5;
    c.detail = "max bytes/(k ln^3 n) = " + detail::fmt(worst_c) + " (limit " + detail::fmt(kExactSizeC) +
               "), max size ratio for doubled k = " + detail::fmt(worst_ratio) + " (limit 2.5)";
    return c;
  }

  // Approximate circular correctness.
  Criterion c3() {
    Criterion c;
    c.id = "C3";
    c.title = "approximate circular correctness";
    std::size_t near = 0, near_ok = 0, far = 0, far_ok = 0;
    const std::size_t count = trials(1000);
    for (std::size_t ci = 0; ci < grid().size(); ++ci) {
      const SchemePtr sc = approx_scheme(ci);
      const SchemeParams& p = sc->params();
      const double eps = p.eps_eff;
      auto res = detail::parallel_map<ApproxTrial>(count, cfg_.threads, [&](std::size_t t) {
        oracle::Generator gen(detail::trial_seed(cfg_.seed, 3, ci, t));
        ApproxTrial r;
        r.near = t % 2 == 0;
        const std::size_t h = r.near ? gen.uniform(1, p.k - 3) : gen.uniform(p.k + 3, 4 * p.k);
        const auto inst = gen.planted(p, h, detail::regime_for(t / 2, p));
        const CircularSketch a = encode_approx(inst.s1, sc);
        const CircularSketch b = encode_approx(inst.s2, sc);
        const DecodeResult d = decode_approx(a, b, static_cast<std::int64_t>(inst.shift));
        const double hd = static_cast<double>(h);
        if (r.near) {
          r.ok = d.value >= (1.0 - eps) * hd && d.value <= (1.0 + eps) * hd;
          if (4 * h >= p.k) {
            r.shift_checked = true;
            const DecodeResult s = shift_approx(a, b);
            r.shift_ok = s.value >= (1.0 - eps) * hd && s.value <= (1.0 + eps) * hd;
          }
        } else {
          r.ok = d.value > (1.0 - eps) * static_cast<double>(p.k);
        }
        return r;
      });
      std::size_t cn = 0, cno = 0, cf = 0, cfo = 0;
      for (const auto& r : res) {
        (r.near ? cn : cf) += 1;
        (r.near ? cno : cfo) += r.ok;
      }
      near += cn;
      near_ok += cno;
      far += cf;
      far_ok += cfo;
      approx_trials_[ci] = std::move(res);
      c.metrics[detail::cell_name(p.n, p.k)] = {{"near", detail::frac(cno, cn)}, {"far", detail::frac(cfo, cf)}};
    }
    c.pass = detail::ratio(near_ok, near) >= 0.90 && detail::ratio(far_ok, far) >= 0.99;
    c.detail = "1<=h<=k-3 within (1+-eps)h " + detail::frac(near_ok, near) + ", h>=k+3 rejected " +
               detail::frac(far_ok, far);
    return c;
  }

  // Leveled sketch size in both branches of the bound.
  Criterion c4() {
    Criterion c;
    c.id = "C4";
    c.title = "approximate sketch size";
    std::vector<Cell> cells = grid();
    cells.push_back({1024, 512});
    double worst_narrow = 0.0, worst_wide = 0.0;
    const std::size_t strings = cfg_.full ? 3 : 1;
    for (const Cell& cell : cells) {
      const SchemeParams p = make_params(cell.n, cell.k, kEps, scheme_seed(200 + cell.n + cell.k));
      const SchemePtr sc = make_scheme(p);
      auto got = detail::parallel_map<std::size_t>(strings, cfg_.threads, [&](std::size_t t) {
        oracle::Generator gen(detail::trial_seed(cfg_.seed, 4, cell.n + cell.k, t));
        const auto inst = gen.planted(p, 0, detail::regime_for(t, p));
        return serialized_size(encode_approx(inst.s1, sc));
      });
      const double size = static_cast<double>(*std::max_element(got.begin(), got.end()));
      const double l3 = std::pow(std::log(double(cell.n)), 3);
      const double e = p.eps_eff;
      if (static_cast<double>(cell.k) <= e * cell.n) {
        const double cst = size / (std::sqrt(double(cell.k)) * l3 / (e * e));
        worst_narrow = std::max(worst_narrow, cst);
        c.metrics[detail::cell_name(cell.n, cell.k)] = {{"bytes", size}, {"C_prime", cst}};
      } else {
        const double cst = size / (std::sqrt(double(cell.n)) * l3 / std::pow(e, 1.5));
        worst_wide = std::max(worst_wide, cst);
        c.metrics[detail::cell_name(cell.n, cell.k)] = {{"bytes", size}, {"C_double_prime", cst}};
      }
    }
    c.pass = worst_narrow <= kApproxSizeC && worst_wide <= kApproxSizeCWide;
    c.detail = "k<=eps n: max bytes/(eps^-2 sqrt(k) ln^3 n) = " + detail::fmt(worst_narrow) + " (limit " +
               detail::fmt(kApproxSizeC) + "); k>eps n: max bytes/(eps^-1.5 sqrt(n) ln^3 n) = " +
               detail::fmt(worst_wide) + " (limit " + detail::fmt(kApproxSizeCWide) + ")";
    return c;
  }

  // Selection-function size, equivariance and overlap.
  Criterion c5() {
    Criterion c;
    c.id = "C5";
    c.title = "selection function";
    struct Sel {
      bool fn_ok = true, fc_upper = true, fc_lower = true, overlap_ok = true;
    };
    std::size_t total = 0, fn_ok = 0, fc_up = 0, fc_low = 0, ov = 0;
    const std::size_t count = trials(1000);
    for (std::size_t ci = 0; ci < grid().size(); ++ci) {
      const SchemePtr sc = exact_scheme(ci);
      const SchemeParams& p = sc->params();
      if (p.fallback) continue;
      auto res = detail::parallel_map<Sel>(count, cfg_.threads, [&](std::size_t t) {
        oracle::Generator gen(detail::trial_seed(cfg_.seed, 5, ci, t));
        // Strings outside H: nonperiodic and mixed regimes alternate.
        const oracle::Regime regime = t % 2 ? oracle::Regime::mixed : oracle::Regime::nonperiodic;
        const auto inst = gen.planted(p, gen.uniform(0, p.k), regime);
        Sel r;
        const CubicAnalysis ca = analyze_cubic(inst.s1, p.ell);
        const PositionSet fn = select_noncubic(inst.s1, ca, sc->gate());
        const PositionSet fc = select_cubic(inst.s1, ca).positions;
        const double ln_n = std::log(double(p.n));
        r.fn_ok = static_cast<double>(fn.size()) < 8.0 * p.k * ln_n;
        const Rational gk = p.gamma_k();
        r.fc_upper = Rational{static_cast<std::int64_t>(fc.size()), 1} <= Rational{36, 1} * gk;
        // |f_c| >= (gamma k / 3n) |P|
        r.fc_lower = Rational{static_cast<std::int64_t>(fc.size()) * 3 * p.n, 1} >=
                     gk * Rational{static_cast<std::int64_t>(ca.cubic.size()), 1};
        // Overlap for the aligned pair S1, cyc^shift(S2), both within distance <= k of each other.
        const Str t2 = rotate(inst.s2, static_cast<std::int64_t>(inst.shift));
        const Selection f1 = select(inst.s1, p.ell, sc->gate());
        const Selection f2 = select(t2, p.ell, sc->gate());
        std::vector<Pos> common;
        std::set_intersection(f1.all.members().begin(), f1.all.members().end(), f2.all.members().begin(),
                              f2.all.members().end(), std::back_inserter(common));
        r.overlap_ok = common.size() >= p.k;
        return r;
      });
      for (const auto& r : res) {
        ++total;
        fn_ok += r.fn_ok;
        fc_up += r.fc_upper;
        fc_low += r.fc_lower;
        ov += r.overlap_ok;
      }
    }
    // Equivariance at n = 256, k = 2, all shifts.
    const std::size_t strings = cfg_.full ? 100 : 10;
    const SchemeParams small = make_params(256, 2, std::nullopt, scheme_seed(300));
    const SchemePtr ssc = make_scheme(small);
    auto eq = detail::parallel_map<int>(strings, cfg_.threads, [&](std::size_t t) {
      oracle::Generator gen(detail::trial_seed(cfg_.seed, 55, 0, t));
      Str s = t % 3 == 0   ? gen.random_string(256, 256)
              : t % 3 == 1 ? gen.planted(small, 0, oracle::Regime::mixed).s1
                           : gen.random_string(256, 2);
      const PositionSet f0 = select(s, small.ell, ssc->gate()).all;
      for (std::size_t j = 0; j < 256; ++j) {
        const PositionSet fj = select(rotate(s, static_cast<std::int64_t>(j)), small.ell, ssc->gate()).all;
        if (!(fj == rot_set(f0, static_cast<std::int64_t>(j)))) return 0;
      }
      return 1;
    });
    const auto eq_ok = static_cast<std::size_t>(std::count(eq.begin(), eq.end(), 1));
    c.pass = fn_ok == total && fc_up == total && fc_low == total && eq_ok == strings &&
             detail::ratio(ov, total) >= 0.99;
    c.detail = "|f_n|<8k ln n " + detail::frac(fn_ok, total) + ", |f_c|<=36 gamma k " + detail::frac(fc_up, total) +
               ", |f_c|>=(gamma k/3n)|P| " + detail::frac(fc_low, total) + ", equivariant strings " +
               detail::frac(eq_ok, strings) + ", overlap>=k " + detail::frac(ov, total);
    return c;
  }

  // Syndrome sketch recovery up to t errors and overflow beyond.
  Criterion c6() {
    Criterion c;
    c.id = "C6";
    c.title = "syndrome sketch contract";
    const std::size_t n = 1024;
    const SchemeParams p = make_params(n, 8, std::nullopt, scheme_seed(400));
    std::vector<Pos> all(n);
    for (std::size_t q = 0; q < n; ++q) all[q] = static_cast<Pos>(q + 1);
    const SyndromeCodec codec(n, p.sigma, p.prime, p.omega, p.t, p.verify_points, PositionSet(n, all),
                              Prf(p.seed, p.label("verify")));
    const std::size_t per_e = trials(500);
    const std::size_t t_cap = p.t;
    const std::size_t total = (t_cap + 1) * per_e;
    auto rec = detail::parallel_map<int>(total, cfg_.threads, [&](std::size_t idx) {
      const std::size_t e = idx / per_e;
      oracle::Generator gen(detail::trial_seed(cfg_.seed, 6, e, idx));
      const Str s = gen.random_string(n, p.sigma);
      const Str u = gen.substitute(s, e, p.sigma);
      const auto mi = codec.decode(codec.encode(s), codec.encode(u));
      if (!mi) return 0;
      const auto truth = oracle::mismatches(s, u);
      if (mi->entries().size() != truth.size()) return 0;
      for (std::size_t j = 0; j < truth.size(); ++j) {
        const Mismatch& x = mi->entries()[j];
        if (x.pos != truth[j].pos || x.left != truth[j].left || x.right != truth[j].right) return 0;
      }
      return 1;
    });
    const auto rec_ok = static_cast<std::size_t>(std::count(rec.begin(), rec.end(), 1));
    const std::size_t over_count = trials(500);
    auto over = detail::parallel_map<int>(over_count, cfg_.threads, [&](std::size_t idx) {
      oracle::Generator gen(detail::trial_seed(cfg_.seed, 66, 0, idx));
      const std::size_t e = gen.uniform(t_cap + 1, 4 * t_cap);
      const Str s = gen.random_string(n, p.sigma);
      const Str u = gen.substitute(s, e, p.sigma);
      return codec.decode(codec.encode(s), codec.encode(u)) ? 0 : 1;
    });
    const auto over_ok = static_cast<std::size_t>(std::count(over.begin(), over.end(), 1));
    c.pass = rec_ok == total && detail::ratio(over_ok, over_count) >= 0.99;
    c.detail = "t=" + std::to_string(t_cap) + ", exact recovery for e in [0,t] " + detail::frac(rec_ok, total) +
               ", overflow for e in (t,4t] " + detail::frac(over_ok, over_count);
    return c;
  }

  // Composition of mismatch information.
  Criterion c7() {
    Criterion c;
    c.id = "C7";
    c.title = "mismatch composition identity";
    const std::size_t count = trials(1000);
    auto res = detail::parallel_map<int>(count, cfg_.threads, [&](std::size_t t) {
      oracle::Generator gen(detail::trial_seed(cfg_.seed, 7, 0, t));
      const std::size_t n = gen.uniform(1, 300);
      const std::uint64_t sigma = gen.uniform(2, 6);
      const Str s = gen.random_string(n, sigma);
      const Str u = gen.substitute(s, gen.uniform(0, n), sigma);
      const Str v = gen.substitute(u, gen.uniform(0, n), sigma);
      const MismatchInfo composed = compose_mismatches(mismatch_info(s, u), mismatch_info(u, v));
      const auto truth = oracle::mismatches(s, v);
      if (composed.entries().size() != truth.size()) return 0;
      for (std::size_t j = 0; j < truth.size(); ++j) {
        const Mismatch& x = composed.entries()[j];
        if (x.pos != truth[j].pos || x.left != truth[j].left || x.right != truth[j].right) return 0;
      }
      return 1;
    });
    const auto ok = static_cast<std::size_t>(std::count(res.begin(), res.end(), 1));
    c.pass = ok == count;
    c.detail = "composed equals direct " + detail::frac(ok, count);
    return c;
  }

  // Zero sketches: false-equal rate and completeness on true rotations.
  Criterion c8() {
    Criterion c;
    c.id = "C8";
    c.title = "zero-mismatch sketches";
    struct Z {
      std::size_t checks = 0, false_equal = 0, true_pairs = 0, missed = 0;
      double n_over_p = 0.0;
    };
    const std::size_t count = trials(1000);
    auto res = detail::parallel_map<Z>(count, cfg_.threads, [&](std::size_t t) {
      const std::size_t n = t % 2 ? 1024 : 4096;
      const SchemePtr sc = zero_scheme(n);
      oracle::Generator gen(detail::trial_seed(cfg_.seed, 8, 0, t));
      Str s1, s2;
      switch (t % 4) {
        case 0:  // true rotation
          s1 = gen.random_string(n, 256);
          s2 = Str(oracle::rotated(s1, static_cast<std::int64_t>(gen.uniform(0, n - 1))));
          break;
        case 1:  // rotation plus one substitution
          s1 = gen.random_string(n, 2);
          s2 = Str(oracle::rotated(gen.substitute(s1, 1, 2), static_cast<std::int64_t>(gen.uniform(0, n - 1))));
          break;
        case 2:  // periodic, rotated
          s1 = gen.periodic_with_noise(n, 16, 0, 3).base;
          s2 = Str(oracle::rotated(s1, static_cast<std::int64_t>(gen.uniform(0, n - 1))));
          break;
        default:  // independent
          s1 = gen.random_string(n, 2);
          s2 = gen.random_string(n, 2);
          break;
      }
      const ZeroSketch z1 = encode_zero(s1, *sc);
      const ZeroSketch z2 = encode_zero(s2, *sc);
      Z r;
      r.n_over_p = static_cast<double>(n) / static_cast<double>(sc->params().prime);
      const auto a = s1.symbols();
      const auto b = s2.symbols();
      for (std::size_t m = 0; m < n; ++m) {
        bool equal = true;
        for (std::size_t q = 0; q < n && equal; ++q) equal = a[q] == b[(q + m) % n];
        const bool zero = decode_zero(z1, z2, static_cast<std::int64_t>(m)) == 0.0;
        if (equal) {
          ++r.true_pairs;
          r.missed += !zero;
        } else {
          ++r.checks;
          r.false_equal += zero;
        }
      }
      return r;
    });
    std::size_t checks = 0, fe = 0, tp = 0, missed = 0;
    double bound = 0.0;
    for (const auto& r : res) {
      checks += r.checks;
      fe += r.false_equal;
      tp += r.true_pairs;
      missed += r.missed;
      bound = std::max(bound, 10.0 * r.n_over_p);
    }
    const double rate = detail::ratio(fe, checks);
    c.pass = rate <= bound && missed == 0;
    c.detail = "false-equal rate " + detail::fmt(rate) + " (limit 10n/p = " + detail::fmt(bound) +
               "), true rotations decoded to 0: " + detail::frac(tp - missed, tp);
    return c;
  }

  // Shift-distance decoders.
  Criterion c9() {
    Criterion c;
    c.id = "C9";
    c.title = "shift-distance decoders";
    if (exact_trials_.empty()) c1();
    if (approx_trials_.empty()) c3();
    std::size_t ex = 0, ex_ok = 0, ap = 0, ap_ok = 0;
    for (const auto& [ci, res] : exact_trials_)
      for (const auto& r : res)
        if (r.shift_checked) {
          ++ex;
          ex_ok += r.shift_ok;
        }
    for (const auto& [ci, res] : approx_trials_)
      for (const auto& r : res)
        if (r.shift_checked) {
          ++ap;
          ap_ok += r.shift_ok;
        }
    // shift_exact against the clipped minimum of per-shift decodes.
    const std::size_t count = trials(200);
    const SchemePtr sc = make_scheme(512, 8, std::nullopt, scheme_seed(500));
    const SchemeParams& p = sc->params();
    auto same = detail::parallel_map<int>(count, cfg_.threads, [&](std::size_t t) {
      oracle::Generator gen(detail::trial_seed(cfg_.seed, 9, 0, t));
      const auto inst = gen.planted(p, gen.uniform(0, 2 * p.k), detail::regime_for(t, p));
      const CircularSketch a = encode_exact(inst.s1, sc);
      const CircularSketch b = encode_exact(inst.s2, sc);
      double best = kInfinity;
      for (std::size_t m = 0; m < p.n; ++m) best = std::min(best, decode_exact(a, b, static_cast<std::int64_t>(m)).value);
      const DecodeResult s = shift_exact(a, b);
      const double kd = static_cast<double>(p.k);
      const double lhs = s.value <= kd ? s.value : kInfinity;
      const double rhs = best <= kd ? best : kInfinity;
      if (lhs != rhs) return 0;
      if (s.value <= kd && decode_exact(a, b, static_cast<std::int64_t>(*s.shift)).value != s.value) return 0;
      return 1;
    });
    const auto same_ok = static_cast<std::size_t>(std::count(same.begin(), same.end(), 1));
    c.pass = detail::ratio(ex_ok, ex) >= 0.99 && same_ok == count && detail::ratio(ap_ok, ap) >= 0.90;
    c.detail = "shift_exact = sh for sh<=k " + detail::frac(ex_ok, ex) + ", equals min over per-shift decodes " +
               detail::frac(same_ok, count) + ", shift_approx within (1+-eps) for sh in [k/4,k-3] " +
               detail::frac(ap_ok, ap);
    return c;
  }

  // Base recovery and aligned bases.
  Criterion c10() {
    Criterion c;
    c.id = "C10";
    c.title = "pseudo-periodic machinery";
    std::size_t rec = 0, rec_ok = 0, al = 0, al_ok = 0;
    const std::size_t count = trials(1000);
    const std::size_t pairs = trials(500);
    for (std::size_t ci = 0; ci < grid().size(); ++ci) {
      const SchemePtr sc = exact_scheme(ci);
      const SchemeParams& p = sc->params();
      if (p.fallback) continue;
      const Rational gk = p.gamma_k();
      // Uniqueness regime: floor(3 gamma k) > 2 (gamma + 1) k.
      if (!(Rational{(Rational{3, 1} * gk).floor(), 1} > Rational{2, 1} * p.beta_h_prime())) continue;
      auto base = detail::parallel_map<int>(count, cfg_.threads, [&](std::size_t t) {
        oracle::Generator gen(detail::trial_seed(cfg_.seed, 10, ci, t));
        const std::size_t noise = gen.uniform(0, static_cast<std::size_t>(gk.floor()));
        const auto planted = gen.periodic_with_noise(p.n, p.ell, noise, p.sigma);
        const auto fb = find_base(planted.noisy, p.alpha(), p.beta_h());
        return fb && fb->base == planted.base && fb->period == planted.period ? 1 : 0;
      });
      rec += count;
      rec_ok += static_cast<std::size_t>(std::count(base.begin(), base.end(), 1));
      auto aligned = detail::parallel_map<int>(pairs, cfg_.threads, [&](std::size_t t) {
        oracle::Generator gen(detail::trial_seed(cfg_.seed, 110, ci, t));
        const auto inst = gen.planted(p, gen.uniform(0, p.k), oracle::Regime::pseudoperiodic);
        const auto b1 = find_base(inst.s1, p.alpha(), p.beta_h_prime());
        const auto b2 = find_base(inst.s2, p.alpha(), p.beta_h_prime());
        if (!b1 || !b2) return 0;
        return b1->base.symbols().size() == p.n &&
                       std::equal(b1->base.symbols().begin(), b1->base.symbols().end(),
                                  oracle::rotated(b2->base, static_cast<std::int64_t>(inst.shift)).begin())
                   ? 1
                   : 0;
      });
      al += pairs;
      al_ok += static_cast<std::size_t>(std::count(aligned.begin(), aligned.end(), 1));
    }
    c.pass = rec > 0 && rec_ok == rec && al_ok == al;
    c.detail = "planted base recovered " + detail::frac(rec_ok, rec) + ", bases aligned S1'=cyc^m(S2') " +
               detail::frac(al_ok, al);
    return c;
  }

  // Byte-identical cross-process encodes and cross-process decodes.
  Criterion c11() {
    Criterion c;
    c.id = "C11";
    c.title = "reproducibility across processes";
    if (cfg_.cli.empty() || !std::filesystem::exists(cfg_.cli)) {
      c.detail = "circsketch executable not found";
      return c;
    }
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() /
                         ("circsketch-selftest-" + std::to_string(::getpid()) + "-" +
                          std::to_string(detail::trial_seed(cfg_.seed, 11, 0, 0) & 0xffffff));
    fs::create_directories(dir);
    const std::string seed_hex = Seed::from_u64(detail::trial_seed(cfg_.seed, 11, 1, 0)).to_hex();
    const std::string cli = detail::quote(cfg_.cli);
    std::size_t runs = 0, identical = 0, decodes = 0, decode_ok = 0;
    const std::size_t instances = cfg_.full ? 4 : 2;
    struct Case {
      const char* mode;
      std::size_t n;
      std::size_t k;
    };
    const Case cases[] = {{"exact", 1024, 8}, {"approx", 1024, 8}, {"exact", 1024, 32}, {"approx", 1024, 32}};
    for (const Case& cs : cases) {
      const SchemeParams p = make_params(cs.n, cs.k, std::string(cs.mode) == "approx" ? std::optional(kEps) : std::nullopt,
                                         Seed::from_hex(seed_hex));
      for (std::size_t t = 0; t < instances; ++t) {
        oracle::Generator gen(detail::trial_seed(cfg_.seed, 11, cs.n + cs.k, t));
        const std::size_t h = t % 2 ? gen.uniform(1, cs.k - 3) : 0;
        const auto inst = gen.planted(p, h, oracle::Regime::nonperiodic);
        const std::string tag = std::string(cs.mode) + "-" + std::to_string(cs.k) + "-" + std::to_string(t);
        const fs::path in1 = dir / (tag + "-1.bin"), in2 = dir / (tag + "-2.bin");
        for (const auto& [path, s] : {std::pair{in1, &inst.s1}, std::pair{in2, &inst.s2}}) {
          std::ofstream out(path, std::ios::binary);
          for (Symbol x : s->symbols()) out.put(static_cast<char>(x));
        }
        const std::string common = std::string(" --mode ") + cs.mode + " --k " + std::to_string(cs.k) +
                                   (std::string(cs.mode) == "approx" ? " --eps 0.25" : "") + " --seed " + seed_hex;
        const fs::path a1 = dir / (tag + "-a.sk"), a2 = dir / (tag + "-a2.sk"), b1 = dir / (tag + "-b.sk");
        const std::string quiet = " 2>/dev/null";
        const bool enc = detail::run(cli + " encode " + detail::quote(in1.string()) + common + " --out " +
                                     detail::quote(a1.string()) + quiet) == 0 &&
                         detail::run(cli + " encode " + detail::quote(in1.string()) + common + " --out " +
                                     detail::quote(a2.string()) + quiet) == 0 &&
                         detail::run(cli + " encode " + detail::quote(in2.string()) + common + " --out " +
                                     detail::quote(b1.string()) + quiet) == 0;
        ++runs;
        const auto bytes1 = detail::slurp(a1);
        identical += enc && !bytes1.empty() && bytes1 == detail::slurp(a2);
        ++decodes;
        int status = 0;
        const std::string got = detail::capture(cli + " dist " + detail::quote(a1.string()) + " " +
                                                    detail::quote(b1.string()) + " --shift " +
                                                    std::to_string(inst.shift) + " --seed " + seed_hex + quiet,
                                                status);
        bool ok = false;
        if (status == 0) {
          const double v = std::strtod(got.c_str(), nullptr);
          ok = std::string(cs.mode) == "exact" ? v == static_cast<double>(h)
                                               : v >= (1 - kEps) * h - 1e-9 && v <= (1 + kEps) * h + 1e-9;
        }
        // Same decode in process must agree with the cross-process answer.
        if (ok) {
          const SchemePtr sc = make_scheme(p);
          const CircularSketch x = std::string(cs.mode) == "exact" ? encode_exact(inst.s1, sc) : encode_approx(inst.s1, sc);
          ok = serialize(x) == bytes1;
        }
        decode_ok += ok;
      }
    }
    std::error_code ec;
    fs::remove_all(dir, ec);
    c.pass = identical == runs && decode_ok == decodes;
    c.detail = "byte-identical encodes " + detail::frac(identical, runs) + ", cross-process decodes correct " +
               detail::frac(decode_ok, decodes);
    return c;
  }

  SchemePtr zero_scheme(std::size_t n) {
    std::lock_guard lock(zero_mutex_);
    auto& slot = zero_schemes_[n];
    if (!slot) slot = std::make_shared<const Scheme>(make_params(n, 1, std::nullopt, scheme_seed(600 + n)), false);
    return slot;
  }

  Config cfg_;
  std::map<std::pair<std::size_t, bool>, SchemePtr> schemes_;
  std::map<std::size_t, std::vector<ExactTrial>> exact_trials_;
  std::map<std::size_t, std::vector<ApproxTrial>> approx_trials_;
  std::mutex zero_mutex_;
  std::map<std::size_t, SchemePtr> zero_schemes_;
};

inline nlohmann::json report(const std::vector<Criterion>& results, bool full) {
  nlohmann::json j;
  j["suite"] = full ? "full" : "fast";
  bool all = true;
  for (const auto& c : results) {
    all = all && c.pass;
    j["criteria"].push_back({{"id", c.id},
                             {"title", c.title},
                             {"pass", c.pass},
                             {"detail", c.detail},
                             {"seconds", c.seconds},
                             {"metrics", c.metrics}});
  }
  j["pass"] = all;
  return j;
}

}  // namespace circsketch::selftest
