// circsketch: encode strings to sketch files and decode distances between them.
//
// Exit codes: 0 ok, 2 usage or incompatible inputs, 3 distance over budget or failed self-test, 4 internal.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "circsketch/circsketch.hpp"
#include "circsketch/oracle.hpp"
#include "circsketch/selftest.hpp"
#include "json.hpp"

namespace cs = circsketch;
using nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 2;
constexpr int kBudget = 3;
constexpr int kInternal = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_all(const std::string& path) {
  if (path.empty() || path == "-") return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

cs::Str read_input(const std::string& path, const std::string& alphabet, std::uint64_t sigma) {
  const std::string raw = read_all(path);
  std::vector<cs::Symbol> v;
  if (alphabet == "bytes") {
    v.reserve(raw.size());
    for (unsigned char c : raw) v.push_back(c);
  } else {
    std::istringstream in(raw);
    std::string tok;
    while (in >> tok) {
      std::size_t used = 0;
      unsigned long long x = 0;
      try {
        x = std::stoull(tok, &used, 10);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size() || tok[0] == '-' || x > 0xffffffffULL) throw UsageError("not a u32 symbol: " + tok);
      v.push_back(static_cast<cs::Symbol>(x));
    }
  }
  if (v.empty()) throw UsageError("input is empty");
  for (cs::Symbol x : v)
    if (x >= sigma) throw UsageError("symbol " + std::to_string(x) + " is outside the alphabet; raise --sigma");
  return cs::Str(std::move(v));
}

cs::CircularSketch load(const std::string& path, const cs::Seed& seed) {
  return cs::deserialize(cs::read_file(path), seed);
}

void check_compatible(const cs::CircularSketch& a, const cs::CircularSketch& b) {
  if (!(a.params() == b.params()) || a.mode != b.mode) throw UsageError("sketch headers are incompatible");
}

std::string number(double v) {
  if (v == std::floor(v) && std::abs(v) < 1e15) return std::to_string(static_cast<long long>(v));
  std::ostringstream o;
  o.precision(6);
  o << v;
  return o.str();
}

// Prints a decoded value or the budget failure marker; returns the exit code.
int report(const cs::CircularSketch& a, const cs::DecodeResult& r, json detail) {
  const auto& p = a.params();
  const bool approx = a.mode == cs::SketchMode::leveled;
  const bool over = !r.finite() || r.value > static_cast<double>(p.k);
  detail["value"] = r.finite() ? json(r.value) : json("inf");
  if (r.shift) detail["shift"] = *r.shift;
  detail["k"] = p.k;
  if (approx) detail["eps"] = p.eps_eff;
  detail["status"] = over ? "budget-fail" : "ok";
  std::cerr << detail.dump() << "\n";
  if (over) {
    std::cout << (approx ? "FAIL(>(1-eps)k)" : "FAIL(>k)") << "\n";
    return kBudget;
  }
  std::cout << number(r.value) << "\n";
  return kOk;
}

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

struct BenchRow {
  std::size_t n;
  std::size_t k;
  std::optional<double> eps;
};

std::vector<BenchRow> read_grid(const std::string& path) {
  std::vector<BenchRow> rows;
  if (path.empty()) {
    for (const auto& c : cs::selftest::grid()) {
      rows.push_back({c.n, c.k, std::nullopt});
      rows.push_back({c.n, c.k, cs::selftest::kEps});
    }
    return rows;
  }
  std::istringstream in(read_all(path));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::size_t n = 0, k = 0;
    std::string eps;
    if (!(ls >> n >> k)) throw UsageError("grid line needs n and k: " + line);
    ls >> eps;
    BenchRow row{n, k, std::nullopt};
    if (!eps.empty() && eps != "-") row.eps = std::stod(eps);
    rows.push_back(row);
  }
  return rows;
}

int run_bench(const std::string& grid_path, const cs::Seed& seed) {
  std::cout << "n,k,eps,bytes,encode_ms,decode_ms\n";
  for (const BenchRow& row : read_grid(grid_path)) {
    const cs::SchemePtr sc = cs::make_scheme(row.n, row.k, row.eps, seed);
    cs::oracle::Generator gen(row.n * 131 + row.k);
    const auto inst = gen.planted(sc->params(), row.k / 2, cs::oracle::Regime::nonperiodic);
    auto t0 = std::chrono::steady_clock::now();
    const auto a = row.eps ? cs::encode_approx(inst.s1, sc) : cs::encode_exact(inst.s1, sc);
    const double enc = ms_since(t0);
    const auto b = row.eps ? cs::encode_approx(inst.s2, sc) : cs::encode_exact(inst.s2, sc);
    t0 = std::chrono::steady_clock::now();
    const auto m = static_cast<std::int64_t>(inst.shift);
    const auto d = row.eps ? cs::decode_approx(a, b, m) : cs::decode_exact(a, b, m);
    const double dec = ms_since(t0);
    (void)d;
    std::cout << row.n << "," << row.k << "," << (row.eps ? number(*row.eps) : std::string()) << ","
              << cs::serialized_size(a) << "," << enc << "," << dec << "\n";
  }
  // Smoke check: one per-shift decode against the naive decode at every shift.
  const cs::SchemePtr sc = cs::make_scheme(4096, 32, std::nullopt, seed);
  cs::oracle::Generator gen(4096 * 131 + 32);
  const auto inst = gen.planted(sc->params(), 16, cs::oracle::Regime::nonperiodic);
  const auto a = cs::encode_exact(inst.s1, sc);
  const auto b = cs::encode_exact(inst.s2, sc);
  auto t0 = std::chrono::steady_clock::now();
  (void)cs::decode_exact(a, b, static_cast<std::int64_t>(inst.shift));
  const double one = ms_since(t0);
  t0 = std::chrono::steady_clock::now();
  for (std::size_t m = 0; m < sc->params().n; ++m) (void)cs::decode_exact(a, b, static_cast<std::int64_t>(m));
  const double all = ms_since(t0);
  const double ratio = all / std::max(one, 1e-6);
  std::cerr << json{{"smoke", {{"n", 4096}, {"k", 32}, {"per_shift_decode_ms", one}, {"all_shifts_naive_ms", all},
                              {"ratio", ratio}, {"pass", ratio >= 5.0}}}}
                   .dump()
            << "\n";
  return ratio >= 5.0 ? kOk : kBudget;
}

std::string self_path(const char* argv0) {
  std::error_code ec;
  const auto p = std::filesystem::read_symlink("/proc/self/exe", ec);
  return ec ? std::string(argv0) : p.string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Circular k-mismatch sketches"};
  app.require_subcommand(1);

  std::string seed_hex;
  std::string input, out, mode = "exact", alphabet = "bytes";
  std::size_t k = 0;
  std::optional<double> eps;
  std::uint64_t sigma = 256;
  std::string sk_a, sk_b;
  std::int64_t shift = 0;
  std::string suite = "fast";
  unsigned threads = 0;
  std::string grid;

  auto add_seed = [&](CLI::App* sub, bool required) {
    auto* o = sub->add_option("--seed", seed_hex, "shared seed, 64 hex characters");
    if (required) o->required();
  };

  auto* enc = app.add_subcommand("encode", "encode a string into a sketch file");
  enc->add_option("input", input, "input path, or - for stdin")->default_val("-");
  enc->add_option("--mode", mode, "exact or approx")->check(CLI::IsMember({"exact", "approx"}));
  enc->add_option("--k", k, "distance budget")->required();
  enc->add_option("--eps", eps, "approximation factor, approx mode only");
  enc->add_option("--out", out, "output sketch path")->required();
  enc->add_option("--alphabet", alphabet, "bytes or u32")->check(CLI::IsMember({"bytes", "u32"}));
  enc->add_option("--sigma", sigma, "alphabet size");
  add_seed(enc, true);

  auto* dist = app.add_subcommand("dist", "distance between two sketches at a shift");
  dist->add_option("a", sk_a)->required();
  dist->add_option("b", sk_b)->required();
  dist->add_option("--shift", shift, "shift m; estimates Ham(S1, cyc^m(S2))")->default_val(0);
  add_seed(dist, true);

  auto* sh = app.add_subcommand("shift", "minimum distance over all shifts");
  sh->add_option("a", sk_a)->required();
  sh->add_option("b", sk_b)->required();
  add_seed(sh, true);

  auto* sel = app.add_subcommand("select", "print the selected positions of a string");
  sel->add_option("input", input, "input path, or - for stdin")->default_val("-");
  sel->add_option("--k", k, "distance budget")->required();
  sel->add_option("--alphabet", alphabet, "bytes or u32")->check(CLI::IsMember({"bytes", "u32"}));
  sel->add_option("--sigma", sigma, "alphabet size");
  add_seed(sel, true);

  auto* st = app.add_subcommand("selftest", "run the acceptance suite and print a JSON report");
  st->add_option("--suite", suite, "fast or full")->check(CLI::IsMember({"fast", "full"}));
  st->add_option("--threads", threads, "worker threads, 0 for all cores");

  auto* bench = app.add_subcommand("bench", "size and time grid as CSV");
  bench->add_option("--grid", grid, "file with lines 'n k [eps]'");
  add_seed(bench, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*enc) {
      if (mode == "approx" && !eps) eps = 0.25;
      if (mode == "exact" && eps) throw UsageError("--eps applies to approx mode only");
      const cs::Seed seed = cs::Seed::from_hex(seed_hex);
      const cs::Str s = read_input(input, alphabet, sigma);
      const cs::SchemePtr scheme = cs::make_scheme(s.size(), k, eps, seed, sigma);
      const cs::CircularSketch sk = mode == "exact" ? cs::encode_exact(s, scheme) : cs::encode_approx(s, scheme);
      const auto bytes = cs::serialize(sk);
      cs::write_file(out, bytes);
      json info{{"bytes", bytes.size()}, {"kind", sk.kind()}, {"mode", mode}, {"n", s.size()}, {"k", k}};
      if (sk.mode == cs::SketchMode::leveled) {
        json kinds = json::array();
        for (const auto& lvl : sk.levels) kinds.push_back({{"k", lvl.params().k}, {"kind", lvl.kind()}});
        info["levels"] = kinds;
      }
      std::cerr << info.dump() << "\n";
      return kOk;
    }
    if (*dist || *sh) {
      const cs::Seed seed = cs::Seed::from_hex(seed_hex);
      const auto a = load(sk_a, seed);
      const auto b = load(sk_b, seed);
      check_compatible(a, b);
      const bool approx = a.mode == cs::SketchMode::leveled;
      if (!approx && a.mode != cs::SketchMode::exact) throw UsageError("unsupported sketch mode");
      if (*dist) {
        const auto r = approx ? cs::decode_approx(a, b, shift) : cs::decode_exact(a, b, shift);
        return report(a, r, {{"op", "dist"}, {"requested_shift", shift}});
      }
      const auto r = approx ? cs::shift_approx(a, b) : cs::shift_exact(a, b);
      return report(a, r, {{"op", "shift"}});
    }
    if (*sel) {
      const cs::Seed seed = cs::Seed::from_hex(seed_hex);
      const cs::Str s = read_input(input, alphabet, sigma);
      const cs::SchemePtr scheme = cs::make_scheme(s.size(), k, std::nullopt, seed, sigma);
      const auto& p = scheme->params();
      json j{{"n", p.n}, {"k", p.k}, {"ell", p.ell}};
      if (p.fallback) {
        j["fallback"] = true;
      } else if (cs::in_h(s, p)) {
        j["pseudo_periodic"] = true;
      } else {
        const cs::Selection f = cs::select(s, p.ell, scheme->gate());
        j["noncubic"] = f.noncubic.members();
        j["cubic"] = f.cubic.members();
      }
      std::cout << j.dump() << "\n";
      return kOk;
    }
    if (*st) {
      cs::selftest::Config cfg;
      cfg.full = suite == "full";
      cfg.threads = threads;
      cfg.cli = self_path(argv[0]);
      cfg.log = [](const std::string& line) { std::cerr << line << "\n"; };
      cs::selftest::Suite s(cfg);
      const auto results = s.run_all();
      const json rep = cs::selftest::report(results, cfg.full);
      std::cout << rep.dump(2) << "\n";
      return rep["pass"].get<bool>() ? kOk : kBudget;
    }
    if (*bench) {
      const cs::Seed seed = seed_hex.empty() ? cs::Seed::from_u64(1) : cs::Seed::from_hex(seed_hex);
      return run_bench(grid, seed);
    }
  } catch (const UsageError& e) {
    std::cerr << json{{"error", e.what()}, {"kind", "usage"}}.dump() << "\n";
    return kUsage;
  } catch (const cs::DomainError& e) {
    std::cerr << json{{"error", e.what()}, {"kind", "usage"}}.dump() << "\n";
    return kUsage;
  } catch (const cs::FormatError& e) {
    std::cerr << json{{"error", e.what()}, {"kind", "format"}}.dump() << "\n";
    return kUsage;
  } catch (const cs::InconsistencyError& e) {
    std::cerr << json{{"error", e.what()}, {"kind", "usage"}}.dump() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", e.what()}, {"kind", "internal"}}.dump() << "\n";
    return kInternal;
  }
  return kInternal;
}
