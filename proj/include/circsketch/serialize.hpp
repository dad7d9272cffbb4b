#pragma once

#include <sodium.h>

#include <array>
#include <cstdint>
#include <fstream>
#include <iterator>
#include "json.hpp"
#include <string>
#include <vector>

#include "circsketch/circular_sketch.hpp"

namespace circsketch {

inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr const char* kCreatedBy = "circsketch 1.0.0";
inline constexpr std::array<char, 4> kMagic{'C', 'K', 'S', 'K'};

namespace wire {

enum Tag : std::uint8_t {
  kExactNp = 1,
  kExactPp = 2,
  kVerbatim = 3,
  kApproxNp = 4,
  kApproxPp = 5,
  kAlt = 6,
  kZero = 7,
  kLevel = 8,
};

class Writer {
 public:
  void byte(std::uint8_t b) { out_.push_back(b); }
  void bytes(const std::vector<std::uint8_t>& b) { out_.insert(out_.end(), b.begin(), b.end()); }
  void raw(const void* p, std::size_t len) {
    const auto* c = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), c, c + len);
  }
  void varint(std::uint64_t x) {
    while (x >= 0x80) {
      out_.push_back(static_cast<std::uint8_t>(x | 0x80));
      x >>= 7;
    }
    out_.push_back(static_cast<std::uint8_t>(x));
  }
  void zigzag(std::int64_t x) { varint((static_cast<std::uint64_t>(x) << 1) ^ static_cast<std::uint64_t>(x >> 63)); }
  // Little-endian, fixed width.
  void fixed(std::uint64_t x, std::size_t width) {
    for (std::size_t i = 0; i < width; ++i) out_.push_back(static_cast<std::uint8_t>(x >> (8 * i)));
  }
  void positions(const std::vector<Pos>& v) {
    Pos prev = 0;
    for (Pos p : v) {
      varint(p - prev);
      prev = p;
    }
  }
  void section(std::uint8_t tag, const Writer& body) {
    byte(tag);
    varint(body.out_.size());
    bytes(body.out_);
  }
  const std::vector<std::uint8_t>& data() const { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  Reader(const std::uint8_t* p, std::size_t len) : p_(p), end_(p + len) {}

  bool done() const { return p_ == end_; }
  std::size_t remaining() const { return static_cast<std::size_t>(end_ - p_); }

  std::uint8_t byte() {
    need(1);
    return *p_++;
  }
  std::uint64_t varint() {
    std::uint64_t x = 0;
    for (int shift = 0; shift < 64; shift += 7) {
      const std::uint8_t b = byte();
      x |= static_cast<std::uint64_t>(b & 0x7f) << shift;
      if (!(b & 0x80)) return x;
    }
    throw FormatError("varint too long");
  }
  std::int64_t zigzag() {
    const std::uint64_t u = varint();
    return static_cast<std::int64_t>(u >> 1) ^ -static_cast<std::int64_t>(u & 1);
  }
  std::uint64_t fixed(std::size_t width) {
    need(width);
    std::uint64_t x = 0;
    for (std::size_t i = 0; i < width; ++i) x |= static_cast<std::uint64_t>(p_[i]) << (8 * i);
    p_ += width;
    return x;
  }
  std::vector<Pos> positions(std::size_t count, std::size_t n) {
    std::vector<Pos> v;
    v.reserve(count);
    std::uint64_t cur = 0;
    for (std::size_t i = 0; i < count; ++i) {
      const std::uint64_t d = varint();
      if (d == 0 && i > 0) throw FormatError("positions not strictly increasing");
      cur += d;
      if (cur < 1 || cur > n) throw FormatError("position out of range");
      v.push_back(static_cast<Pos>(cur));
    }
    return v;
  }
  Reader sub(std::size_t len) {
    need(len);
    Reader r(p_, len);
    p_ += len;
    return r;
  }
  std::size_t count(std::size_t limit) {
    const std::uint64_t c = varint();
    if (c > limit) throw FormatError("count exceeds limit");
    return static_cast<std::size_t>(c);
  }

 private:
  void need(std::size_t k) const {
    if (static_cast<std::size_t>(end_ - p_) < k) throw FormatError("truncated sketch");
  }
  const std::uint8_t* p_;
  const std::uint8_t* end_;
};

inline void put_zero(Writer& w, const ZeroSketch& z, std::size_t fe) {
  w.fixed(z.fingerprint, fe);
  w.varint(z.root);
  w.varint(z.shift);
}

inline ZeroSketch get_zero(Reader& r, std::size_t fe, std::size_t n, std::uint64_t p) {
  ZeroSketch z;
  z.fingerprint = r.fixed(fe);
  z.root = static_cast<std::uint32_t>(r.count(n));
  z.shift = static_cast<std::uint32_t>(r.count(n));
  if (z.fingerprint >= p || z.root == 0 || n % z.root != 0 || z.shift >= z.root) throw FormatError("bad zero sketch");
  return z;
}

inline void put_mi(Writer& w, const MismatchInfo& mi) {
  w.varint(mi.size());
  std::vector<Pos> pos;
  for (const auto& e : mi.entries()) pos.push_back(e.pos);
  w.positions(pos);
  for (const auto& e : mi.entries()) {
    w.varint(e.left);
    w.varint(e.right);
  }
}

inline MismatchInfo get_mi(Reader& r, std::size_t n, std::uint64_t sigma) {
  const std::size_t c = r.count(n);
  const auto pos = r.positions(c, n);
  std::vector<Mismatch> e;
  for (Pos p : pos) {
    const std::uint64_t a = r.varint();
    const std::uint64_t b = r.varint();
    if (a >= sigma || b >= sigma || a == b) throw FormatError("bad mismatch entry");
    e.push_back({p, static_cast<Symbol>(a), static_cast<Symbol>(b)});
  }
  return MismatchInfo(n, std::move(e));
}

inline void put_components(Writer& w, const CircularSketch& sk) {
  const SchemeParams& p = sk.params();
  const std::size_t fe = sk.scheme->field().element_bytes();
  if (sk.exact_np) {
    Writer b;
    const auto& np = *sk.exact_np;
    b.varint(np.indices.size());
    b.varint(p.t);
    b.varint(p.verify_points);
    b.positions(np.indices);
    for (const auto& s : np.sketches) {
      for (auto x : s.m1) b.fixed(x, fe);
      for (auto x : s.m2) b.fixed(x, fe);
      for (auto x : s.verify) b.fixed(x, fe);
    }
    w.section(kExactNp, b);
  }
  if (sk.exact_pp) {
    Writer b;
    put_zero(b, sk.exact_pp->base, fe);
    put_mi(b, sk.exact_pp->mi);
    w.section(kExactPp, b);
  }
  if (sk.verbatim) {
    Writer b;
    b.varint(sk.verbatim->size());
    for (Symbol c : sk.verbatim->symbols()) b.varint(c);
    w.section(kVerbatim, b);
  }
  if (sk.approx_np) {
    Writer b;
    const auto& np = *sk.approx_np;
    b.varint(np.indices.size());
    b.varint(p.ams_groups);
    b.varint(p.ams_buckets);
    b.positions(np.indices);
    for (const auto& s : np.sketches)
      for (auto c : s.counters) b.zigzag(c);
    w.section(kApproxNp, b);
  }
  if (sk.approx_pp) {
    Writer b;
    put_zero(b, sk.approx_pp->base, fe);
    b.varint(sk.approx_pp->full_ham);
    put_mi(b, sk.approx_pp->mi);
    w.section(kApproxPp, b);
  }
  if (sk.alt) {
    Writer b;
    b.varint(sk.alt->positions.size());
    b.positions(sk.alt->positions);
    for (Symbol c : sk.alt->symbols) b.varint(c);
    w.section(kAlt, b);
  }
}

inline void get_components(Reader& r, CircularSketch& sk, std::size_t sections) {
  const SchemeParams& p = sk.params();
  const std::size_t fe = sk.scheme->field().element_bytes();
  const std::size_t n = p.n;
  std::uint8_t last = 0;
  for (std::size_t s = 0; s < sections; ++s) {
    const std::uint8_t tag = r.byte();
    if (tag <= last) throw FormatError("sections out of order");
    last = tag;
    Reader b = r.sub(r.count(r.remaining()));
    switch (tag) {
      case kExactNp: {
        if (p.approximate()) throw FormatError("exact component in approximate sketch");
        ExactNp np;
        const std::size_t c = b.count(n);
        if (b.varint() != p.t || b.varint() != p.verify_points) throw FormatError("syndrome shape mismatch");
        np.indices = b.positions(c, n);
        for (std::size_t i = 0; i < c; ++i) {
          SyndromeSketch ss;
          for (auto* v : {&ss.m1, &ss.m2}) {
            v->resize(2 * p.t);
            for (auto& x : *v) x = b.fixed(fe);
          }
          ss.verify.resize(p.verify_points);
          for (auto& x : ss.verify) x = b.fixed(fe);
          for (auto* v : {&ss.m1, &ss.m2, &ss.verify})
            for (auto x : *v)
              if (x >= p.prime) throw FormatError("field element out of range");
          np.sketches.push_back(std::move(ss));
        }
        sk.exact_np = std::move(np);
        break;
      }
      case kExactPp: {
        ExactPp pp;
        pp.base = get_zero(b, fe, n, p.prime);
        pp.mi = get_mi(b, n, p.sigma);
        sk.exact_pp = std::move(pp);
        break;
      }
      case kVerbatim: {
        const std::size_t len = b.count(n);
        if (len != n) throw FormatError("verbatim length mismatch");
        std::vector<Symbol> v(len);
        for (auto& c : v) {
          const std::uint64_t x = b.varint();
          if (x >= p.sigma) throw FormatError("symbol outside alphabet");
          c = static_cast<Symbol>(x);
        }
        sk.verbatim = Str(std::move(v));
        break;
      }
      case kApproxNp: {
        if (!p.approximate()) throw FormatError("approximate component in exact sketch");
        ApproxNp np;
        const std::size_t c = b.count(n);
        if (b.varint() != p.ams_groups || b.varint() != p.ams_buckets) throw FormatError("AMS shape mismatch");
        np.indices = b.positions(c, n);
        for (std::size_t i = 0; i < c; ++i) {
          AmsSketch a{p.ams_groups, p.ams_buckets, std::vector<std::int32_t>(std::size_t{p.ams_groups} * p.ams_buckets)};
          for (auto& x : a.counters) {
            const std::int64_t v = b.zigzag();
            if (v < -static_cast<std::int64_t>(n) || v > static_cast<std::int64_t>(n)) throw FormatError("counter out of range");
            x = static_cast<std::int32_t>(v);
          }
          np.sketches.push_back(std::move(a));
        }
        sk.approx_np = std::move(np);
        break;
      }
      case kApproxPp: {
        ApproxPp pp;
        pp.base = get_zero(b, fe, n, p.prime);
        pp.full_ham = static_cast<std::uint32_t>(b.count(n));
        pp.mi = get_mi(b, n, p.sigma);
        sk.approx_pp = std::move(pp);
        break;
      }
      case kAlt: {
        Alt alt;
        const std::size_t c = b.count(n);
        alt.positions = b.positions(c, n);
        for (std::size_t i = 0; i < c; ++i) {
          const std::uint64_t x = b.varint();
          if (x >= p.sigma) throw FormatError("symbol outside alphabet");
          alt.symbols.push_back(static_cast<Symbol>(x));
        }
        sk.alt = std::move(alt);
        break;
      }
      default:
        throw FormatError("unknown section tag");
    }
    if (!b.done()) throw FormatError("trailing bytes in section");
  }
}

inline std::size_t section_count(const CircularSketch& sk) {
  return sk.exact_np.has_value() + sk.exact_pp.has_value() + sk.verbatim.has_value() + sk.approx_np.has_value() +
         sk.approx_pp.has_value() + sk.alt.has_value();
}

}  // namespace wire

inline const char* mode_name(SketchMode m) {
  switch (m) {
    case SketchMode::exact:
      return "exact";
    case SketchMode::relaxed:
      return "relaxed";
    case SketchMode::leveled:
      return "approx";
  }
  return "?";
}

// Canonical header: keys sorted, compact.
inline nlohmann::json sketch_header(const CircularSketch& sk) {
  const SchemeParams& p = sk.params();
  nlohmann::json h;
  h["created_by"] = kCreatedBy;
  if (p.eps) h["eps"] = *p.eps;
  h["format_version"] = kFormatVersion;
  h["k"] = p.k;
  h["kind"] = sk.kind();
  h["mode"] = mode_name(sk.mode);
  h["n"] = p.n;
  h["prf_id"] = kPrfId;
  h["seed_digest"] = p.seed.digest();
  h["sigma"] = p.sigma;
  return h;
}

inline std::vector<std::uint8_t> serialize(const CircularSketch& sk) {
  wire::Writer payload;
  const std::size_t fe = sk.scheme->field().element_bytes();
  if (sk.mode == SketchMode::leveled) {
    payload.varint(1 + sk.levels.size());
    wire::Writer z;
    wire::put_zero(z, *sk.zero, fe);
    payload.section(wire::kZero, z);
    for (const auto& lvl : sk.levels) {
      wire::Writer b;
      b.varint(lvl.params().k);
      b.varint(wire::section_count(lvl));
      wire::put_components(b, lvl);
      payload.section(wire::kLevel, b);
    }
  } else {
    payload.varint(wire::section_count(sk));
    wire::put_components(payload, sk);
  }

  const std::string header = sketch_header(sk).dump();
  wire::Writer out;
  out.raw(kMagic.data(), kMagic.size());
  out.varint(kFormatVersion);
  out.varint(header.size());
  out.raw(header.data(), header.size());
  out.varint(payload.data().size());
  out.bytes(payload.data());
  detail::ensure_sodium();
  std::array<std::uint8_t, 32> digest{};
  crypto_generichash(digest.data(), digest.size(), out.data().data(), out.data().size(), nullptr, 0);
  out.raw(digest.data(), digest.size());
  return out.data();
}

// Header of a serialized sketch, after magic, version and digest checks.
inline nlohmann::json read_header(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kMagic.size() + 32 || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin()))
    throw FormatError("not a sketch file");
  detail::ensure_sodium();
  std::array<std::uint8_t, 32> digest{};
  crypto_generichash(digest.data(), digest.size(), bytes.data(), bytes.size() - 32, nullptr, 0);
  if (!std::equal(digest.begin(), digest.end(), bytes.end() - 32)) throw FormatError("sketch digest mismatch");
  wire::Reader r(bytes.data() + kMagic.size(), bytes.size() - kMagic.size() - 32);
  if (r.varint() != kFormatVersion) throw FormatError("unsupported format version");
  wire::Reader hr = r.sub(r.count(r.remaining()));
  std::string text(hr.remaining(), '\0');
  for (auto& c : text) c = static_cast<char>(hr.byte());
  nlohmann::json h = nlohmann::json::parse(text, nullptr, false);
  if (h.is_discarded() || !h.is_object()) throw FormatError("malformed header");
  return h;
}

inline SchemeParams params_from_header(const nlohmann::json& h, const Seed& seed) {
  try {
    if (h.at("prf_id").get<std::string>() != kPrfId) throw FormatError("unknown PRF identifier");
    if (h.at("seed_digest").get<std::string>() != seed.digest()) throw FormatError("seed does not match sketch");
    std::optional<double> eps;
    if (h.contains("eps")) eps = h.at("eps").get<double>();
    return make_params(h.at("n").get<std::size_t>(), h.at("k").get<std::size_t>(), eps, seed,
                       h.at("sigma").get<std::uint64_t>());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed header: ") + e.what());
  }
}

// Parses a sketch; the seed must match the header's digest.
inline CircularSketch deserialize(const std::vector<std::uint8_t>& bytes, const Seed& seed) {
  const nlohmann::json h = read_header(bytes);
  const SchemeParams params = params_from_header(h, seed);
  const std::string mode = h.at("mode").get<std::string>();

  wire::Reader r(bytes.data() + kMagic.size(), bytes.size() - kMagic.size() - 32);
  r.varint();
  r.sub(r.count(r.remaining()));
  wire::Reader pr = r.sub(r.count(r.remaining()));
  if (!r.done()) throw FormatError("trailing bytes after payload");

  CircularSketch sk;
  sk.scheme = make_scheme(params);
  if (mode == "approx") {
    if (!params.approximate()) throw FormatError("approximate sketch without eps");
    sk.mode = SketchMode::leveled;
    const std::size_t sections = pr.count(64);
    if (sections != 1 + sk.scheme->levels().size()) throw FormatError("level count mismatch");
    const std::size_t fe = sk.scheme->field().element_bytes();
    if (pr.byte() != wire::kZero) throw FormatError("missing zero payload");
    wire::Reader z = pr.sub(pr.count(pr.remaining()));
    sk.zero = wire::get_zero(z, fe, params.n, params.prime);
    if (!z.done()) throw FormatError("trailing bytes in section");
    for (const auto& level : sk.scheme->levels()) {
      if (pr.byte() != wire::kLevel) throw FormatError("missing level payload");
      wire::Reader b = pr.sub(pr.count(pr.remaining()));
      if (b.varint() != level->params().k) throw FormatError("level parameter mismatch");
      CircularSketch lv;
      lv.scheme = level;
      lv.mode = SketchMode::relaxed;
      wire::get_components(b, lv, b.count(6));
      if (!b.done()) throw FormatError("trailing bytes in level");
      sk.levels.push_back(std::move(lv));
    }
  } else if (mode == "exact" || mode == "relaxed") {
    if ((mode == "exact") == params.approximate()) throw FormatError("mode does not match eps");
    sk.mode = mode == "exact" ? SketchMode::exact : SketchMode::relaxed;
    wire::get_components(pr, sk, pr.count(6));
  } else {
    throw FormatError("unknown sketch mode");
  }
  if (!pr.done()) throw FormatError("trailing bytes in payload");
  if (h.at("kind").get<std::string>() != sk.kind()) throw FormatError("kind does not match payload");
  return sk;
}

inline std::size_t serialized_size(const CircularSketch& sk) { return serialize(sk).size(); }

inline void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("write failed for " + path);
}

inline std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace circsketch
