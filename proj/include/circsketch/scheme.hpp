#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <vector>

#include "circsketch/field.hpp"
#include "circsketch/hamming_sketch.hpp"
#include "circsketch/randomness.hpp"
#include "circsketch/strings.hpp"

namespace circsketch {

// PRF-sampled subset of [1..n] with O(1) membership.
class SampledSet {
 public:
  SampledSet() = default;
  SampledSet(const Prf& prf, std::size_t n, double rate) : rate_(rate), set_(sampled_set(prf, n, rate)) {
    mask_.assign(n + 1, 0);
    for (Pos q : set_.members()) mask_[q] = 1;
  }

  double rate() const { return rate_; }
  const PositionSet& set() const { return set_; }
  bool contains(std::size_t q) const { return q < mask_.size() && mask_[q] != 0; }

 private:
  double rate_ = 1.0;
  PositionSet set_;
  std::vector<std::uint8_t> mask_;
};

class Scheme;
using SchemePtr = std::shared_ptr<const Scheme>;

// Immutable scheme instance: parameters plus all randomness derived from the seed.
class Scheme {
 public:
  explicit Scheme(SchemeParams params, bool with_levels = true) : p_(std::move(params)), field_(p_.prime) {
    const Prf zero_prf(p_.seed, "zero-fingerprint/n=" + std::to_string(p_.n));
    zero_point_ = zero_prf.below(0, p_.prime);
    if (!p_.fallback) gate_.emplace(p_, 3 * p_.ell);

    if (!p_.approximate()) {
      exact_a_ = SampledSet(Prf(p_.seed, p_.label("exact-A")), p_.n, p_.exact_rate);
      syndrome_.emplace(p_.n, p_.sigma, p_.prime, p_.omega, p_.t, p_.verify_points, exact_a_.set(),
                        Prf(p_.seed, p_.label("verify")));
      return;
    }
    ams_.emplace(p_, Prf(p_.seed, "ams/n=" + std::to_string(p_.n)));
    np_a_ = SampledSet(Prf(p_.seed, p_.label("np-A")), p_.n, p_.np_rate);
    np_b_ = SampledSet(Prf(p_.seed, p_.label("np-B")), p_.n, p_.np_rate);
    pp_a_ = SampledSet(Prf(p_.seed, p_.label("pp-A")), p_.n, p_.pp_rate);
    pp_b_ = SampledSet(Prf(p_.seed, p_.label("pp-B")), p_.n, p_.pp_rate);
    alt_a_ = SampledSet(Prf(p_.seed, p_.label("alt-A")), p_.n, p_.alt_rate);
    alt_b_ = SampledSet(Prf(p_.seed, p_.label("alt-B")), p_.n, p_.alt_rate);
    if (with_levels) {
      for (std::size_t kp : level_values(p_.k, p_.n)) {
        levels_.push_back(std::make_shared<const Scheme>(make_params(p_.n, kp, p_.eps, p_.seed, p_.sigma), false));
      }
    }
  }

  // k' = 1, 2, 4, ..., 2^(ceil(log2 k) + 1), capped at n.
  static std::vector<std::size_t> level_values(std::size_t k, std::size_t n) {
    std::size_t top = 1;
    while (top < k) top *= 2;
    top *= 2;
    std::vector<std::size_t> out;
    for (std::size_t kp = 1; kp <= top; kp *= 2) {
      const std::size_t v = std::min(kp, n);
      if (out.empty() || out.back() != v) out.push_back(v);
    }
    return out;
  }

  const SchemeParams& params() const { return p_; }
  const PrimeField& field() const { return field_; }
  std::uint64_t zero_point() const { return zero_point_; }

  const SubstringGate& gate() const {
    require(gate_.has_value(), "no selection gate in the fallback regime");
    return *gate_;
  }
  const SyndromeCodec& syndrome() const {
    require(syndrome_.has_value(), "exact scheme required");
    return *syndrome_;
  }
  const AmsCodec& ams() const {
    require(ams_.has_value(), "approximate scheme required");
    return *ams_;
  }
  const SampledSet& np_a() const { return np_a_; }
  const SampledSet& np_b() const { return np_b_; }
  const SampledSet& pp_a() const { return pp_a_; }
  const SampledSet& pp_b() const { return pp_b_; }
  const SampledSet& alt_a() const { return alt_a_; }
  const SampledSet& alt_b() const { return alt_b_; }
  const SampledSet& exact_a() const { return exact_a_; }
  const std::vector<SchemePtr>& levels() const { return levels_; }

 private:
  SchemeParams p_;
  PrimeField field_;
  std::uint64_t zero_point_ = 0;
  std::optional<SubstringGate> gate_;
  std::optional<SyndromeCodec> syndrome_;
  std::optional<AmsCodec> ams_;
  SampledSet exact_a_, np_a_, np_b_, pp_a_, pp_b_, alt_a_, alt_b_;
  std::vector<SchemePtr> levels_;
};

inline SchemePtr make_scheme(const SchemeParams& params) { return std::make_shared<const Scheme>(params); }

inline SchemePtr make_scheme(std::size_t n, std::size_t k, std::optional<double> eps, const Seed& seed,
                             std::uint64_t sigma = 256) {
  return make_scheme(make_params(n, k, eps, seed, sigma));
}

}  // namespace circsketch
