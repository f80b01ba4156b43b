#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "ucai/exact_stream.hpp"

namespace ucai::testing {

/// Uniform dyadic p / 2^bits in [-1, 1].
inline Dyadic random_dyadic(std::mt19937_64& rng, std::size_t bits = 20) {
  const std::int64_t limit = std::int64_t{1} << bits;
  std::uniform_int_distribution<std::int64_t> dist(-limit, limit);
  return {BigInt(dist(rng)), bits};
}

/// A stream for d written with random redundant digits: each digit is drawn
/// so the remaining value stays representable.
inline DigitStream random_redundant(std::mt19937_64& rng, const Dyadic& d) {
  Rational rest = d.value();
  std::vector<int> digits;
  for (std::size_t i = 1; i <= d.exponent; ++i) {
    const Rational w(BigInt(1), pow2(i));
    const Rational room(BigInt(1), pow2(i));  // |tail after digit i| <= 2^-i
    std::vector<int> ok;
    for (int c : {-1, 0, 1}) {
      const Rational r = rest - c * w;
      if (r <= room && r >= -room) ok.push_back(c);
    }
    const int c = ok[std::uniform_int_distribution<std::size_t>(0, ok.size() - 1)(rng)];
    digits.push_back(c);
    rest -= c * w;
  }
  // rest is now a multiple of 2^-exponent within [-2^-exponent, 2^-exponent]
  // and is finished off by an all-ones or all-minus-ones tail, or zeros.
  if (rest == 0) return from_digits(digits);
  struct Tail final : detail::Producer {
    std::vector<int> head;
    int fill;
    std::size_t i = 0;
    int next() override { return i < head.size() ? head[i++] : (++i, fill); }
  };
  auto p = std::make_unique<Tail>();
  p->head = digits;
  p->fill = rest > 0 ? 1 : -1;
  return DigitStream(std::move(p));
}

inline Rational value_of(const DigitStream& x, std::size_t n) { return interpret_prefix(x, n).value(); }

inline Rational two_pow_neg(std::size_t n) { return Rational(BigInt(1), pow2(n)); }

inline bool within(const Rational& a, const Rational& b, std::size_t n) {
  return abs(a - b) <= two_pow_neg(n);
}

}  // namespace ucai::testing
