// Splittable deterministic bit streams and the per-index random fractions
// d(i) used to perturb program weights.
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <utility>

#include "ucai/exact_stream.hpp"

namespace ucai {

namespace detail {

inline constexpr std::uint64_t golden_gamma = 0x9e3779b97f4a7c15ULL;

inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Folds a non-negative big integer into a 64-bit key, limb by limb.
inline std::uint64_t fold_key(std::uint64_t key, const BigInt& index) {
  std::uint64_t h = mix64(key + golden_gamma);
  BigInt rest = index;
  std::uint64_t limbs = 0;
  do {
    const auto limb = static_cast<std::uint64_t>(rest & BigInt(0xffffffffffffffffULL));
    h = mix64(h ^ mix64(limb + golden_gamma * (limbs + 1)));
    rest >>= 64;
    ++limbs;
  } while (rest != 0);
  return mix64(h + limbs);
}

}  // namespace detail

/// A bit stream identified by a key and a position along its right spine.
/// split() yields a fresh branch on the left and the next spine position on
/// the right, so the i-th left branch is reachable directly (leap-frog).
class SplittableBits {
 public:
  SplittableBits(std::uint64_t key, BigInt position) : key_(key), position_(std::move(position)) {}

  std::pair<SplittableBits, SplittableBits> split() const {
    return {SplittableBits(detail::fold_key(key_, position_), 0), SplittableBits(key_, position_ + 1)};
  }

  /// The stream reached by i right projections of split.
  SplittableBits advance(const BigInt& i) const { return SplittableBits(key_, position_ + i); }

  /// 64-bit word w of this stream (bits 64w+1 .. 64w+64, most significant first).
  std::uint64_t word(std::uint64_t w) const {
    const std::uint64_t k = detail::fold_key(key_, position_);
    return detail::mix64(k + detail::golden_gamma * (w + 1));
  }

  bool bit(std::uint64_t j) const { return (word(j / 64) >> (63 - j % 64)) & 1U; }

  std::uint64_t key() const { return key_; }
  const BigInt& position() const { return position_; }

 private:
  std::uint64_t key_;
  BigInt position_;
};

namespace detail {

class BitStreamProducer final : public Producer {
 public:
  explicit BitStreamProducer(SplittableBits bits) : bits_(std::move(bits)) {}
  int next() override {
    if (pos_ % 64 == 0) word_ = bits_.word(pos_ / 64);
    const int b = static_cast<int>((word_ >> (63 - pos_ % 64)) & 1U);
    ++pos_;
    return b;
  }

 private:
  SplittableBits bits_;
  std::uint64_t word_ = 0;
  std::uint64_t pos_ = 0;
};

}  // namespace detail

/// d(i) = [[ tau0(split(tau1(split(...tau1(split(root))...)))) ]] with i
/// inner tau1 steps; a binary fraction in [0, 1]. Deterministic per seed.
class RandomDigitSource {
 public:
  explicit RandomDigitSource(std::uint64_t seed) : seed_(seed), root_(seed, 0) {}

  std::uint64_t seed() const { return seed_; }

  SplittableBits branch(const BigInt& i) const { return root_.advance(i).split().first; }

  /// Word w of d(i).
  std::uint64_t word(const BigInt& i, std::uint64_t w) const { return branch(i).word(w); }

  /// d(i) as a digit stream of 0/1 digits, memoized per index.
  DigitStream d(const BigInt& i) const {
    std::lock_guard lock(mutex_);
    auto it = memo_.find(i);
    if (it == memo_.end()) it = memo_.emplace(i, make_stream<detail::BitStreamProducer>(branch(i))).first;
    return it->second;
  }

 private:
  std::uint64_t seed_;
  SplittableBits root_;
  mutable std::mutex mutex_;
  mutable std::map<BigInt, DigitStream> memo_;
};

}  // namespace ucai
