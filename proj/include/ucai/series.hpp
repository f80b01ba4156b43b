// Digit-wise summation of infinite series of non-negative streams.
//
// sum_diminishing handles sum_i 4^-i x(i) with every x(i) in [0, 1).
// sum_filtered_mass handles sum_k R(k) where R is dominated by a level-wise
// mass R' summing to 1: cutoffs g(i) with tail mass below 4^-i regroup the
// levels into blocks that diminish by 4^-i, so the same summation applies.
#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "ucai/exact_stream.hpp"

namespace ucai {

/// x(i) for i >= 1, each a stream with value in [0, 1).
struct TermSource {
  std::function<DigitStream(std::size_t i)> at;
};

/// Per-level masses. Levels start at 1. In the planner a level is a class of
/// programs sharing one code length, in increasing length order.
struct MassProfile {
  /// R(k): filtered mass at level k.
  std::function<DigitStream(std::size_t k)> term_mass;
  /// R'(k): total mass at level k. Kraft masses are always dyadic, so this is
  /// exact; sum_k R'(k) must equal 1 and R(k) <= R'(k).
  std::function<Dyadic(std::size_t k)> total_mass;
  /// Resource cap on levels the cutoff scan may inspect. Exceeding it raises
  /// PrecisionLimited when set, or ContractViolation after scan_budget levels.
  std::optional<std::size_t> level_limit;
  std::size_t scan_budget = std::size_t{1} << 16;
};

/// The mass profile broke its contract (e.g. total mass never reaches 1).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Cutoffs g(0) = 1 <= g(1) <= g(2) <= ... where g(i) is the least level n
/// with sum_{k >= n} R'(k) < 4^-i. Computed on demand and memoized; safe to
/// query from several threads.
class CutoffSchedule {
 public:
  explicit CutoffSchedule(MassProfile profile) : profile_(std::move(profile)) {}

  std::size_t cutoff(std::size_t i) {
    std::lock_guard lock(mutex_);
    while (cutoffs_.size() <= i) extend();
    return cutoffs_[i];
  }

  /// 1 - sum_{k < n} R'(k), exact.
  Rational tail_from(std::size_t n) {
    std::lock_guard lock(mutex_);
    advance_to(n);
    return 1 - prefix_[n - 1];
  }

 private:
  // prefix_[j] = sum_{k <= j} R'(k); prefix_[0] = 0.
  void advance_to(std::size_t n) {
    while (prefix_.size() < n) {
      const std::size_t level = prefix_.size();
      if (profile_.level_limit && level > *profile_.level_limit)
        throw PrecisionLimited("cutoff scan needs level " + std::to_string(level) +
                               " beyond the configured limit");
      if (level > profile_.scan_budget)
        throw ContractViolation("cutoff scan exhausted its level budget; total mass does not reach 1");
      const Rational next = prefix_.back() + profile_.total_mass(level).value();
      if (next > 1) throw ContractViolation("total mass exceeds 1");
      prefix_.push_back(next);
    }
  }

  void extend() {
    const std::size_t i = cutoffs_.size();
    if (i == 0) {
      cutoffs_.push_back(1);
      return;
    }
    const Rational bound(BigInt(1), pow2(2 * i));
    std::size_t n = cutoffs_.back();
    for (;;) {
      advance_to(n);
      if (1 - prefix_[n - 1] < bound) break;
      ++n;
    }
    cutoffs_.push_back(n);
  }

  MassProfile profile_;
  std::mutex mutex_;
  std::vector<std::size_t> cutoffs_;
  std::vector<Rational> prefix_{Rational(0)};
};

inline std::shared_ptr<CutoffSchedule> find_cutoffs(const MassProfile& profile) {
  return std::make_shared<CutoffSchedule>(profile);
}

namespace detail {

inline std::size_t ceil_log2(std::size_t n) {
  std::size_t r = 0;
  while ((std::size_t{1} << r) < n) ++r;
  return r;
}

// Memoizes TermSource::at and the readers over each term.
class TermCache {
 public:
  explicit TermCache(TermSource source) : source_(std::move(source)) {}

  PrefixReader& reader(std::size_t i) {
    std::lock_guard lock(mutex_);
    auto it = readers_.find(i);
    if (it == readers_.end()) it = readers_.emplace(i, std::make_unique<PrefixReader>(source_.at(i))).first;
    return *it->second;
  }

  std::size_t terms_requested() const {
    std::lock_guard lock(mutex_);
    return readers_.empty() ? 0 : readers_.rbegin()->first;
  }

 private:
  TermSource source_;
  mutable std::mutex mutex_;
  std::map<std::size_t, std::unique_ptr<PrefixReader>> readers_;
};

}  // namespace detail

/// sum_{i >= 1} 4^-i x(i). Terms beyond J contribute a value in
/// [0, 4^-J / 3); the approximation adds the midpoint of that interval, so
/// digit n touches only terms i <= n.
inline DigitStream sum_diminishing(TermSource ts) {
  auto cache = std::make_shared<detail::TermCache>(std::move(ts));
  return from_approximations([cache](std::size_t p) {
    // 4^-J / 6 <= 2^-(p+1)  <=>  2J >= p + 1 - log2(6)
    std::size_t terms = p <= 2 ? 1 : (p - 1) / 2;
    while (Rational(BigInt(1), pow2(2 * terms) * 6) > Rational(BigInt(1), pow2(p + 1))) ++terms;
    const std::size_t slack = detail::ceil_log2(terms) + 2;
    const std::size_t exponent = p + slack + 4;
    // tail midpoint 4^-J / 6 is not dyadic; floor it at the working exponent
    // and absorb the rounding into the slack.
    BigInt total = (pow2(exponent) / pow2(2 * terms)) / 6;
    for (std::size_t i = 1; i <= terms; ++i) {
      const std::size_t need = p + slack > 2 * i ? p + slack - 2 * i : 0;
      const Approximation a = cache->reader(i).at(need);
      // value a / 2^e scaled by 4^-i, expressed at `exponent`.
      const std::size_t shift_total = a.exponent + 2 * i;
      if (shift_total <= exponent) total += a.numerator << (exponent - shift_total);
      else total += a.numerator >> (shift_total - exponent);  // floor; error < 2^-exponent
    }
    return Approximation{total, exponent};
  });
}

/// sum_k R(k), assembled as the head sum_{k < g(1)} R(k) plus
/// sum_diminishing over x(j) = 4^j * sum_{k = g(j)}^{g(j+1) - 1} R(k).
inline DigitStream sum_filtered_mass(const MassProfile& profile) {
  auto schedule = find_cutoffs(profile);
  auto readers = std::make_shared<std::map<std::size_t, std::unique_ptr<PrefixReader>>>();
  auto readers_mutex = std::make_shared<std::mutex>();
  auto term_mass = profile.term_mass;

  // Sum of R(k) over [first, last) at precision p, scaled by 2^scale.
  auto block_sum = [readers, readers_mutex, term_mass](std::size_t first, std::size_t last, std::size_t scale,
                                                       std::size_t p) {
    const std::size_t count = last > first ? last - first : 0;
    const std::size_t exponent = p + detail::ceil_log2(count + 1) + 2;
    const std::size_t need = exponent + scale;
    BigInt total = 0;
    for (std::size_t k = first; k < last; ++k) {
      PrefixReader* reader;
      {
        std::lock_guard lock(*readers_mutex);
        auto it = readers->find(k);
        if (it == readers->end()) it = readers->emplace(k, std::make_unique<PrefixReader>(term_mass(k))).first;
        reader = it->second.get();
      }
      const Approximation a = reader->at(need);
      // a / 2^e * 2^scale at exponent: shift by exponent + scale - e (<= 0).
      total += a.numerator >> (a.exponent - need);
    }
    return Approximation{total, exponent};
  };

  DigitStream head = from_approximations([schedule, block_sum](std::size_t p) {
    return block_sum(1, schedule->cutoff(1), 0, p);
  });
  TermSource blocks{[schedule, block_sum](std::size_t j) {
    return from_approximations([schedule, block_sum, j](std::size_t p) {
      return block_sum(schedule->cutoff(j), schedule->cutoff(j + 1), 2 * j, p);
    });
  }};
  return add(head, sum_diminishing(blocks));
}

}  // namespace ucai
