// Exact real arithmetic over fixed-point redundant binary streams.
//
// A DigitStream denotes a real in [-1, 1] as an infinite sequence of signed
// digits x_1, x_2, ... in {-1, 0, 1} with value sum_i 2^-i x_i. Streams are
// lazy: each one owns a producer that appends one digit per call, and every
// produced digit is cached so re-reading never recomputes or changes it.
#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace ucai {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// 2^e as a big integer.
inline BigInt pow2(std::size_t e) { return BigInt(1) << e; }

/// Exact dyadic rational numerator / 2^exponent.
struct Dyadic {
  BigInt numerator = 0;
  std::size_t exponent = 0;

  Rational value() const { return Rational(numerator, pow2(exponent)); }

  /// Same value expressed with a larger exponent.
  Dyadic rescaled(std::size_t e) const {
    if (e < exponent) throw std::invalid_argument("Dyadic::rescaled: would lose precision");
    return {numerator << (e - exponent), e};
  }

  std::string str() const { return numerator.str() + "/2^" + std::to_string(exponent); }

  friend bool operator==(const Dyadic& a, const Dyadic& b) { return a.value() == b.value(); }
};

/// Finite view of a stream: numerator / 2^n with |value - stream| <= 2^-n.
struct Approximation {
  BigInt numerator = 0;
  std::size_t exponent = 0;

  Rational value() const { return Rational(numerator, pow2(exponent)); }
  Rational error_bound() const { return Rational(BigInt(1), pow2(exponent)); }
  Dyadic dyadic() const { return {numerator, exponent}; }
  std::string str() const { return numerator.str() + "/2^" + std::to_string(exponent); }
};

class Digit {
 public:
  constexpr Digit() = default;
  constexpr explicit Digit(int v) : value_(static_cast<std::int8_t>(v)) {
    if (v < -1 || v > 1) throw std::domain_error("Digit out of {-1, 0, 1}");
  }
  constexpr int value() const { return value_; }
  friend constexpr bool operator==(Digit, Digit) = default;

 private:
  std::int8_t value_ = 0;
};

enum class Ordering3 { less, equivalent, greater };

inline const char* to_string(Ordering3 o) {
  switch (o) {
    case Ordering3::less: return "<";
    case Ordering3::equivalent: return "=";
    case Ordering3::greater: return ">";
  }
  return "?";
}

/// A comparison ran out of its digit budget while every scanned digit of the
/// difference was zero. The inputs may be equal.
class UndecidedComparison : public std::runtime_error {
 public:
  UndecidedComparison(std::size_t digits, std::size_t first = 0, std::size_t second = 0,
                      std::vector<std::size_t> candidates = {})
      : std::runtime_error("comparison undecided after " + std::to_string(digits) + " digits"),
        digits_scanned(digits),
        first_index(first),
        second_index(second),
        candidates(std::move(candidates)) {}

  std::size_t digits_scanned;
  // Filled in by argmax_mono: positions (in the key list) of the tied pair and
  // of every label still in contention when the tie was hit.
  std::size_t first_index;
  std::size_t second_index;
  std::vector<std::size_t> candidates;
};

/// Raised when a stream cannot produce a digit without exceeding a resource
/// cap (for instance a bound on enumerated program classes).
class PrecisionLimited : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::atomic<std::uint64_t>& forcing_counter() {
  static std::atomic<std::uint64_t> counter{0};
  return counter;
}

class Producer {
 public:
  virtual ~Producer() = default;
  // Returns the next digit of the stream; called strictly in order.
  virtual int next() = 0;
};

struct Node {
  explicit Node(std::unique_ptr<Producer> p) : producer(std::move(p)) {}
  std::mutex mutex;
  std::vector<std::int8_t> digits;
  std::unique_ptr<Producer> producer;
};

}  // namespace detail

/// Total number of digits produced by every stream in the process. Used to
/// measure how much work a digit request triggers.
inline std::uint64_t forcing_count() { return detail::forcing_counter().load(); }

class DigitStream {
 public:
  explicit DigitStream(std::unique_ptr<detail::Producer> producer)
      : node_(std::make_shared<detail::Node>(std::move(producer))) {}

  /// Digit x_{i+1} (zero-based index). Forces and caches every earlier digit.
  int digit(std::size_t i) const {
    std::lock_guard lock(node_->mutex);
    auto& digits = node_->digits;
    while (digits.size() <= i) {
      const int d = node_->producer->next();
      if (d < -1 || d > 1) throw std::logic_error("producer emitted an invalid digit");
      digits.push_back(static_cast<std::int8_t>(d));
      detail::forcing_counter().fetch_add(1, std::memory_order_relaxed);
    }
    return digits[i];
  }

  Digit at(std::size_t i) const { return Digit(digit(i)); }

  std::vector<int> prefix(std::size_t n) const {
    std::vector<int> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(digit(i));
    return out;
  }

  /// Number of digits produced so far.
  std::size_t forced() const {
    std::lock_guard lock(node_->mutex);
    return node_->digits.size();
  }

  bool same_as(const DigitStream& other) const { return node_ == other.node_; }

 private:
  std::shared_ptr<detail::Node> node_;
};

template <class P, class... Args>
DigitStream make_stream(Args&&... args) {
  return DigitStream(std::make_unique<P>(std::forward<Args>(args)...));
}

/// sum_{i=1..n} 2^-i x_i, exact.
inline Approximation interpret_prefix(const DigitStream& x, std::size_t n) {
  BigInt num = 0;
  for (std::size_t i = 0; i < n; ++i) {
    num <<= 1;
    num += x.digit(i);
  }
  return {num, n};
}

/// Incrementally maintained prefix value of a stream; cheaper than repeated
/// interpret_prefix calls with growing n.
class PrefixReader {
 public:
  explicit PrefixReader(DigitStream s) : stream_(std::move(s)) {}

  /// An approximation with error at most 2^-p (possibly finer).
  Approximation at(std::size_t p) {
    while (n_ < p) {
      numerator_ <<= 1;
      numerator_ += stream_.digit(n_);
      ++n_;
    }
    return {numerator_, n_};
  }

  const DigitStream& stream() const { return stream_; }

 private:
  DigitStream stream_;
  BigInt numerator_ = 0;
  std::size_t n_ = 0;
};

using Approximator = std::function<Approximation(std::size_t precision)>;

namespace detail {

class ConstantProducer final : public Producer {
 public:
  explicit ConstantProducer(int d) : d_(d) {}
  int next() override { return d_; }

 private:
  int d_;
};

class ListThenZeroProducer final : public Producer {
 public:
  explicit ListThenZeroProducer(std::vector<int> head) : head_(std::move(head)) {}
  int next() override { return pos_ < head_.size() ? head_[pos_++] : 0; }

 private:
  std::vector<int> head_;
  std::size_t pos_ = 0;
};

// Non-redundant binary expansion of sign * magnitude / 2^n, zero padded.
class DyadicProducer final : public Producer {
 public:
  DyadicProducer(int sign, BigInt magnitude, std::size_t n)
      : sign_(sign), magnitude_(std::move(magnitude)), n_(n), saturated_(magnitude_ == pow2(n)) {}

  int next() override {
    const std::size_t i = pos_++;
    if (saturated_) return sign_;
    if (i >= n_) return 0;
    return boost::multiprecision::bit_test(magnitude_, static_cast<unsigned>(n_ - 1 - i)) ? sign_ : 0;
  }

 private:
  int sign_;
  BigInt magnitude_;
  std::size_t n_;
  bool saturated_;
  std::size_t pos_ = 0;
};

class NegateProducer final : public Producer {
 public:
  explicit NegateProducer(DigitStream x) : x_(std::move(x)) {}
  int next() override { return -x_.digit(pos_++); }

 private:
  DigitStream x_;
  std::size_t pos_ = 0;
};

// Leading digit and the correction pushed onto the following digit, for the
// digit pair sum t_j = x_j + y_j given the next pair sum t_{j+1}.
struct AverageStep {
  int head;
  int carry;
};

inline AverageStep average_step(int t, int t_next) {
  switch (t) {
    case -2: return {-1, 0};
    case 0: return {0, 0};
    case 2: return {1, 0};
    case -1: return t_next < 0 ? AverageStep{-1, 1} : AverageStep{0, -1};
    case 1: return t_next < 0 ? AverageStep{0, 1} : AverageStep{1, -1};
    default: throw std::logic_error("average_step: digit sum out of range");
  }
}

// Output digit k is head_k + carry_{k-1}; head_k and carry_k look at the
// input pairs k and k+1.
class AverageProducer final : public Producer {
 public:
  AverageProducer(DigitStream x, DigitStream y) : x_(std::move(x)), y_(std::move(y)) {}

  int next() override {
    const std::size_t k = pos_++;
    const auto step = average_step(sum_at(k), sum_at(k + 1));
    const int out = step.head + carry_;
    carry_ = step.carry;
    return out;
  }

 private:
  int sum_at(std::size_t i) const { return x_.digit(i) + y_.digit(i); }

  DigitStream x_;
  DigitStream y_;
  std::size_t pos_ = 0;
  int carry_ = 0;
};

// double / f / g. f adds one to a value in [-1, 0], g subtracts one from a
// value in [0, 1]. A clause the recursion leaves undefined (f meeting a 1, g
// meeting a -1) can only occur when the remainder is exactly -1 (resp. 1),
// so the result saturates.
class DoubleProducer final : public Producer {
 public:
  explicit DoubleProducer(DigitStream x) : x_(std::move(x)) {}

  int next() override {
    if (mode_ == Mode::start) {
      const int lead = x_.digit(0);
      in_ = 1;
      mode_ = lead == 0 ? Mode::copy : (lead == 1 ? Mode::f : Mode::g);
    }
    switch (mode_) {
      case Mode::copy: return x_.digit(in_++);
      case Mode::f: {
        const int z = x_.digit(in_++);
        if (z == -1) mode_ = Mode::copy;
        else if (z == 1) mode_ = Mode::high;
        return 1;
      }
      case Mode::g: {
        const int z = x_.digit(in_++);
        if (z == 1) mode_ = Mode::copy;
        else if (z == -1) mode_ = Mode::low;
        return -1;
      }
      case Mode::high: return 1;
      case Mode::low: return -1;
      case Mode::start: break;
    }
    throw std::logic_error("DoubleProducer: bad state");
  }

 private:
  enum class Mode { start, copy, f, g, high, low };
  DigitStream x_;
  Mode mode_ = Mode::start;
  std::size_t in_ = 0;
};

class AbsProducer final : public Producer {
 public:
  explicit AbsProducer(DigitStream x) : x_(std::move(x)) {}

  int next() override {
    const int d = x_.digit(pos_++);
    switch (mode_) {
      case Mode::scan:
        if (d == 0) return 0;
        mode_ = d == 1 ? Mode::copy : Mode::negate;
        return 1;
      case Mode::copy: return d;
      case Mode::negate: return -d;
    }
    throw std::logic_error("AbsProducer: bad state");
  }

 private:
  enum class Mode { scan, copy, negate };
  DigitStream x_;
  Mode mode_ = Mode::scan;
  std::size_t pos_ = 0;
};

// Emits digits of a value v in [-1, 1] given approximations of v. Keeps the
// emitted prefix D_k with |v - D_k| <= 2^-k; the next digit is chosen from an
// approximation with error 2^-(k+3), so the scaled residual is known to
// within 1/4.
class EmitterProducer final : public Producer {
 public:
  explicit EmitterProducer(Approximator approx) : approx_(std::move(approx)) {}

  int next() override {
    const std::size_t want = k_ + 3;
    Approximation a = approx_(want);
    if (a.exponent < want) {
      a.numerator <<= (want - a.exponent);
      a.exponent = want;
    }
    // r * 2^s = a - D * 2^(s+1), where r = 2^(k+1) (A - D_k), s = e - k - 1.
    const std::size_t s = a.exponent - k_ - 1;
    const BigInt scaled = a.numerator - (emitted_ << (s + 1));
    const BigInt half = pow2(s - 1);
    int d = 0;
    if (scaled > half) d = 1;
    else if (scaled < -half) d = -1;
    emitted_ = 2 * emitted_ + d;
    ++k_;
    return d;
  }

 private:
  Approximator approx_;
  BigInt emitted_ = 0;
  std::size_t k_ = 0;
};

}  // namespace detail

inline DigitStream zero_stream() { return make_stream<detail::ConstantProducer>(0); }

/// Digits given explicitly, followed by zeros forever.
inline DigitStream from_digits(std::vector<int> head) {
  for (int d : head) (void)Digit(d);
  return make_stream<detail::ListThenZeroProducer>(std::move(head));
}

/// p / 2^n as its plain binary expansion (sign applied to every digit).
inline DigitStream from_dyadic(const BigInt& p, std::size_t n) {
  const BigInt magnitude = p < 0 ? BigInt(-p) : p;
  if (magnitude > pow2(n)) throw std::domain_error("from_dyadic: |p| exceeds 2^n");
  return make_stream<detail::DyadicProducer>(p < 0 ? -1 : 1, magnitude, n);
}

inline DigitStream from_dyadic(const Dyadic& d) { return from_dyadic(d.numerator, d.exponent); }

/// Stream for a value known only through approximations; approx(p) must be
/// within 2^-p of a fixed v with |v| <= 1.
inline DigitStream from_approximations(Approximator approx) {
  return make_stream<detail::EmitterProducer>(std::move(approx));
}

inline DigitStream from_rational(const Rational& q) {
  if (abs(q) > 1) throw std::domain_error("from_rational: value outside [-1, 1]");
  const BigInt num = boost::multiprecision::numerator(q);
  const BigInt den = boost::multiprecision::denominator(q);
  return from_approximations([num, den](std::size_t p) {
    BigInt scaled = (num << p);
    BigInt floor = scaled / den;
    if (scaled < 0 && floor * den != scaled) floor -= 1;
    return Approximation{floor, p};
  });
}

inline DigitStream negate(DigitStream x) { return make_stream<detail::NegateProducer>(std::move(x)); }

/// (x + y) / 2.
inline DigitStream average(DigitStream x, DigitStream y) {
  return make_stream<detail::AverageProducer>(std::move(x), std::move(y));
}

/// 2x. Requires |x| <= 1/2; the result is not meaningful otherwise.
inline DigitStream double_value(DigitStream x) { return make_stream<detail::DoubleProducer>(std::move(x)); }

/// x + y. Requires |x + y| <= 1, inherited from double_value.
inline DigitStream add(DigitStream x, DigitStream y) { return double_value(average(std::move(x), std::move(y))); }

inline DigitStream abs(DigitStream x) { return make_stream<detail::AbsProducer>(std::move(x)); }

/// x * y. Digit k is chosen from the exact product of the (k+4)-digit prefixes.
inline DigitStream multiply(DigitStream x, DigitStream y) {
  auto rx = std::make_shared<PrefixReader>(std::move(x));
  auto ry = std::make_shared<PrefixReader>(std::move(y));
  return from_approximations([rx, ry](std::size_t p) {
    // |xy - X_m Y_m| <= 2^-(m-1)
    const std::size_t m = p + 1;
    const Approximation ax = rx->at(m);
    const Approximation ay = ry->at(m);
    return Approximation{ax.numerator * ay.numerator, ax.exponent + ay.exponent};
  });
}

/// max(x, y) = (x (+) y) + |x (+) -y| where (+) is the average.
inline DigitStream max2(const DigitStream& x, const DigitStream& y) {
  return add(average(x, y), abs(average(x, negate(y))));
}

inline DigitStream max_set(std::span<const DigitStream> xs) {
  if (xs.empty()) throw std::domain_error("max_set: empty collection");
  DigitStream acc = xs.front();
  for (std::size_t i = 1; i < xs.size(); ++i) acc = max2(acc, xs[i]);
  return acc;
}

inline constexpr std::size_t default_digit_budget = 256;

struct Comparison {
  Ordering3 order;
  std::size_t digits_consumed;
};

/// Compares two streams known to be different by scanning (x (+) -y) for its
/// first nonzero digit. Never returns Ordering3::equivalent. With a budget,
/// throws UndecidedComparison once that many zero digits have been seen;
/// without one it does not return for equal inputs.
inline Comparison compare_distinct(const DigitStream& x, const DigitStream& y,
                                   std::optional<std::size_t> digit_budget = default_digit_budget) {
  const DigitStream diff = average(x, negate(y));
  for (std::size_t i = 0;; ++i) {
    if (digit_budget && i >= *digit_budget) throw UndecidedComparison(i);
    const int d = diff.digit(i);
    if (d < 0) return {Ordering3::less, i + 1};
    if (d > 0) return {Ordering3::greater, i + 1};
  }
}

struct ArgmaxResult {
  std::size_t index;                       // position of the winner in keys
  std::vector<std::size_t> digits_consumed;  // one entry per comparison
};

/// Index of the key whose stream is maximal, by the pairwise tournament
/// argmax({a, b} + Y) = argmax({winner(a, b)} + Y).
template <class F>
ArgmaxResult argmax_mono_index(std::size_t key_count, F&& f,
                               std::optional<std::size_t> digit_budget = default_digit_budget) {
  if (key_count == 0) throw std::domain_error("argmax_mono: empty key set");
  ArgmaxResult result{0, {}};
  DigitStream best = f(std::size_t{0});
  for (std::size_t next = 1; next < key_count; ++next) {
    DigitStream challenger = f(next);
    try {
      const Comparison c = compare_distinct(best, challenger, digit_budget);
      result.digits_consumed.push_back(c.digits_consumed);
      if (c.order == Ordering3::less) {
        result.index = next;
        best = std::move(challenger);
      }
    } catch (const UndecidedComparison& e) {
      std::vector<std::size_t> contenders{result.index};
      for (std::size_t j = next; j < key_count; ++j) contenders.push_back(j);
      throw UndecidedComparison(e.digits_scanned, result.index, next, std::move(contenders));
    }
  }
  return result;
}

template <class Label, class F>
Label argmax_mono(std::span<const Label> keys, F&& f,
                  std::optional<std::size_t> digit_budget = default_digit_budget) {
  const auto r = argmax_mono_index(
      keys.size(), [&](std::size_t i) { return f(keys[i]); }, digit_budget);
  return keys[r.index];
}

/// Debug rendering of the first n digits, e.g. "+0-+" for 1:0:-1:1.
inline std::string to_signed_string(const DigitStream& x, std::size_t n) {
  std::string out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int d = x.digit(i);
    out.push_back(d > 0 ? '+' : (d < 0 ? '-' : '0'));
  }
  return out;
}

/// Inverse of to_signed_string for a finite head; the tail is zero.
inline DigitStream from_signed_string(std::string_view s) {
  std::vector<int> digits;
  for (char c : s) {
    switch (c) {
      case '+': case '1': digits.push_back(1); break;
      case '-': digits.push_back(-1); break;
      case '0': digits.push_back(0); break;
      default: throw std::invalid_argument(std::string("bad signed digit '") + c + "'");
    }
  }
  return from_digits(std::move(digits));
}

}  // namespace ucai
