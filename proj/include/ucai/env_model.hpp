// Environment programs: total finite-state transducers under a
// self-delimiting prefix code, their priors, enumeration, and exact counting
// of the programs that agree with an interaction record.
#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "ucai/exact_stream.hpp"
#include "ucai/random_source.hpp"

namespace ucai {

/// The action, observation and reward sets. Rewards are exact rationals.
struct Alphabet {
  std::vector<std::string> actions;
  std::vector<std::string> observations;
  std::vector<Rational> rewards;

  void validate() const {
    if (actions.empty()) throw std::invalid_argument("action set is empty");
    if (observations.empty()) throw std::invalid_argument("observation set is empty");
    if (rewards.size() < 2) throw std::invalid_argument("reward set needs at least two values");
    if (reward_min() == reward_max()) throw std::invalid_argument("reward set must have r_min < r_max");
    auto distinct = [](auto v) {
      std::sort(v.begin(), v.end());
      return std::adjacent_find(v.begin(), v.end()) == v.end();
    };
    if (!distinct(actions) || !distinct(observations) || !distinct(rewards))
      throw std::invalid_argument("alphabet entries must be distinct");
  }

  Rational reward_min() const { return *std::min_element(rewards.begin(), rewards.end()); }
  Rational reward_max() const { return *std::max_element(rewards.begin(), rewards.end()); }
  std::size_t reward_min_index() const {
    return static_cast<std::size_t>(std::min_element(rewards.begin(), rewards.end()) - rewards.begin());
  }
  std::size_t reward_max_index() const {
    return static_cast<std::size_t>(std::max_element(rewards.begin(), rewards.end()) - rewards.begin());
  }
  std::size_t perception_count() const { return observations.size() * rewards.size(); }
};

/// An observation and a reward, both as indices into the Alphabet.
struct Perception {
  std::size_t observation = 0;
  std::size_t reward = 0;

  friend auto operator<=>(const Perception&, const Perception&) = default;
};

struct Interaction {
  std::size_t action = 0;
  Perception perception;

  friend auto operator<=>(const Interaction&, const Interaction&) = default;
};

/// Bits of a program code, one 0/1 value per element.
using ProgramCode = std::vector<std::uint8_t>;

inline std::string to_string(const ProgramCode& bits) {
  std::string s;
  s.reserve(bits.size());
  for (auto b : bits) s.push_back(b ? '1' : '0');
  return s;
}

inline ProgramCode parse_program_code(std::string_view s) {
  ProgramCode bits;
  bits.reserve(s.size());
  for (char c : s) {
    if (c != '0' && c != '1') throw std::invalid_argument("program code must be a string of 0/1");
    bits.push_back(c == '1');
  }
  return bits;
}

enum class HeaderCode { unary, elias_gamma };

namespace detail {
inline std::size_t bit_width_for(std::size_t count) {
  std::size_t w = 0;
  while ((std::size_t{1} << w) < count) ++w;
  return w;
}
}  // namespace detail

/// Code layout: a header naming the state count n, then for every state and
/// action (state-major) the next state, observation and reward indices in
/// fixed widths, most significant bit first. Codes whose indices fall out of
/// range are syntactically complete but invalid.
class CodeLayout {
 public:
  CodeLayout(std::size_t actions, std::size_t observations, std::size_t rewards,
             HeaderCode header = HeaderCode::unary)
      : actions_(actions), observations_(observations), rewards_(rewards), header_(header) {
    if (actions == 0 || observations == 0 || rewards == 0) throw std::invalid_argument("empty alphabet");
  }

  explicit CodeLayout(const Alphabet& a, HeaderCode header = HeaderCode::unary)
      : CodeLayout(a.actions.size(), a.observations.size(), a.rewards.size(), header) {}

  std::size_t actions() const { return actions_; }
  std::size_t observations() const { return observations_; }
  std::size_t rewards() const { return rewards_; }
  HeaderCode header() const { return header_; }

  std::size_t header_length(std::size_t n) const {
    if (header_ == HeaderCode::unary) return n;
    std::size_t floor_log = 0;
    while ((n >> (floor_log + 1)) != 0) ++floor_log;
    return 2 * floor_log + 1;
  }
  std::size_t state_width(std::size_t n) const { return detail::bit_width_for(n); }
  std::size_t observation_width() const { return detail::bit_width_for(observations_); }
  std::size_t reward_width() const { return detail::bit_width_for(rewards_); }
  std::size_t entry_width(std::size_t n) const { return state_width(n) + observation_width() + reward_width(); }
  std::size_t entries(std::size_t n) const { return n * actions_; }
  std::size_t table_length(std::size_t n) const { return entries(n) * entry_width(n); }
  std::size_t length(std::size_t n) const { return header_length(n) + table_length(n); }

  /// In-range choices for one table entry.
  std::size_t valid_choices(std::size_t n) const { return n * observations_ * rewards_; }

  /// Total Kraft mass of all syntactically complete codes with n states.
  Dyadic class_mass(std::size_t n) const { return {1, header_length(n)}; }

  /// The state count whose codes have exactly this length, if any.
  std::optional<std::size_t> class_of_length(std::size_t len) const {
    for (std::size_t n = 1; length(n) <= len; ++n)
      if (length(n) == len) return n;
    return std::nullopt;
  }

  /// Largest n with length(n) <= max_len (0 if none).
  std::size_t classes_within(std::size_t max_len) const {
    std::size_t n = 0;
    while (length(n + 1) <= max_len) ++n;
    return n;
  }

 private:
  std::size_t actions_;
  std::size_t observations_;
  std::size_t rewards_;
  HeaderCode header_;
};

/// A total deterministic Mealy machine started in state 0.
struct Transducer {
  struct Entry {
    std::size_t next = 0;
    Perception output;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  std::size_t states = 1;
  std::size_t actions = 1;
  std::vector<Entry> table;  // index state * actions + action

  const Entry& at(std::size_t state, std::size_t action) const { return table.at(state * actions + action); }
  Entry& at(std::size_t state, std::size_t action) { return table.at(state * actions + action); }

  friend bool operator==(const Transducer&, const Transducer&) = default;
};

namespace detail {

class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> bits) : bits_(bits) {}
  bool exhausted() const { return pos_ >= bits_.size(); }
  std::size_t remaining() const { return bits_.size() - pos_; }
  std::optional<std::size_t> read(std::size_t width) {
    if (remaining() < width) return std::nullopt;
    std::size_t v = 0;
    for (std::size_t i = 0; i < width; ++i) v = (v << 1) | (bits_[pos_++] ? 1U : 0U);
    return v;
  }

 private:
  std::span<const std::uint8_t> bits_;
  std::size_t pos_ = 0;
};

inline void append_bits(ProgramCode& out, std::size_t value, std::size_t width) {
  for (std::size_t i = width; i-- > 0;) out.push_back(static_cast<std::uint8_t>((value >> i) & 1U));
}

}  // namespace detail

/// Decodes a program. Returns nullopt for codes that are truncated, carry
/// trailing bits, or name an out-of-range state, observation or reward.
inline std::optional<Transducer> decode(std::span<const std::uint8_t> bits, const CodeLayout& layout) {
  detail::BitReader in(bits);
  std::size_t n = 0;
  if (layout.header() == HeaderCode::unary) {
    std::size_t zeros = 0;
    for (;;) {
      auto b = in.read(1);
      if (!b) return std::nullopt;
      if (*b == 1) break;
      ++zeros;
    }
    n = zeros + 1;
  } else {
    std::size_t zeros = 0;
    for (;;) {
      auto b = in.read(1);
      if (!b) return std::nullopt;
      if (*b == 1) break;
      ++zeros;
    }
    if (zeros >= 8 * sizeof(std::size_t) - 1) return std::nullopt;
    auto rest = in.read(zeros);
    if (!rest) return std::nullopt;
    n = (std::size_t{1} << zeros) | *rest;
  }
  // Cheap length check before allocating the table.
  if (in.remaining() != layout.table_length(n)) return std::nullopt;

  Transducer t;
  t.states = n;
  t.actions = layout.actions();
  t.table.resize(layout.entries(n));
  for (auto& entry : t.table) {
    const auto next = *in.read(layout.state_width(n));
    const auto obs = *in.read(layout.observation_width());
    const auto rew = *in.read(layout.reward_width());
    if (next >= n || obs >= layout.observations() || rew >= layout.rewards()) return std::nullopt;
    entry = {next, {obs, rew}};
  }
  return t;
}

inline ProgramCode encode(const Transducer& t, const CodeLayout& layout) {
  const std::size_t n = t.states;
  if (n == 0 || t.actions != layout.actions() || t.table.size() != layout.entries(n))
    throw std::invalid_argument("encode: transducer does not match layout");
  ProgramCode out;
  out.reserve(layout.length(n));
  if (layout.header() == HeaderCode::unary) {
    out.insert(out.end(), n - 1, 0);
    out.push_back(1);
  } else {
    const std::size_t zeros = layout.header_length(n) / 2;
    out.insert(out.end(), zeros, 0);
    detail::append_bits(out, n, zeros + 1);
  }
  for (const auto& e : t.table) {
    detail::append_bits(out, e.next, layout.state_width(n));
    detail::append_bits(out, e.output.observation, layout.observation_width());
    detail::append_bits(out, e.output.reward, layout.reward_width());
  }
  return out;
}

/// Feeds the actions one by one and collects the emitted perceptions.
inline std::vector<Perception> run(const Transducer& t, std::span<const std::size_t> actions) {
  std::vector<Perception> out;
  out.reserve(actions.size());
  std::size_t state = 0;
  for (std::size_t a : actions) {
    const auto& e = t.at(state, a);
    out.push_back(e.output);
    state = e.next;
  }
  return out;
}

/// Replay form: the perception answering the last of `actions` after the
/// machine has been driven by the earlier ones. Recomputes from the start.
inline Perception replay_last(const Transducer& t, std::span<const std::size_t> actions) {
  if (actions.empty()) throw std::invalid_argument("replay_last: no actions");
  return run(t, actions).back();
}

inline bool consistent(const Transducer& t, std::span<const Interaction> history) {
  std::size_t state = 0;
  for (const auto& step : history) {
    const auto& e = t.at(state, step.action);
    if (e.output != step.perception) return false;
    state = e.next;
  }
  return true;
}

/// eta([]) = 1, eta(b : x) = b + 2 eta(x).
inline BigInt eta(std::span<const std::uint8_t> bits) {
  BigInt v = 1;
  for (auto it = bits.rbegin(); it != bits.rend(); ++it) v = 2 * v + (*it ? 1 : 0);
  return v;
}

/// 2^-l(q).
inline Dyadic prior_xi1(std::span<const std::uint8_t> bits) { return {1, bits.size()}; }

/// Approximation of 2^-len (1 - delta * d) for the binary fraction d whose
/// 64-bit words come from `word`, to within 2^-p.
template <class WordFn>
Approximation perturbed_weight(std::size_t len, const Dyadic& delta, std::size_t p, WordFn&& word) {
  // Using W words of d leaves an error of at most delta 2^-len 2^-64W <= 2^-p.
  const std::size_t words = (p + 63) / 64;
  BigInt d = 0;
  for (std::size_t w = 0; w < words; ++w) d = (d << 64) + BigInt(word(w));
  const std::size_t d_exp = 64 * words;
  // 2^-len (1 - delta_num / 2^delta_exp * d / 2^d_exp)
  const std::size_t exponent = len + delta.exponent + d_exp;
  const BigInt num = pow2(delta.exponent + d_exp) - delta.numerator * d;
  return {num, exponent};
}

/// xi_2(q) = xi_1(q) (1 - delta d(eta(q))) as a stream. Requires 0 < delta < 1.
inline DigitStream prior_xi2(const ProgramCode& bits, const RandomDigitSource& src, const Dyadic& delta) {
  if (delta.numerator <= 0 || delta.value() >= 1) throw std::domain_error("prior_xi2: delta must lie in (0, 1)");
  const auto branch = src.branch(eta(bits));
  const std::size_t len = bits.size();
  return from_approximations([branch, len, delta](std::size_t p) {
    return perturbed_weight(len, delta, p, [&](std::size_t w) { return branch.word(w); });
  });
}

struct EnumeratedProgram {
  ProgramCode code;
  Transducer machine;
};

struct LengthCounts {
  BigInt valid = 0;
  BigInt invalid = 0;  // syntactically complete but out of range
};

struct Enumeration {
  std::vector<EnumeratedProgram> programs;  // length, then lexicographic order
  std::map<std::size_t, LengthCounts> per_length;
};

/// Number of valid codes of length <= max_len.
inline BigInt enumeration_size(std::size_t max_len, const CodeLayout& layout) {
  BigInt total = 0;
  for (std::size_t n = 1; layout.length(n) <= max_len; ++n)
    total += boost::multiprecision::pow(BigInt(layout.valid_choices(n)), static_cast<unsigned>(layout.entries(n)));
  return total;
}

/// Every valid code of length <= max_len, generated class by class.
inline Enumeration enumerate_by_length(std::size_t max_len, const CodeLayout& layout) {
  Enumeration out;
  for (std::size_t n = 1; layout.length(n) <= max_len; ++n) {
    const std::size_t entries = layout.entries(n);
    const std::size_t choices = layout.valid_choices(n);
    const std::size_t per_reward = layout.rewards();
    const std::size_t per_obs = layout.observations() * per_reward;

    auto& counts = out.per_length[layout.length(n)];
    counts.valid = boost::multiprecision::pow(BigInt(choices), static_cast<unsigned>(entries));
    counts.invalid = pow2(layout.table_length(n)) - counts.valid;

    std::vector<std::size_t> odometer(entries, 0);
    Transducer t;
    t.states = n;
    t.actions = layout.actions();
    t.table.resize(entries);
    for (;;) {
      for (std::size_t i = 0; i < entries; ++i) {
        const std::size_t c = odometer[i];
        t.table[i] = {c / per_obs, {(c % per_obs) / per_reward, c % per_reward}};
      }
      out.programs.push_back({encode(t, layout), t});
      std::size_t i = entries;
      while (i > 0 && ++odometer[i - 1] == choices) odometer[--i] = 0;
      if (i == 0) break;
    }
  }
  return out;
}

/// Judgment-day program: replays `prefix` (e_1..e_{k-1}) whatever the
/// actions, then rewards r_max forever if the action at step k is `chosen`
/// and r_min forever otherwise.
inline Transducer judgment_day(std::size_t chosen, std::size_t k, std::span<const Perception> prefix,
                               const Alphabet& alphabet, std::size_t observation = 0) {
  if (k < 1) throw std::invalid_argument("judgment_day: k must be >= 1");
  if (prefix.size() != k - 1) throw std::invalid_argument("judgment_day: prefix must hold k - 1 perceptions");
  const std::size_t actions = alphabet.actions.size();
  if (chosen >= actions) throw std::invalid_argument("judgment_day: unknown action");
  const std::size_t judge = k - 1;
  const std::size_t heaven = k;
  const std::size_t hell = k + 1;
  Transducer t;
  t.states = k + 2;
  t.actions = actions;
  t.table.resize(t.states * actions);
  const Perception high{observation, alphabet.reward_max_index()};
  const Perception low{observation, alphabet.reward_min_index()};
  for (std::size_t a = 0; a < actions; ++a) {
    for (std::size_t s = 0; s < judge; ++s) t.at(s, a) = {s + 1, prefix[s]};
    t.at(judge, a) = a == chosen ? Transducer::Entry{heaven, high} : Transducer::Entry{hell, low};
    t.at(heaven, a) = {heaven, high};
    t.at(hell, a) = {hell, low};
  }
  return t;
}

// ---------------------------------------------------------------------------
// Counting programs that agree with an interaction record.
//
// Driving an n-state machine along a record only inspects the table entries
// it visits. Each visited entry is pinned by the observed perception; its
// next state is either a state already reached or a fresh one, and all
// n - v fresh choices (v states reached so far) are interchangeable. So the
// number of valid n-state programs agreeing with the record is
//   sum over shapes of  prod_j (n - v_j)  *  C(n)^(entries(n) - pinned)
// where C(n) counts in-range choices for an unvisited entry.

/// One way of threading a record through the table.
struct ShapeTerm {
  std::size_t pinned = 0;            // table entries fixed by the record
  std::vector<std::size_t> fresh;    // states reached before each fresh jump
  BigInt multiplicity = 1;
};

class ConsistencyFrontier {
 public:
  explicit ConsistencyFrontier(std::size_t actions) : actions_(actions) {
    configs_.push_back(Config{0, 1, {}, {}});
  }

  std::size_t actions() const { return actions_; }
  std::size_t size() const { return configs_.size(); }

  /// Configurations that agree with one more step.
  ConsistencyFrontier extend(std::size_t action, const Perception& observed) const {
    ConsistencyFrontier out(actions_, {});
    for (const auto& c : configs_) {
      const std::size_t key = c.state * actions_ + action;
      if (const auto* entry = c.find(key)) {
        if (entry->output == observed) {
          Config next = c;
          next.state = entry->next;
          out.configs_.push_back(std::move(next));
        }
        continue;
      }
      for (std::size_t target = 0; target <= c.reached; ++target) {
        Config next = c;
        if (target == c.reached) {
          next.fresh.push_back(c.reached);
          ++next.reached;
        }
        next.pinned.push_back({key, {target, observed}});
        next.state = target;
        out.configs_.push_back(std::move(next));
      }
    }
    return out;
  }

  ConsistencyFrontier extend(std::span<const Interaction> steps) const {
    ConsistencyFrontier f = *this;
    for (const auto& s : steps) f = f.extend(s.action, s.perception);
    return f;
  }

  /// Shapes aggregated by (pinned count, fresh list).
  std::vector<ShapeTerm> terms() const {
    std::map<std::pair<std::size_t, std::vector<std::size_t>>, BigInt> agg;
    for (const auto& c : configs_) agg[{c.pinned.size(), c.fresh}] += 1;
    std::vector<ShapeTerm> out;
    out.reserve(agg.size());
    for (auto& [k, m] : agg) out.push_back({k.first, k.second, m});
    return out;
  }

 private:
  struct Config {
    std::size_t state;
    std::size_t reached;  // states 0..reached-1 have been visited
    std::vector<std::size_t> fresh;
    std::vector<std::pair<std::size_t, Transducer::Entry>> pinned;

    const Transducer::Entry* find(std::size_t key) const {
      for (const auto& [k, e] : pinned)
        if (k == key) return &e;
      return nullptr;
    }
  };

  ConsistencyFrontier(std::size_t actions, std::vector<Config> configs)
      : actions_(actions), configs_(std::move(configs)) {}

  std::size_t actions_;
  std::vector<Config> configs_;
};

/// Number of valid n-state programs matching the shapes.
inline BigInt count_consistent(std::span<const ShapeTerm> terms, std::size_t n, const CodeLayout& layout) {
  BigInt total = 0;
  const BigInt choices = layout.valid_choices(n);
  const std::size_t entries = layout.entries(n);
  for (const auto& t : terms) {
    if (t.pinned > entries) continue;
    BigInt m = t.multiplicity;
    for (std::size_t v : t.fresh) {
      if (n <= v) {
        m = 0;
        break;
      }
      m *= (n - v);
    }
    if (m == 0) continue;
    total += m * boost::multiprecision::pow(choices, static_cast<unsigned>(entries - t.pinned));
  }
  return total;
}

/// Valid n-state programs whose runs reproduce `history`.
inline BigInt count_consistent(std::span<const Interaction> history, std::size_t n, const CodeLayout& layout) {
  const auto terms = ConsistencyFrontier(layout.actions()).extend(history).terms();
  return count_consistent(terms, n, layout);
}

}  // namespace ucai
