// Expectimax agent over the program mixture: per-action value streams,
// reward normalization, and argmax selection in exact or deadline mode.
#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ucai/env_model.hpp"
#include "ucai/exact_stream.hpp"
#include "ucai/random_source.hpp"
#include "ucai/series.hpp"

namespace ucai {

using History = std::vector<Interaction>;

/// m(k): last step planned for at decision step k. Fixed lookahead H gives
/// m(k) = k + H - 1.
class HorizonFn {
 public:
  explicit HorizonFn(std::size_t lookahead = 2)
      : fn_([lookahead](std::size_t k) { return k + lookahead - 1; }) {
    if (lookahead == 0) throw std::invalid_argument("horizon: lookahead must be >= 1");
  }
  explicit HorizonFn(std::function<std::size_t(std::size_t)> m) : fn_(std::move(m)) {}

  std::size_t operator()(std::size_t k) const {
    const std::size_t m = fn_(k);
    if (m < k) throw std::invalid_argument("horizon: m(" + std::to_string(k) + ") < k");
    return m;
  }

  /// H = m(k) - k + 1.
  std::size_t lookahead(std::size_t k) const { return (*this)(k) - k + 1; }

 private:
  std::function<std::size_t(std::size_t)> fn_;
};

/// r' = scale * r + shift, with every mapped reward strictly inside (0, 1/H).
struct NormalizedReward {
  Rational scale = 1;
  Rational shift = 0;
  std::size_t lookahead = 1;
  std::vector<Rational> mapped;

  Rational apply(const Rational& r) const { return scale * r + shift; }
};

namespace detail {
inline NormalizedReward make_reward_map(const std::vector<Rational>& rewards, std::size_t lookahead,
                                        const Rational& scale, const Rational& shift) {
  NormalizedReward out{scale, shift, lookahead, {}};
  out.mapped.reserve(rewards.size());
  for (const auto& r : rewards) out.mapped.push_back(out.apply(r));
  return out;
}
}  // namespace detail

/// Affine map sending r_min to eps/H and r_max to (1 - eps)/H. With
/// identity_if_interior, rewards already strictly inside that band are kept.
inline NormalizedReward normalize_rewards(const std::vector<Rational>& rewards, std::size_t lookahead,
                                          const Rational& epsilon, bool identity_if_interior = false) {
  if (rewards.empty()) throw std::invalid_argument("normalize_rewards: empty reward set");
  if (lookahead == 0) throw std::invalid_argument("normalize_rewards: H must be >= 1");
  if (epsilon <= 0 || epsilon * 2 >= 1) throw std::invalid_argument("normalize_rewards: epsilon must lie in (0, 1/2)");
  const Rational lo = *std::min_element(rewards.begin(), rewards.end());
  const Rational hi = *std::max_element(rewards.begin(), rewards.end());
  if (lo == hi) throw std::invalid_argument("normalize_rewards: r_min must differ from r_max");
  const Rational h(lookahead);
  if (identity_if_interior && lo > epsilon / h && hi < (1 - epsilon) / h)
    return detail::make_reward_map(rewards, lookahead, 1, 0);
  const Rational scale = (1 - 2 * epsilon) / (h * (hi - lo));
  const Rational shift = epsilon / h - scale * lo;
  return detail::make_reward_map(rewards, lookahead, scale, shift);
}

/// An explicit map r' = scale * r + shift; rejected unless scale > 0 and all
/// mapped rewards fall strictly inside (0, 1/H).
inline NormalizedReward affine_rewards(const std::vector<Rational>& rewards, std::size_t lookahead,
                                       const Rational& scale, const Rational& shift) {
  if (lookahead == 0) throw std::invalid_argument("affine_rewards: H must be >= 1");
  if (scale <= 0) throw std::invalid_argument("affine_rewards: scale must be positive");
  auto out = detail::make_reward_map(rewards, lookahead, scale, shift);
  const Rational bound(BigInt(1), BigInt(lookahead));
  for (const auto& r : out.mapped)
    if (r <= 0 || r >= bound) throw std::invalid_argument("affine_rewards: mapped reward outside (0, 1/H)");
  return out;
}

enum class PriorKind { xi1, xi2 };

inline const char* to_string(PriorKind p) { return p == PriorKind::xi1 ? "xi1" : "xi2"; }

struct ModelParams {
  PriorKind prior = PriorKind::xi2;
  Dyadic delta{1, 64};
  std::uint64_t seed = 0;
  /// Programs up to this length are enumerated and carry the perturbed
  /// weight; longer ones are counted exactly with weight 2^-l(q).
  std::size_t max_len = 0;
  HeaderCode header = HeaderCode::unary;
  /// Keep only state counts n <= class_limit in the mixture.
  std::optional<std::size_t> class_limit;
  std::size_t scan_budget = std::size_t{1} << 16;
};

/// The mixture over programs: mass(seq) is the prior mass of programs whose
/// runs reproduce the interaction sequence seq.
class MixtureModel {
 public:
  static constexpr std::size_t max_enumerated_programs = std::size_t{1} << 22;

  MixtureModel(Alphabet alphabet, ModelParams params)
      : alphabet_(std::move(alphabet)), params_(std::move(params)) {
    alphabet_.validate();
    if (params_.delta.numerator <= 0 || params_.delta.value() >= 1)
      throw std::invalid_argument("delta must lie in (0, 1)");
    if (params_.class_limit && *params_.class_limit == 0) throw std::invalid_argument("class_limit must be >= 1");
    if (enumeration_size(params_.max_len, CodeLayout(alphabet_, params_.header)) > max_enumerated_programs)
      throw std::invalid_argument("max_len would enumerate more than " + std::to_string(max_enumerated_programs) +
                                  " programs");
    shared_ = std::make_shared<Shared>(alphabet_, params_);
  }

  MixtureModel(const MixtureModel&) = delete;
  MixtureModel& operator=(const MixtureModel&) = delete;

  const Alphabet& alphabet() const { return alphabet_; }
  const ModelParams& params() const { return params_; }
  const CodeLayout& layout() const { return shared_->layout; }
  const Enumeration& enumeration() const { return shared_->enumeration; }
  const RandomDigitSource& random_source() const { return shared_->source; }

  /// State counts whose programs are all enumerated.
  std::size_t enumerated_classes() const { return shared_->enumerated; }

  /// Index range of class n inside enumeration().programs.
  std::pair<std::size_t, std::size_t> class_range(std::size_t n) const {
    if (n == 0 || n > shared_->enumerated) throw std::out_of_range("class is not enumerated");
    return {shared_->class_begin[n - 1], shared_->class_begin[n]};
  }

  /// R'(n): Kraft mass of all n-state codes.
  Dyadic class_total(std::size_t n) const { return shared_->layout.class_mass(n); }

  /// Whether programs with n states carry the perturbed weight.
  bool perturbed_class(std::size_t n) const {
    return params_.prior == PriorKind::xi2 && n >= 1 && n <= shared_->enumerated;
  }

  /// Weight of enumerated program i: exact 2^-l for xi1, within 2^-precision
  /// of the perturbed weight for xi2 (never below it).
  Rational program_weight(std::size_t i, std::size_t precision) const {
    const auto& prog = shared_->enumeration.programs.at(i);
    if (params_.prior == PriorKind::xi1) return prior_xi1(prog.code).value();
    return perturbed_weight(prog.code.size(), params_.delta, precision,
                            [&](std::size_t w) { return shared_->word(i, w); })
        .value();
  }

  /// Valid n-state programs consistent with seq.
  BigInt consistent_count(std::span<const Interaction> seq, std::size_t n) {
    const auto nd = node(seq);
    if (n >= 1 && n <= shared_->enumerated) return BigInt(nd->data->classes[n - 1]->live.size());
    return count_consistent(nd->data->terms, n, shared_->layout);
  }

  /// Indices (into enumeration().programs) of enumerated programs consistent with seq.
  std::vector<std::size_t> consistent_programs(std::span<const Interaction> seq) {
    const auto nd = node(seq);
    std::vector<std::size_t> out;
    for (const auto& c : nd->data->classes)
      for (const auto& [idx, state] : c->live) out.push_back(idx);
    return out;
  }

  /// R(n): mass of n-state programs consistent with seq.
  DigitStream class_mass(std::span<const Interaction> seq, std::size_t n) {
    return class_stream(shared_, params_, node(seq)->data, n);
  }

  /// Total mixture mass of programs consistent with seq, in [0, 1].
  DigitStream mass(std::span<const Interaction> seq) {
    const auto nd = node(seq);
    std::lock_guard lock(nd->mutex);
    if (!nd->mass) nd->mass = build_mass(nd->data);
    return *nd->mass;
  }

  /// Whether some program (of any size) is consistent with seq.
  bool feasible(std::span<const Interaction> seq) { return !node(seq)->data->terms.empty(); }

  /// 1 - sum_{n <= N} R'(n) for N = enumerated classes, restricted to the
  /// classes the mixture keeps.
  Rational unenumerated_mass() const {
    Rational enumerated = 0;
    for (std::size_t n = 1; n <= shared_->enumerated; ++n) enumerated += class_total(n).value();
    if (!params_.class_limit) return 1 - enumerated;
    Rational kept = 0;
    for (std::size_t n = shared_->enumerated + 1; n <= *params_.class_limit; ++n) kept += class_total(n).value();
    return kept;
  }

 private:
  struct Shared {
    Shared(const Alphabet& a, const ModelParams& p)
        : layout(a, p.header), enumeration(enumerate_by_length(p.max_len, layout)), source(p.seed) {
      enumerated = layout.classes_within(p.max_len);
      if (p.class_limit) enumerated = std::min(enumerated, *p.class_limit);
      class_begin.assign(1, 0);
      std::size_t i = 0;
      for (std::size_t n = 1; n <= enumerated; ++n) {
        while (i < enumeration.programs.size() && enumeration.programs[i].machine.states == n) ++i;
        class_begin.push_back(i);
      }
      if (p.prior == PriorKind::xi2) {
        branches.reserve(class_begin.back());
        for (std::size_t j = 0; j < class_begin.back(); ++j)
          branches.push_back(source.branch(eta(enumeration.programs[j].code)));
      }
    }

    std::uint64_t word(std::size_t program, std::size_t w) const { return branches.at(program).word(w); }

    CodeLayout layout;
    Enumeration enumeration;
    RandomDigitSource source;
    std::size_t enumerated = 0;
    std::vector<std::size_t> class_begin;
    std::vector<SplittableBits> branches;
  };

  // Enumerated programs of one class still consistent, with their current
  // state, plus cached per-word sums of their d(eta(q)) words.
  struct ClassData {
    std::vector<std::pair<std::size_t, std::size_t>> live;
    std::mutex mutex;
    std::vector<BigInt> word_sums;

    BigInt prefix_sum(const Shared& shared, std::size_t words) {
      std::lock_guard lock(mutex);
      while (word_sums.size() < words) {
        const std::size_t w = word_sums.size();
        unsigned __int128 acc = 0;
        for (const auto& [idx, state] : live) acc += shared.word(idx, w);
        BigInt v = static_cast<std::uint64_t>(acc >> 64);
        v = (v << 64) + BigInt(static_cast<std::uint64_t>(acc));
        word_sums.push_back(std::move(v));
      }
      BigInt s = 0;
      for (std::size_t w = 0; w < words; ++w) s = (s << 64) + word_sums[w];
      return s;
    }
  };

  // What the mass streams of a node need; held apart from Node so streams
  // do not keep their own cache entry alive.
  struct NodeData {
    std::vector<ShapeTerm> terms;
    std::vector<std::shared_ptr<ClassData>> classes;
  };

  struct Node {
    explicit Node(ConsistencyFrontier f) : frontier(std::move(f)), data(std::make_shared<NodeData>()) {}
    ConsistencyFrontier frontier;
    std::shared_ptr<NodeData> data;
    std::mutex mutex;
    std::optional<DigitStream> mass;
  };

  using NodePtr = std::shared_ptr<Node>;

  NodePtr root() {
    auto nd = std::make_shared<Node>(ConsistencyFrontier(alphabet_.actions.size()));
    nd->data->terms = nd->frontier.terms();
    for (std::size_t n = 1; n <= shared_->enumerated; ++n) {
      auto c = std::make_shared<ClassData>();
      for (std::size_t i = shared_->class_begin[n - 1]; i < shared_->class_begin[n]; ++i) c->live.push_back({i, 0});
      nd->data->classes.push_back(std::move(c));
    }
    return nd;
  }

  NodePtr child(const Node& parent, const Interaction& step) const {
    if (step.action >= alphabet_.actions.size() || step.perception.observation >= alphabet_.observations.size() ||
        step.perception.reward >= alphabet_.rewards.size())
      throw std::invalid_argument("interaction outside the alphabet");
    auto nd = std::make_shared<Node>(parent.frontier.extend(step.action, step.perception));
    nd->data->terms = nd->frontier.terms();
    for (const auto& pc : parent.data->classes) {
      auto c = std::make_shared<ClassData>();
      for (const auto& [idx, state] : pc->live) {
        const auto& e = shared_->enumeration.programs[idx].machine.at(state, step.action);
        if (e.output == step.perception) c->live.push_back({idx, e.next});
      }
      nd->data->classes.push_back(std::move(c));
    }
    return nd;
  }

  NodePtr node(std::span<const Interaction> seq) {
    std::vector<Interaction> key(seq.begin(), seq.end());
    std::unique_lock lock(cache_mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    // Build from the longest cached prefix.
    std::size_t have = key.size();
    NodePtr base;
    while (!base) {
      if (have == 0) {
        base = root();
        cache_.emplace(std::vector<Interaction>{}, base);
        break;
      }
      --have;
      std::vector<Interaction> prefix(key.begin(), key.begin() + static_cast<std::ptrdiff_t>(have));
      if (auto it = cache_.find(prefix); it != cache_.end()) base = it->second;
    }
    for (std::size_t i = have; i < key.size(); ++i) {
      base = child(*base, key[i]);
      cache_.emplace(std::vector<Interaction>(key.begin(), key.begin() + static_cast<std::ptrdiff_t>(i + 1)), base);
    }
    return base;
  }

  static DigitStream class_stream(const std::shared_ptr<Shared>& shared, const ModelParams& params,
                                  const std::shared_ptr<NodeData>& nd, std::size_t n) {
    const auto& layout = shared->layout;
    if (n >= 1 && n <= shared->enumerated) {
      auto data = nd->classes[n - 1];
      const BigInt count = BigInt(data->live.size());
      const std::size_t len = layout.length(n);
      if (count == 0) return zero_stream();
      if (params.prior == PriorKind::xi1) return from_dyadic(count, len);
      const Dyadic delta = params.delta;
      return from_approximations([shared, data, count, len, delta](std::size_t p) {
        // Truncating each d to W words moves the class mass by at most
        // count 2^-len 2^-64W <= 2^-64W.
        const std::size_t words = std::max<std::size_t>(1, (p + 63) / 64);
        const BigInt s = data->prefix_sum(*shared, words);
        const std::size_t d_exp = 64 * words;
        const BigInt num = (count << (delta.exponent + d_exp)) - delta.numerator * s;
        return Approximation{num, len + delta.exponent + d_exp};
      });
    }
    const BigInt count = count_consistent(nd->terms, n, layout);
    if (count == 0) return zero_stream();
    return from_dyadic(count, layout.length(n));
  }

  DigitStream build_mass(const std::shared_ptr<NodeData>& nd) const {
    if (nd->terms.empty()) return zero_stream();
    if (params_.class_limit) {
      const std::size_t limit = *params_.class_limit;
      auto readers = std::make_shared<std::vector<PrefixReader>>();
      for (std::size_t n = 1; n <= limit; ++n) readers->emplace_back(class_stream(shared_, params_, nd, n));
      auto m = std::make_shared<std::mutex>();
      return from_approximations([readers, m, limit](std::size_t p) {
        const std::size_t exponent = p + detail::ceil_log2(limit) + 1;
        BigInt total = 0;
        std::lock_guard lock(*m);
        for (auto& r : *readers) {
          const Approximation a = r.at(exponent);
          total += a.numerator >> (a.exponent - exponent);
        }
        return Approximation{total, exponent};
      });
    }
    MassProfile profile;
    profile.scan_budget = params_.scan_budget;
    auto shared = shared_;
    profile.term_mass = [shared, params = params_, nd](std::size_t k) { return class_stream(shared, params, nd, k); };
    profile.total_mass = [shared](std::size_t k) { return shared->layout.class_mass(k); };
    return sum_filtered_mass(profile);
  }

  Alphabet alphabet_;
  ModelParams params_;
  std::shared_ptr<Shared> shared_;
  std::mutex cache_mutex_;
  std::map<std::vector<Interaction>, NodePtr> cache_;
};

namespace detail {

/// sum of xs via a balanced average tree padded to a power of two, then as
/// many doublings as tree levels. Requires |sum| <= 1 and every partial
/// average within [-1, 1].
inline DigitStream sum_bounded(std::vector<DigitStream> xs) {
  if (xs.empty()) return zero_stream();
  const std::size_t levels = ceil_log2(xs.size());
  xs.resize(std::size_t{1} << levels, zero_stream());
  while (xs.size() > 1) {
    std::vector<DigitStream> next;
    next.reserve(xs.size() / 2);
    for (std::size_t i = 0; i < xs.size(); i += 2) next.push_back(average(xs[i], xs[i + 1]));
    xs = std::move(next);
  }
  DigitStream acc = xs.front();
  for (std::size_t i = 0; i < levels; ++i) acc = double_value(acc);
  return acc;
}

}  // namespace detail

enum class DecisionMode { exact, deadline };

inline const char* to_string(DecisionMode m) { return m == DecisionMode::exact ? "exact" : "deadline"; }

struct AgentParams {
  ModelParams model;
  HorizonFn horizon{2};
  Rational epsilon{1, 8};
  bool identity_if_interior = false;
  /// Explicit (scale, shift) replacing the default normalization.
  std::optional<std::pair<Rational, Rational>> reward_map;
  std::size_t digit_budget = default_digit_budget;
};

struct SelectOptions {
  DecisionMode mode = DecisionMode::exact;
  std::chrono::milliseconds deadline{0};
  std::uint64_t tie_seed = 0;
};

/// Argmax candidates once every Q is known to within 2^-precision.
struct PrecisionLevel {
  std::size_t precision = 0;
  std::vector<std::size_t> candidates;
};

struct Decision {
  std::size_t action = 0;
  DecisionMode mode = DecisionMode::exact;
  std::vector<std::size_t> digits_consumed;  // exact mode, one per comparison
  std::vector<PrecisionLevel> levels;        // deadline mode, increasing precision
  std::vector<DigitStream> q;                // per-action value streams
};

class Agent {
 public:
  Agent(Alphabet alphabet, AgentParams params)
      : params_(std::move(params)), model_(std::move(alphabet), params_.model) {}

  const AgentParams& params() const { return params_; }
  MixtureModel& model() { return model_; }
  const Alphabet& alphabet() const { return model_.alphabet(); }

  NormalizedReward rewards_for(std::size_t lookahead) const {
    if (params_.reward_map)
      return affine_rewards(alphabet().rewards, lookahead, params_.reward_map->first, params_.reward_map->second);
    return normalize_rewards(alphabet().rewards, lookahead, params_.epsilon, params_.identity_if_interior);
  }

  /// Q(history, a): sum over perceptions, max over later actions, down to
  /// step m(k); each leaf is (return of the branch) * mass(history ++ branch).
  DigitStream q_value(const History& history, std::size_t action) {
    validate(history);
    if (action >= alphabet().actions.size()) throw std::invalid_argument("q_value: unknown action");
    const std::size_t k = history.size() + 1;
    const std::size_t h = params_.horizon.lookahead(k);
    const NormalizedReward rewards = rewards_for(h);
    History seq = history;
    return action_value(seq, action, h, Rational(0), rewards);
  }

  std::vector<DigitStream> q_values(const History& history) {
    std::vector<DigitStream> out;
    for (std::size_t a = 0; a < alphabet().actions.size(); ++a) out.push_back(q_value(history, a));
    return out;
  }

  Decision select_action(const History& history, const SelectOptions& options = {}) {
    Decision d;
    d.mode = options.mode;
    d.q = q_values(history);
    const std::size_t actions = d.q.size();
    if (options.mode == DecisionMode::exact) {
      const auto r = argmax_mono_index(
          actions, [&](std::size_t i) { return d.q[i]; }, params_.digit_budget);
      d.action = r.index;
      d.digits_consumed = r.digits_consumed;
      return d;
    }
    const auto start = std::chrono::steady_clock::now();
    std::vector<PrefixReader> readers;
    for (const auto& q : d.q) readers.emplace_back(q);
    PrecisionLevel level{0, {}};
    for (std::size_t a = 0; a < actions; ++a) level.candidates.push_back(a);
    d.levels.push_back(level);
    for (std::size_t p = 1; d.levels.back().candidates.size() > 1 && p <= params_.digit_budget; ++p) {
      if (std::chrono::steady_clock::now() - start >= options.deadline) break;
      // Interval of action a at precision p: [A_a - 2^-p, A_a + 2^-p].
      std::vector<BigInt> num;
      for (auto& r : readers) {
        const Approximation a = r.at(p);
        num.push_back(a.numerator >> (a.exponent - p));
      }
      BigInt best_lower = num[0] - 1;
      for (const auto& n : num) best_lower = std::max(best_lower, BigInt(n - 1));
      PrecisionLevel next{p, {}};
      for (std::size_t a = 0; a < actions; ++a)
        if (num[a] + 1 >= best_lower) next.candidates.push_back(a);
      d.levels.push_back(std::move(next));
    }
    const auto& final_set = d.levels.back().candidates;
    std::mt19937_64 rng(detail::mix64(options.tie_seed ^ detail::mix64(history.size() + 1)));
    std::uniform_int_distribution<std::size_t> pick(0, final_set.size() - 1);
    d.action = final_set.size() == 1 ? final_set.front() : final_set[pick(rng)];
    return d;
  }

 private:
  void validate(const History& history) const {
    for (const auto& s : history)
      if (s.action >= alphabet().actions.size() || s.perception.observation >= alphabet().observations.size() ||
          s.perception.reward >= alphabet().rewards.size())
        throw std::invalid_argument("history entry outside the alphabet");
  }

  DigitStream action_value(History& seq, std::size_t action, std::size_t remaining, const Rational& ret,
                           const NormalizedReward& rewards) {
    std::vector<DigitStream> terms;
    for (std::size_t o = 0; o < alphabet().observations.size(); ++o) {
      for (std::size_t r = 0; r < alphabet().rewards.size(); ++r) {
        seq.push_back({action, {o, r}});
        if (!model_.feasible(seq)) {
          seq.pop_back();
          continue;
        }
        const Rational total = ret + rewards.mapped[r];
        if (remaining == 1) {
          terms.push_back(multiply(from_rational(total), model_.mass(seq)));
        } else {
          std::vector<DigitStream> options;
          for (std::size_t a = 0; a < alphabet().actions.size(); ++a)
            options.push_back(action_value(seq, a, remaining - 1, total, rewards));
          terms.push_back(max_set(options));
        }
        seq.pop_back();
      }
    }
    return detail::sum_bounded(std::move(terms));
  }

  AgentParams params_;
  MixtureModel model_;
};

/// Perception produced by the environment for the action taken at `step`.
using EnvironmentFn = std::function<Perception(std::size_t step, std::size_t action)>;

class EpisodeError : public std::runtime_error {
 public:
  EpisodeError(std::size_t step, const std::string& what)
      : std::runtime_error("environment failed at step " + std::to_string(step) + ": " + what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

struct EpisodeStep {
  std::size_t step = 0;
  std::size_t action = 0;
  Perception perception;
  Decision decision;
};

/// Alternates select_action and environment responses for `steps` steps.
/// `observer`, if set, sees each step as soon as it completes.
inline std::vector<EpisodeStep> run_episode(Agent& agent, const EnvironmentFn& env, std::size_t steps,
                                            const SelectOptions& options = {},
                                            const std::function<void(const EpisodeStep&)>& observer = {}) {
  std::vector<EpisodeStep> trace;
  History history;
  const auto& alphabet = agent.alphabet();
  for (std::size_t k = 1; k <= steps; ++k) {
    Decision d = agent.select_action(history, options);
    Perception e;
    try {
      e = env(k, d.action);
    } catch (const std::exception& ex) {
      throw EpisodeError(k, ex.what());
    }
    if (e.observation >= alphabet.observations.size() || e.reward >= alphabet.rewards.size())
      throw EpisodeError(k, "perception outside the alphabet");
    history.push_back({d.action, e});
    trace.push_back({k, d.action, e, std::move(d)});
    if (observer) observer(trace.back());
  }
  return trace;
}

}  // namespace ucai
