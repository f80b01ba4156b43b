// Brute-force expectimax with exact rationals over every enumerated program,
// and the comparison of its values with the stream planner.
#pragma once

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ucai/env_model.hpp"
#include "ucai/harness/config.hpp"
#include "ucai/planner.hpp"

namespace ucai::harness {

inline constexpr std::size_t oracle_evaluation_limit = 1'000'000;

class OracleTooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exact reference values. Works from its own enumeration and weights; shares
/// no state with MixtureModel.
class BruteForceOracle {
 public:
  struct Program {
    Transducer machine;
    Rational weight;
  };

  /// Programs of length <= max_len (and at most class_limit states), with
  /// xi1 weights or xi2 weights computed to within 2^-weight_precision.
  BruteForceOracle(const Alphabet& alphabet, const ModelParams& params, std::size_t weight_precision = 192)
      : alphabet_(alphabet), weight_error_(BigInt(1), pow2(weight_precision)) {
    const CodeLayout layout(alphabet, params.header);
    if (enumeration_size(params.max_len, layout) > oracle_evaluation_limit)
      throw OracleTooLarge("more than " + std::to_string(oracle_evaluation_limit) + " programs to enumerate");
    const RandomDigitSource src(params.seed);
    for (auto& p : enumerate_by_length(params.max_len, layout).programs) {
      if (params.class_limit && p.machine.states > *params.class_limit) continue;
      Rational w;
      if (params.prior == PriorKind::xi1) {
        w = prior_xi1(p.code).value();
      } else {
        const auto branch = src.branch(eta(p.code));
        w = perturbed_weight(p.code.size(), params.delta, weight_precision,
                             [&](std::size_t i) { return branch.word(i); })
                .value();
      }
      programs_.push_back({std::move(p.machine), w});
    }
  }

  const std::vector<Program>& programs() const { return programs_; }
  const Alphabet& alphabet() const { return alphabet_; }

  /// Bound on the total weight error over all programs.
  Rational weight_error() const {
    return weight_error_ * static_cast<long long>(programs_.size());
  }

  std::size_t evaluations() const { return evaluations_; }

  /// Sum of weights of programs reproducing seq.
  Rational mass(std::span<const Interaction> seq) const {
    Rational total = 0;
    for (const auto& p : programs_)
      if (consistent(p.machine, seq)) total += p.weight;
    return total;
  }

  /// Q(history, action) with per-step rewards r'.
  Rational q_value(const History& history, std::size_t action, const NormalizedReward& rewards) {
    std::vector<std::pair<const Program*, std::size_t>> live;
    for (const auto& p : programs_) {
      std::size_t state = 0;
      bool ok = true;
      for (const auto& s : history) {
        const auto& e = p.machine.at(state, s.action);
        if (e.output != s.perception) {
          ok = false;
          break;
        }
        state = e.next;
      }
      if (ok) live.push_back({&p, state});
    }
    return value(live, action, rewards.lookahead, 0, rewards);
  }

 private:
  using Group = std::vector<std::pair<const Program*, std::size_t>>;

  Rational value(const Group& group, std::size_t action, std::size_t remaining, const Rational& ret,
                 const NormalizedReward& rewards) {
    evaluations_ += group.size();
    if (evaluations_ > oracle_evaluation_limit)
      throw OracleTooLarge("oracle needs more than " + std::to_string(oracle_evaluation_limit) +
                           " program-branch evaluations");
    std::map<Perception, Group> split;
    for (const auto& [p, state] : group) {
      const auto& e = p->machine.at(state, action);
      split[e.output].push_back({p, e.next});
    }
    Rational total = 0;
    for (const auto& [e, sub] : split) {
      const Rational r = ret + rewards.mapped[e.reward];
      if (remaining == 1) {
        Rational w = 0;
        for (const auto& [p, state] : sub) w += p->weight;
        total += r * w;
      } else {
        Rational best = 0;
        bool first = true;
        for (std::size_t a = 0; a < alphabet_.actions.size(); ++a) {
          const Rational v = value(sub, a, remaining - 1, r, rewards);
          if (first || v > best) best = v;
          first = false;
        }
        total += best;
      }
    }
    return total;
  }

  Alphabet alphabet_;
  Rational weight_error_;
  std::vector<Program> programs_;
  std::size_t evaluations_ = 0;
};

struct OracleRow {
  std::size_t action = 0;
  Rational oracle;
  Approximation stream;
  Rational deviation;
  Rational tolerance;
  bool ok = true;
};

struct OracleReport {
  std::vector<OracleRow> rows;
  Rational tail_bound;
  Rational max_deviation;
  std::size_t programs = 0;
  std::size_t evaluations = 0;
  bool passed = true;
  std::string failure;

  std::string summary(const Alphabet& alphabet) const {
    std::ostringstream out;
    out << "programs=" << programs << " evaluations=" << evaluations
        << " tail_bound=" << detail::rational_str(tail_bound) << "\n";
    for (const auto& r : rows)
      out << "action " << alphabet.actions[r.action] << ": stream=" << r.stream.str()
          << " oracle=" << detail::rational_str(r.oracle) << " deviation~" << r.deviation.convert_to<double>()
          << " tolerance~" << r.tolerance.convert_to<double>() << (r.ok ? " ok" : " MISMATCH") << "\n";
    out << "max deviation~" << max_deviation.convert_to<double>() << "\n";
    out << (passed ? "PASS" : "FAIL: " + failure) << "\n";
    return out.str();
  }
};

/// Compares the stream Q of every action at cfg.history against the oracle:
/// |approx - oracle| <= 2^-precision + weight error + tail bound, where the
/// tail bound covers programs the oracle does not enumerate.
inline OracleReport oracle_check(const RunConfig& cfg) {
  const AgentParams params = cfg.agent_params();
  Agent agent(cfg.alphabet, params);
  BruteForceOracle oracle(cfg.alphabet, params.model, cfg.precision + 128);

  const std::size_t k = cfg.history.size() + 1;
  const NormalizedReward rewards = agent.rewards_for(params.horizon.lookahead(k));
  Rational max_return = 0;
  for (const auto& r : rewards.mapped) max_return = std::max(max_return, r);
  max_return *= static_cast<long long>(rewards.lookahead);

  OracleReport report;
  report.programs = oracle.programs().size();
  report.tail_bound = agent.model().unenumerated_mass() * max_return;
  const Rational tolerance = Rational(BigInt(1), pow2(cfg.precision)) + oracle.weight_error() + report.tail_bound;

  for (std::size_t a = 0; a < cfg.alphabet.actions.size(); ++a) {
    OracleRow row;
    row.action = a;
    row.oracle = oracle.q_value(cfg.history, a, rewards);
    row.stream = interpret_prefix(agent.q_value(cfg.history, a), cfg.precision);
    if (cfg.fault_digit) {
      const std::size_t f = std::min(*cfg.fault_digit, row.stream.exponent);
      row.stream.numerator += pow2(row.stream.exponent - f);
    }
    row.deviation = abs(row.stream.value() - row.oracle);
    row.tolerance = tolerance;
    row.ok = row.deviation <= tolerance;
    report.max_deviation = std::max(report.max_deviation, row.deviation);
    if (!row.ok && report.passed) {
      report.passed = false;
      report.failure = "action " + cfg.alphabet.actions[a] + " after history [" +
                       format_history(cfg.history, cfg.alphabet) + "] deviates by more than the tolerance";
    }
    report.rows.push_back(row);
  }
  report.evaluations = oracle.evaluations();
  return report;
}

}  // namespace ucai::harness
