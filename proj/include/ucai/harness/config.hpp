// Run configuration: line-oriented "key = value" files.
#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ucai/env_model.hpp"
#include "ucai/harness/environments.hpp"
#include "ucai/harness/text.hpp"
#include "ucai/planner.hpp"

namespace ucai::harness {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::size_t line, const std::string& what)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct RunConfig {
  Alphabet alphabet{{"a", "b"}, {"o"}, {Rational(0), Rational(1)}};
  std::size_t horizon = 2;
  PriorKind prior = PriorKind::xi2;
  Dyadic delta{1, 64};
  Rational epsilon{1, 8};
  std::uint64_t seed = 0;
  std::size_t steps = 4;
  DecisionMode mode = DecisionMode::exact;
  std::size_t deadline_ms = 100;
  std::string environment = "judgment_day:a:1";
  std::size_t max_len = 16;
  std::size_t digit_budget = default_digit_budget;
  std::size_t precision = 32;
  HeaderCode header = HeaderCode::unary;
  std::optional<std::size_t> class_limit;
  bool identity_rewards = false;
  std::optional<Rational> reward_scale;
  std::optional<Rational> reward_shift;
  /// Interaction record the oracle check starts from.
  History history;
  /// Oracle check only: add 2^-fault_digit to every stream approximation.
  std::optional<std::size_t> fault_digit;

  AgentParams agent_params() const {
    AgentParams p;
    p.model.prior = prior;
    p.model.delta = delta;
    p.model.seed = seed;
    p.model.max_len = max_len;
    p.model.header = header;
    p.model.class_limit = class_limit;
    p.horizon = HorizonFn(horizon);
    p.epsilon = epsilon;
    p.identity_if_interior = identity_rewards;
    if (reward_scale) p.reward_map = std::make_pair(*reward_scale, reward_shift.value_or(Rational(0)));
    p.digit_budget = digit_budget;
    return p;
  }
};

/// "action:observation:reward" items separated by commas.
inline History parse_history(const std::string& text, const Alphabet& alphabet) {
  History h;
  for (const auto& item : detail::split_list(text)) {
    const auto parts = detail::split(item, ':');
    if (parts.size() != 3) throw std::invalid_argument("history item must be action:observation:reward");
    h.push_back({detail::index_of(alphabet.actions, parts[0], "action"),
                 {detail::index_of(alphabet.observations, parts[1], "observation"),
                  detail::reward_index(alphabet, parts[2])}});
  }
  return h;
}

inline std::string format_history(const History& h, const Alphabet& alphabet) {
  std::string out;
  for (const auto& s : h) {
    if (!out.empty()) out += ", ";
    out += alphabet.actions[s.action] + ":" + alphabet.observations[s.perception.observation] + ":" +
           detail::rational_str(alphabet.rewards[s.perception.reward]);
  }
  return out;
}

/// Parses config text; every error names the offending line.
inline RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::map<std::string, std::size_t> seen;
  std::string history_text;
  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(lineno, "expected 'key = value'");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (!seen.emplace(key, lineno).second) throw ConfigError(lineno, "duplicate key '" + key + "'");
    try {
      if (key == "actions") cfg.alphabet.actions = detail::split_list(value);
      else if (key == "observations") cfg.alphabet.observations = detail::split_list(value);
      else if (key == "rewards") {
        cfg.alphabet.rewards.clear();
        for (const auto& r : detail::split_list(value)) cfg.alphabet.rewards.push_back(detail::parse_rational(r));
      } else if (key == "horizon") cfg.horizon = detail::parse_u64(value);
      else if (key == "prior") {
        if (value == "xi1") cfg.prior = PriorKind::xi1;
        else if (value == "xi2") cfg.prior = PriorKind::xi2;
        else throw std::invalid_argument("prior must be xi1 or xi2");
      } else if (key == "delta") cfg.delta = detail::parse_dyadic(value);
      else if (key == "epsilon") cfg.epsilon = detail::parse_rational(value);
      else if (key == "seed") cfg.seed = detail::parse_u64(value);
      else if (key == "steps") cfg.steps = detail::parse_u64(value);
      else if (key == "mode") {
        if (value == "exact") cfg.mode = DecisionMode::exact;
        else if (value == "deadline") cfg.mode = DecisionMode::deadline;
        else throw std::invalid_argument("mode must be exact or deadline");
      } else if (key == "deadline_ms") cfg.deadline_ms = detail::parse_u64(value);
      else if (key == "environment") cfg.environment = value;
      else if (key == "max_len") cfg.max_len = detail::parse_u64(value);
      else if (key == "digit_budget") cfg.digit_budget = detail::parse_u64(value);
      else if (key == "precision") cfg.precision = detail::parse_u64(value);
      else if (key == "header") {
        if (value == "unary") cfg.header = HeaderCode::unary;
        else if (value == "gamma") cfg.header = HeaderCode::elias_gamma;
        else throw std::invalid_argument("header must be unary or gamma");
      } else if (key == "class_limit") cfg.class_limit = detail::parse_u64(value);
      else if (key == "identity_rewards") {
        if (value != "true" && value != "false") throw std::invalid_argument("expected true or false");
        cfg.identity_rewards = value == "true";
      } else if (key == "reward_scale") cfg.reward_scale = detail::parse_rational(value);
      else if (key == "reward_shift") cfg.reward_shift = detail::parse_rational(value);
      else if (key == "history") history_text = value;
      else if (key == "fault_digit") cfg.fault_digit = detail::parse_u64(value);
      else throw std::invalid_argument("unknown key '" + key + "'");
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(lineno, key + ": " + e.what());
    }
  }

  auto line_of = [&](const std::string& key) {
    auto it = seen.find(key);
    return it == seen.end() ? std::size_t{0} : it->second;
  };
  auto check = [&](bool ok, const std::string& key, const std::string& msg) {
    if (!ok) throw ConfigError(line_of(key), key + ": " + msg);
  };
  try {
    cfg.alphabet.validate();
  } catch (const std::exception& e) {
    std::size_t line = line_of("rewards");
    if (cfg.alphabet.actions.empty()) line = line_of("actions");
    else if (cfg.alphabet.observations.empty()) line = line_of("observations");
    throw ConfigError(line, e.what());
  }
  check(cfg.horizon >= 1, "horizon", "must be >= 1 (m(k) >= k)");
  check(cfg.delta.numerator > 0 && cfg.delta.value() < 1, "delta", "must lie in (0, 1)");
  check(cfg.epsilon > 0 && cfg.epsilon * 2 < 1, "epsilon", "must lie in (0, 1/2)");
  check(cfg.precision >= 1 && cfg.precision <= 64, "precision", "must lie in [1, 64]");
  check(cfg.digit_budget >= 1, "digit_budget", "must be >= 1");
  check(!cfg.class_limit || *cfg.class_limit >= 1, "class_limit", "must be >= 1");
  check(!cfg.reward_shift || cfg.reward_scale, "reward_shift", "requires reward_scale");
  if (cfg.reward_scale) {
    try {
      (void)affine_rewards(cfg.alphabet.rewards, cfg.horizon, *cfg.reward_scale, cfg.reward_shift.value_or(0));
    } catch (const std::exception& e) {
      throw ConfigError(line_of("reward_scale"), e.what());
    }
  }
  try {
    cfg.history = parse_history(history_text, cfg.alphabet);
  } catch (const std::exception& e) {
    throw ConfigError(line_of("history"), std::string("history: ") + e.what());
  }
  try {
    (void)parse_environment(cfg.environment, cfg.alphabet, cfg.header);
  } catch (const std::exception& e) {
    throw ConfigError(line_of("environment"), std::string("environment: ") + e.what());
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

/// Text that parse_config maps back to an equal configuration.
inline std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream out;
  auto join = [](const auto& items, auto fmt) {
    std::string s;
    for (const auto& x : items) {
      if (!s.empty()) s += ", ";
      s += fmt(x);
    }
    return s;
  };
  auto same = [](const std::string& x) { return x; };
  out << "actions = " << join(cfg.alphabet.actions, same) << "\n";
  out << "observations = " << join(cfg.alphabet.observations, same) << "\n";
  out << "rewards = " << join(cfg.alphabet.rewards, detail::rational_str) << "\n";
  out << "horizon = " << cfg.horizon << "\n";
  out << "prior = " << to_string(cfg.prior) << "\n";
  out << "delta = " << cfg.delta.str() << "\n";
  out << "epsilon = " << detail::rational_str(cfg.epsilon) << "\n";
  out << "seed = " << cfg.seed << "\n";
  out << "steps = " << cfg.steps << "\n";
  out << "mode = " << to_string(cfg.mode) << "\n";
  out << "deadline_ms = " << cfg.deadline_ms << "\n";
  out << "environment = " << cfg.environment << "\n";
  out << "max_len = " << cfg.max_len << "\n";
  out << "digit_budget = " << cfg.digit_budget << "\n";
  out << "precision = " << cfg.precision << "\n";
  out << "header = " << (cfg.header == HeaderCode::unary ? "unary" : "gamma") << "\n";
  if (cfg.class_limit) out << "class_limit = " << *cfg.class_limit << "\n";
  out << "identity_rewards = " << (cfg.identity_rewards ? "true" : "false") << "\n";
  if (cfg.reward_scale) out << "reward_scale = " << detail::rational_str(*cfg.reward_scale) << "\n";
  if (cfg.reward_shift) out << "reward_shift = " << detail::rational_str(*cfg.reward_shift) << "\n";
  if (!cfg.history.empty()) out << "history = " << format_history(cfg.history, cfg.alphabet) << "\n";
  if (cfg.fault_digit) out << "fault_digit = " << *cfg.fault_digit << "\n";
  return out.str();
}

inline bool operator==(const RunConfig& a, const RunConfig& b) {
  return a.alphabet.actions == b.alphabet.actions && a.alphabet.observations == b.alphabet.observations &&
         a.alphabet.rewards == b.alphabet.rewards && a.horizon == b.horizon && a.prior == b.prior &&
         a.delta == b.delta && a.epsilon == b.epsilon && a.seed == b.seed && a.steps == b.steps &&
         a.mode == b.mode && a.deadline_ms == b.deadline_ms && a.environment == b.environment &&
         a.max_len == b.max_len && a.digit_budget == b.digit_budget && a.precision == b.precision &&
         a.header == b.header && a.class_limit == b.class_limit && a.identity_rewards == b.identity_rewards &&
         a.reward_scale == b.reward_scale && a.reward_shift == b.reward_shift && a.history == b.history &&
         a.fault_digit == b.fault_digit;
}

}  // namespace ucai::harness
