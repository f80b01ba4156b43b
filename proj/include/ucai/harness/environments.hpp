// Reference environments named by a spec string:
//   transducer:<bits>                    an in-class program code
//   periodic:<obs>:<reward>,...          a fixed cycle of perceptions, blind to actions
//   judgment_day:<action>:<k>[:<obs>]    r_min for k-1 steps, then r_max forever iff
//                                        step k took <action>, else r_min forever
#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ucai/env_model.hpp"
#include "ucai/harness/text.hpp"
#include "ucai/planner.hpp"

namespace ucai::harness {

struct EnvironmentSpec {
  enum class Kind { transducer, periodic, judgment_day };
  Kind kind = Kind::transducer;
  std::string text;
  Transducer machine;               // transducer and judgment_day
  std::vector<Perception> cycle;    // periodic
};

inline EnvironmentSpec parse_environment(const std::string& text, const Alphabet& alphabet, HeaderCode header) {
  EnvironmentSpec spec;
  spec.text = text;
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("expected <kind>:<arguments>");
  const std::string kind = detail::trim(text.substr(0, colon));
  const std::string args = detail::trim(text.substr(colon + 1));
  if (kind == "transducer") {
    spec.kind = EnvironmentSpec::Kind::transducer;
    auto t = decode(parse_program_code(args), CodeLayout(alphabet, header));
    if (!t) throw std::invalid_argument("program code does not decode to a valid transducer");
    spec.machine = *t;
  } else if (kind == "periodic") {
    spec.kind = EnvironmentSpec::Kind::periodic;
    for (const auto& item : detail::split_list(args)) {
      const auto parts = detail::split(item, ':');
      if (parts.size() != 2) throw std::invalid_argument("periodic item must be observation:reward");
      spec.cycle.push_back(
          {detail::index_of(alphabet.observations, parts[0], "observation"), detail::reward_index(alphabet, parts[1])});
    }
    if (spec.cycle.empty()) throw std::invalid_argument("periodic cycle is empty");
  } else if (kind == "judgment_day") {
    spec.kind = EnvironmentSpec::Kind::judgment_day;
    const auto parts = detail::split(args, ':');
    if (parts.size() < 2 || parts.size() > 3) throw std::invalid_argument("expected judgment_day:<action>:<k>[:<obs>]");
    const std::size_t chosen = detail::index_of(alphabet.actions, parts[0], "action");
    const std::size_t k = detail::parse_u64(parts[1]);
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    const std::size_t obs = parts.size() == 3 ? detail::index_of(alphabet.observations, parts[2], "observation") : 0;
    const std::vector<Perception> prefix(k - 1, Perception{obs, alphabet.reward_min_index()});
    spec.machine = judgment_day(chosen, k, prefix, alphabet, obs);
  } else {
    throw std::invalid_argument("unknown environment kind '" + kind + "'");
  }
  return spec;
}

/// A running environment: one perception per action, in order.
class Environment {
 public:
  explicit Environment(EnvironmentSpec spec) : spec_(std::move(spec)) {}

  Perception respond(std::size_t action) {
    if (spec_.kind == EnvironmentSpec::Kind::periodic) return spec_.cycle[step_++ % spec_.cycle.size()];
    if (action >= spec_.machine.actions) throw std::invalid_argument("unknown action");
    const auto& e = spec_.machine.at(state_, action);
    state_ = e.next;
    ++step_;
    return e.output;
  }

  const EnvironmentSpec& spec() const { return spec_; }

 private:
  EnvironmentSpec spec_;
  std::size_t state_ = 0;
  std::size_t step_ = 0;
};

inline EnvironmentFn make_environment(const EnvironmentSpec& spec) {
  auto env = std::make_shared<Environment>(spec);
  return [env](std::size_t, std::size_t action) { return env->respond(action); };
}

/// Perceptions the environment gives in answer to `actions` from a fresh start.
inline std::vector<Perception> replay(const EnvironmentSpec& spec, std::span<const std::size_t> actions) {
  Environment env(spec);
  std::vector<Perception> out;
  for (auto a : actions) out.push_back(env.respond(a));
  return out;
}

}  // namespace ucai::harness
