// Episode execution from a RunConfig, with trace output and exit codes.
#pragma once

#include <chrono>
#include <optional>
#include <ostream>
#include <string>

#include "ucai/harness/config.hpp"
#include "ucai/harness/environments.hpp"
#include "ucai/harness/trace.hpp"
#include "ucai/planner.hpp"

namespace ucai::harness {

enum ExitCode : int {
  exit_ok = 0,
  exit_failure = 1,
  exit_config_error = 2,
  exit_undecided = 3,
  exit_oracle_mismatch = 4,
};

struct RunSummary {
  std::size_t steps = 0;
  Rational mean_reward = 0;
  std::size_t max_digits_consumed = 0;
  std::vector<TraceRecord> records;
};

/// Runs the configured episode. Each record is written to `trace` (if any)
/// as soon as its step completes, so a failing step leaves the earlier ones.
inline RunSummary run(const RunConfig& cfg, std::ostream* trace = nullptr) {
  const EnvironmentSpec spec = parse_environment(cfg.environment, cfg.alphabet, cfg.header);
  Agent agent(cfg.alphabet, cfg.agent_params());
  SelectOptions options;
  options.mode = cfg.mode;
  options.deadline = std::chrono::milliseconds(cfg.deadline_ms);
  options.tie_seed = cfg.seed;

  RunSummary summary;
  Rational reward_sum = 0;
  run_episode(agent, make_environment(spec), cfg.steps, options, [&](const EpisodeStep& s) {
    TraceRecord r = make_record(s, cfg.alphabet, cfg.precision);
    if (trace) *trace << to_json_line(r) << "\n" << std::flush;
    reward_sum += r.reward;
    for (auto d : r.digits_consumed) summary.max_digits_consumed = std::max(summary.max_digits_consumed, d);
    if (r.mode == DecisionMode::deadline)
      summary.max_digits_consumed = std::max(summary.max_digits_consumed, r.candidate_precision);
    summary.records.push_back(std::move(r));
  });
  summary.steps = summary.records.size();
  if (summary.steps) summary.mean_reward = reward_sum / static_cast<long long>(summary.steps);
  return summary;
}

/// Whether the recorded actions, fed to the environment, give back the
/// recorded perceptions.
inline bool replay_matches(const RunConfig& cfg, const std::vector<TraceRecord>& records) {
  const EnvironmentSpec spec = parse_environment(cfg.environment, cfg.alphabet, cfg.header);
  Environment env(spec);
  for (const auto& r : records) {
    const auto e = env.respond(detail::index_of(cfg.alphabet.actions, r.action, "action"));
    if (cfg.alphabet.observations[e.observation] != r.observation || cfg.alphabet.rewards[e.reward] != r.reward)
      return false;
  }
  return true;
}

}  // namespace ucai::harness
