// One JSON object per line, one line per interaction step.
#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ucai/harness/text.hpp"
#include "ucai/planner.hpp"

namespace ucai::harness {

struct TraceRecord {
  std::size_t step = 0;
  std::string action;
  std::string observation;
  Rational reward;
  std::size_t precision = 0;
  std::vector<std::pair<std::string, Approximation>> q;
  DecisionMode mode = DecisionMode::exact;
  std::vector<std::size_t> digits_consumed;
  std::vector<std::string> candidates;  // deadline mode: most precise argmax set
  std::size_t candidate_precision = 0;
};

inline TraceRecord make_record(const EpisodeStep& s, const Alphabet& alphabet, std::size_t precision) {
  TraceRecord r;
  r.step = s.step;
  r.action = alphabet.actions[s.action];
  r.observation = alphabet.observations[s.perception.observation];
  r.reward = alphabet.rewards[s.perception.reward];
  r.precision = precision;
  for (std::size_t a = 0; a < s.decision.q.size(); ++a)
    r.q.emplace_back(alphabet.actions[a], interpret_prefix(s.decision.q[a], precision));
  r.mode = s.decision.mode;
  r.digits_consumed = s.decision.digits_consumed;
  if (!s.decision.levels.empty()) {
    for (auto c : s.decision.levels.back().candidates) r.candidates.push_back(alphabet.actions[c]);
    r.candidate_precision = s.decision.levels.back().precision;
  }
  return r;
}

inline std::string to_json_line(const TraceRecord& r) {
  nlohmann::ordered_json j;
  j["step"] = r.step;
  j["action"] = r.action;
  j["observation"] = r.observation;
  j["reward"] = detail::rational_str(r.reward);
  j["precision"] = r.precision;
  nlohmann::ordered_json q = nlohmann::ordered_json::array();
  for (const auto& [a, approx] : r.q) q.push_back({{"action", a}, {"value", approx.str()}});
  j["q"] = q;
  j["mode"] = to_string(r.mode);
  j["digits_consumed"] = r.digits_consumed;
  if (r.mode == DecisionMode::deadline) {
    j["candidates"] = r.candidates;
    j["candidate_precision"] = r.candidate_precision;
  }
  return j.dump();
}

inline Approximation parse_approximation(const std::string& s) {
  const auto pos = s.find("/2^");
  if (pos == std::string::npos) throw std::invalid_argument("expected p/2^n, got '" + s + "'");
  return {BigInt(s.substr(0, pos)), static_cast<std::size_t>(std::stoul(s.substr(pos + 3)))};
}

inline TraceRecord parse_record(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  TraceRecord r;
  r.step = j.at("step").get<std::size_t>();
  r.action = j.at("action").get<std::string>();
  r.observation = j.at("observation").get<std::string>();
  r.reward = detail::parse_rational(j.at("reward").get<std::string>());
  r.precision = j.at("precision").get<std::size_t>();
  for (const auto& q : j.at("q")) r.q.emplace_back(q.at("action").get<std::string>(), parse_approximation(q.at("value")));
  r.mode = j.at("mode").get<std::string>() == "exact" ? DecisionMode::exact : DecisionMode::deadline;
  r.digits_consumed = j.at("digits_consumed").get<std::vector<std::size_t>>();
  if (j.contains("candidates")) {
    r.candidates = j.at("candidates").get<std::vector<std::string>>();
    r.candidate_precision = j.at("candidate_precision").get<std::size_t>();
  }
  return r;
}

}  // namespace ucai::harness
