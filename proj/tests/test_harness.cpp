#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "support.hpp"
#include "ucai/harness/config.hpp"
#include "ucai/harness/expr.hpp"
#include "ucai/harness/oracle.hpp"
#include "ucai/harness/runner.hpp"

using namespace ucai;
using namespace ucai::harness;
using namespace ucai::testing;

namespace {

namespace fs = std::filesystem;

fs::path scratch_dir() {
  const fs::path d = fs::temp_directory_path() / ("ucai_harness_" + std::to_string(::getpid()));
  fs::create_directories(d);
  return d;
}

fs::path write_file(const std::string& name, const std::string& text) {
  const fs::path p = scratch_dir() / name;
  std::ofstream(p) << text;
  return p;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " \"" + UCAI_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::size_t error_line(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST(Config, DefaultsFromEmptyText) {
  const RunConfig c = parse_config("# nothing but a comment\n\n");
  EXPECT_EQ(c.alphabet.actions, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(c.horizon, 2U);
  EXPECT_EQ(c.prior, PriorKind::xi2);
  EXPECT_EQ(c.delta.value(), Rational(BigInt(1), pow2(64)));
  EXPECT_EQ(c.epsilon, Rational(1, 8));
  EXPECT_EQ(c.mode, DecisionMode::exact);
  EXPECT_TRUE(c.history.empty());
}

TEST(Config, ParsesEveryKey) {
  const RunConfig c = parse_config(
      "actions = left, right\nobservations = dark, light\nrewards = -1, 0, 1/2\nhorizon = 3\nprior = xi1\n"
      "delta = 2^-10\nepsilon = 0.25\nseed = 42\nsteps = 7\nmode = deadline\ndeadline_ms = 5\n"
      "environment = periodic:dark:0,light:1/2\nmax_len = 12\ndigit_budget = 64\nprecision = 40\nheader = gamma\n"
      "class_limit = 2\nidentity_rewards = true\nreward_scale = 1/16\nreward_shift = 1/8\n"
      "history = left:dark:-1, right:light:1/2\nfault_digit = 3\n");
  EXPECT_EQ(c.alphabet.rewards, (std::vector<Rational>{-1, 0, Rational(1, 2)}));
  EXPECT_EQ(c.delta.value(), Rational(1, 1024));
  EXPECT_EQ(c.epsilon, Rational(1, 4));
  EXPECT_EQ(c.header, HeaderCode::elias_gamma);
  ASSERT_EQ(c.history.size(), 2U);
  EXPECT_EQ(c.history[1], (Interaction{1, {1, 2}}));
  EXPECT_EQ(c.fault_digit, std::optional<std::size_t>(3));
  EXPECT_EQ(parse_config(serialize_config(c)), c);
}

TEST(Config, ErrorsCarryLineNumbers) {
  EXPECT_EQ(error_line("seed = 1\nhorizon = 0\n"), 2U);
  EXPECT_EQ(error_line("# c\nrewards = 1\n"), 2U);
  EXPECT_EQ(error_line("rewards = 1, 1\n"), 1U);
  EXPECT_EQ(error_line("seed = 1\nsede = 2\n"), 2U);
  EXPECT_EQ(error_line("seed = 1\nseed = 2\n"), 2U);
  EXPECT_EQ(error_line("\n\ndelta = 1\n"), 3U);
  EXPECT_EQ(error_line("epsilon = 1/2\n"), 1U);
  EXPECT_EQ(error_line("steps = many\n"), 1U);
  EXPECT_EQ(error_line("x\n"), 1U);
  EXPECT_EQ(error_line("seed = 1\nreward_scale = 1\n"), 2U);
  EXPECT_EQ(error_line("history = a:o:7\n"), 1U);
  EXPECT_EQ(error_line("environment = nowhere\n"), 1U);
  EXPECT_EQ(error_line("environment = judgment_day:z:1\n"), 1U);
}

TEST(Environment, KindsRespondAsWritten) {
  const Alphabet a{{"a", "b"}, {"x", "y"}, {0, 1}};
  const auto periodic = parse_environment("periodic:x:0,y:1", a, HeaderCode::unary);
  const std::vector<std::size_t> acts{0, 1, 0};
  EXPECT_EQ(replay(periodic, acts), (std::vector<Perception>{{0, 0}, {1, 1}, {0, 0}}));
  const auto machine = parse_environment("transducer:1" "11" "00", a, HeaderCode::unary);
  EXPECT_EQ(replay(machine, acts), (std::vector<Perception>{{1, 1}, {0, 0}, {1, 1}}));
  const auto jd = parse_environment("judgment_day:b:2", a, HeaderCode::unary);
  const auto out = replay(jd, std::vector<std::size_t>{0, 1, 0});
  EXPECT_EQ(out[0].reward, 0U);
  EXPECT_EQ(out[1].reward, 1U);
  EXPECT_EQ(out[2].reward, 1U);
  EXPECT_THROW(parse_environment("transducer:0", a, HeaderCode::unary), std::invalid_argument);
}

TEST(Trace, JsonRoundTripAndReplay) {
  RunConfig cfg = parse_config("steps = 3\nseed = 5\n");
  std::ostringstream out;
  const RunSummary s = run(cfg, &out);
  ASSERT_EQ(s.steps, 3U);
  std::istringstream in(out.str());
  std::string line;
  std::vector<TraceRecord> parsed;
  while (std::getline(in, line)) {
    const auto r = parse_record(line);
    EXPECT_EQ(to_json_line(r), line);
    parsed.push_back(r);
  }
  ASSERT_EQ(parsed.size(), 3U);
  EXPECT_EQ(parsed[0].q.size(), 2U);
  EXPECT_TRUE(replay_matches(cfg, parsed));
  parsed[1].reward = parsed[1].reward == 0 ? 1 : 0;
  EXPECT_FALSE(replay_matches(cfg, parsed));
}

TEST(Trace, RunsAreByteIdentical) {
  const RunConfig cfg = parse_config("steps = 4\nseed = 11\nhorizon = 2\n");
  std::ostringstream a, b;
  run(cfg, &a);
  run(cfg, &b);
  EXPECT_FALSE(a.str().empty());
  EXPECT_EQ(a.str(), b.str());
}

TEST(Trace, DeadlineRecordsCarryCandidates) {
  const RunConfig cfg = parse_config("steps = 2\nmode = deadline\ndeadline_ms = 2000\nseed = 3\n");
  const RunSummary s = run(cfg);
  for (const auto& r : s.records) {
    EXPECT_EQ(r.mode, DecisionMode::deadline);
    EXPECT_FALSE(r.candidates.empty());
    EXPECT_NE(std::ranges::find(r.candidates, r.action), r.candidates.end());
  }
}

TEST(OracleCheck, PassesAndCatchesAnInjectedFault) {
  RunConfig cfg = parse_config("horizon = 1\nmax_len = 21\nseed = 3\ndelta = 1/2\nhistory = a:o:1\n");
  const OracleReport ok = oracle_check(cfg);
  EXPECT_TRUE(ok.passed) << ok.summary(cfg.alphabet);
  EXPECT_GT(ok.evaluations, 0U);
  EXPECT_LE(ok.max_deviation, ok.rows[0].tolerance);

  cfg.fault_digit = 1;
  const OracleReport bad = oracle_check(cfg);
  EXPECT_FALSE(bad.passed);
  EXPECT_FALSE(bad.failure.empty());
}

TEST(OracleCheck, ExactWithClassLimit) {
  const RunConfig cfg =
      parse_config("observations = x, y\nhorizon = 2\nmax_len = 14\nclass_limit = 2\ndelta = 1/2\nprecision = 40\n");
  const OracleReport r = oracle_check(cfg);
  EXPECT_TRUE(r.passed) << r.summary(cfg.alphabet);
  EXPECT_EQ(r.tail_bound, 0);
}

TEST(Expr, ParsesOperationsAndLiterals) {
  EXPECT_TRUE(within(value_of(parse_expression("add(1/3, neg(1/5))"), 40), Rational(2, 15), 38));
  EXPECT_TRUE(within(value_of(parse_expression("mul(-1/2, abs(-1/3))"), 40), Rational(-1, 6), 38));
  EXPECT_TRUE(within(value_of(parse_expression("max(1/7, 2/9, avg(1, 0))"), 40), Rational(1, 2), 38));
  EXPECT_EQ(value_of(parse_expression("[+-+]"), 10), Rational(3, 8));
  EXPECT_TRUE(within(value_of(parse_expression("double(3/8)"), 40), Rational(3, 4), 38));
  EXPECT_THROW(parse_expression("add(1/3)"), std::invalid_argument);
  EXPECT_THROW(parse_expression("pow(1, 1/2)"), std::invalid_argument);
  EXPECT_THROW(parse_expression("4/3"), std::invalid_argument);
}

TEST(Cli, ExitCodes) {
  const auto good = write_file("good.cfg", "steps = 2\nseed = 1\n");
  EXPECT_EQ(run_cli("run --config " + good.string()), 0);
  EXPECT_EQ(run_cli("run --config " + write_file("bad.cfg", "horizon = 0\n").string()), 2);
  EXPECT_EQ(run_cli("run --config " + (scratch_dir() / "missing.cfg").string()), 2);
  const auto tie = write_file("tie.cfg", "prior = xi1\nhorizon = 1\nmax_len = 21\ndigit_budget = 64\nsteps = 1\n");
  EXPECT_EQ(run_cli("run --config " + tie.string()), 3);
  const auto fault = write_file("fault.cfg", "horizon = 1\nmax_len = 21\ndelta = 1/2\nfault_digit = 1\n");
  EXPECT_EQ(run_cli("oracle-check --config " + fault.string()), 4);
  const auto clean = write_file("clean.cfg", "horizon = 1\nmax_len = 21\ndelta = 1/2\n");
  EXPECT_EQ(run_cli("oracle-check --config " + clean.string()), 0);
  EXPECT_EQ(run_cli("digits --expr 'add(1/3, 1/5)' --n 12"), 0);
  EXPECT_NE(run_cli("digits --expr 'add(1/3' --n 12"), 0);
}

TEST(Cli, SeedFlagBeatsEnvironment) {
  const auto cfg = write_file("seeded.cfg", "steps = 2\nprecision = 48\n");
  const auto dir = scratch_dir();
  auto trace = [&](const std::string& name, const std::string& extra, const std::string& env) {
    const auto p = dir / name;
    EXPECT_EQ(run_cli("run --config " + cfg.string() + " --trace " + p.string() + extra, env), 0);
    return read_file(p);
  };
  const std::string by_flag = trace("flag.jsonl", " --seed 77", "UCAI_SEED=5");
  const std::string by_env = trace("env.jsonl", "", "UCAI_SEED=77");
  const std::string other_env = trace("other.jsonl", "", "UCAI_SEED=5");
  const std::string flag_only = trace("flag_only.jsonl", " --seed 77", "");
  EXPECT_EQ(by_flag, by_env);
  EXPECT_EQ(by_flag, flag_only);
  EXPECT_NE(by_flag, other_env);
  EXPECT_EQ(run_cli("run --config " + cfg.string(), "UCAI_SEED=notanumber"), 2);
}
