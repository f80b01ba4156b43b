#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ucai/harness/config.hpp"
#include "ucai/harness/expr.hpp"
#include "ucai/harness/oracle.hpp"
#include "ucai/harness/runner.hpp"

namespace {

using namespace ucai;
using namespace ucai::harness;

constexpr const char* seed_env = "UCAI_SEED";

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed, const std::string& mode,
            std::optional<std::size_t> deadline_ms, const std::string& trace_path) {
  RunConfig cfg = load_config(config_path);
  if (seed) {
    cfg.seed = *seed;
  } else if (const char* env = std::getenv(seed_env)) {
    try {
      cfg.seed = harness::detail::parse_u64(env);
    } catch (const std::exception& e) {
      throw ConfigError(0, std::string(seed_env) + ": " + e.what());
    }
  }
  if (mode == "exact") cfg.mode = DecisionMode::exact;
  else if (mode == "deadline") cfg.mode = DecisionMode::deadline;
  if (deadline_ms) cfg.deadline_ms = *deadline_ms;

  std::ofstream trace_file;
  std::ostream* trace = nullptr;
  if (!trace_path.empty()) {
    trace_file.open(trace_path, std::ios::binary | std::ios::trunc);
    if (!trace_file) throw std::runtime_error("cannot open trace file '" + trace_path + "'");
    trace = &trace_file;
  }
  const RunSummary s = run(cfg, trace);
  std::cout << "steps: " << s.steps << "\n"
            << "mean reward: " << harness::detail::rational_str(s.mean_reward) << " (~" << s.mean_reward.convert_to<double>()
            << ")\n"
            << "max digits consumed: " << s.max_digits_consumed << "\n";
  return exit_ok;
}

int cmd_oracle(const std::string& config_path) {
  const RunConfig cfg = load_config(config_path);
  const OracleReport report = oracle_check(cfg);
  std::cout << report.summary(cfg.alphabet);
  return report.passed ? exit_ok : exit_oracle_mismatch;
}

int cmd_digits(const std::string& expr, std::size_t n) {
  const DigitStream x = parse_expression(expr);
  const Approximation a = interpret_prefix(x, n);
  std::cout << to_signed_string(x, n) << "\n" << a.str() << "\n";
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact-real universal agent: runs, oracle checks and digit printing"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string mode;
  std::optional<std::size_t> deadline_ms;
  std::string trace_path;
  auto* run_cmd = app.add_subcommand("run", "run an episode");
  run_cmd->add_option("--config", config_path, "config file")->required();
  run_cmd->add_option("--seed", seed, "seed (overrides config and " + std::string(seed_env) + ")");
  run_cmd->add_option("--mode", mode, "exact or deadline")->check(CLI::IsMember({"exact", "deadline"}));
  run_cmd->add_option("--deadline-ms", deadline_ms, "deadline per decision in milliseconds");
  run_cmd->add_option("--trace", trace_path, "trace output (one JSON record per line)");

  std::string oracle_config;
  auto* oracle_cmd = app.add_subcommand("oracle-check", "compare stream Q values with the brute-force oracle");
  oracle_cmd->add_option("--config", oracle_config, "config file")->required();

  std::string expr;
  std::size_t n = 32;
  auto* digits_cmd = app.add_subcommand("digits", "print the leading digits of an expression");
  digits_cmd->add_option("--expr", expr, "expression, e.g. add(1/3, neg(1/5))")->required();
  digits_cmd->add_option("--n", n, "digit count");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*run_cmd) return cmd_run(config_path, seed, mode, deadline_ms, trace_path);
    if (*oracle_cmd) return cmd_oracle(oracle_config);
    return cmd_digits(expr, n);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return exit_config_error;
  } catch (const UndecidedComparison& e) {
    std::cerr << "undecided: " << e.what() << " (actions " << e.first_index << " and " << e.second_index
              << " tied after " << e.digits_scanned << " digits)\n";
    return exit_undecided;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_failure;
  }
}
