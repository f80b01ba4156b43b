#include <gtest/gtest.h>

#include <random>

#include "support.hpp"
#include "ucai/harness/oracle.hpp"
#include "ucai/planner.hpp"

using namespace ucai;
using namespace ucai::testing;

namespace {

Rational rat(long long p, long long q) { return Rational(p, q); }

Alphabet binary_alphabet() { return {{"a", "b"}, {"x", "y"}, {rat(0, 1), rat(1, 1)}}; }
Alphabet blind_alphabet() { return {{"a", "b"}, {"o"}, {rat(0, 1), rat(1, 1)}}; }

AgentParams params(PriorKind prior, std::size_t max_len, std::size_t horizon, std::uint64_t seed = 1,
                   std::optional<std::size_t> class_limit = {}) {
  AgentParams p;
  p.model.prior = prior;
  p.model.delta = {1, 1};
  p.model.seed = seed;
  p.model.max_len = max_len;
  p.model.class_limit = class_limit;
  p.horizon = HorizonFn(horizon);
  return p;
}

History random_history(std::mt19937_64& rng, const Alphabet& a, std::size_t len) {
  History h;
  for (std::size_t i = 0; i < len; ++i)
    h.push_back({rng() % a.actions.size(), {rng() % a.observations.size(), rng() % a.rewards.size()}});
  return h;
}

}  // namespace

TEST(NormalizeRewards, MapsExtremesIntoTheBand) {
  const auto n = normalize_rewards({rat(0, 1), rat(1, 1)}, 4, rat(1, 8));
  EXPECT_EQ(n.mapped, (std::vector<Rational>{rat(1, 32), rat(7, 32)}));
  const auto m = normalize_rewards({rat(-1, 1), rat(0, 1), rat(1, 1)}, 2, rat(1, 4));
  EXPECT_EQ(m.mapped, (std::vector<Rational>{rat(1, 8), rat(1, 4), rat(3, 8)}));
  EXPECT_EQ(m.apply(rat(1, 2)), rat(5, 16));
}

TEST(NormalizeRewards, IdentityWhenAlreadyInterior) {
  const std::vector<Rational> r{rat(1, 4), rat(1, 3)};
  EXPECT_EQ(normalize_rewards(r, 2, rat(1, 8), true).mapped, r);
  EXPECT_NE(normalize_rewards(r, 2, rat(1, 8), false).mapped, r);
  // 1/2 is not inside (1/16, 7/16), so the map applies.
  EXPECT_NE(normalize_rewards({rat(1, 4), rat(1, 2)}, 2, rat(1, 8), true).mapped[1], rat(1, 2));
}

TEST(NormalizeRewards, RejectsDegenerateInputs) {
  EXPECT_THROW(normalize_rewards({rat(1, 1), rat(1, 1)}, 2, rat(1, 8)), std::invalid_argument);
  EXPECT_THROW(normalize_rewards({rat(0, 1), rat(1, 1)}, 0, rat(1, 8)), std::invalid_argument);
  EXPECT_THROW(normalize_rewards({rat(0, 1), rat(1, 1)}, 2, rat(1, 2)), std::invalid_argument);
  EXPECT_THROW(normalize_rewards({}, 2, rat(1, 8)), std::invalid_argument);
}

TEST(AffineRewards, ValidatesTheOpenInterval) {
  EXPECT_NO_THROW(affine_rewards({rat(0, 1), rat(1, 1)}, 2, rat(1, 4), rat(1, 8)));
  EXPECT_THROW(affine_rewards({rat(0, 1), rat(1, 1)}, 2, rat(1, 4), rat(0, 1)), std::invalid_argument);
  EXPECT_THROW(affine_rewards({rat(0, 1), rat(1, 1)}, 2, rat(1, 2), rat(1, 8)), std::invalid_argument);
  EXPECT_THROW(affine_rewards({rat(0, 1), rat(1, 1)}, 2, rat(-1, 4), rat(3, 8)), std::invalid_argument);
}

TEST(HorizonFn, FixedAndCustom) {
  const HorizonFn h(3);
  EXPECT_EQ(h(1), 3U);
  EXPECT_EQ(h.lookahead(7), 3U);
  EXPECT_THROW(HorizonFn(0), std::invalid_argument);
  const HorizonFn grow([](std::size_t k) { return 2 * k; });
  EXPECT_EQ(grow.lookahead(3), 4U);
  const HorizonFn bad([](std::size_t k) { return k - 1; });
  EXPECT_THROW(bad(2), std::invalid_argument);
}

TEST(SumBounded, MatchesRationalSum) {
  std::mt19937_64 rng(2);
  for (std::size_t count = 1; count <= 9; ++count) {
    std::vector<DigitStream> xs;
    Rational total = 0;
    for (std::size_t i = 0; i < count; ++i) {
      const Rational v(static_cast<long long>(rng() % 1000), 1000 * static_cast<long long>(count));
      total += v;
      xs.push_back(from_rational(v));
    }
    EXPECT_TRUE(within(value_of(detail::sum_bounded(xs), 50), total, 40)) << count;
  }
  EXPECT_TRUE(within(value_of(detail::sum_bounded({}), 10), 0, 10));
}

TEST(MixtureModel, RejectsBadParameters) {
  ModelParams p;
  p.max_len = 14;
  p.delta = {0, 0};
  EXPECT_THROW(MixtureModel(binary_alphabet(), p), std::invalid_argument);
  p.delta = {1, 0};
  EXPECT_THROW(MixtureModel(binary_alphabet(), p), std::invalid_argument);
  p.delta = {1, 2};
  p.class_limit = 0;
  EXPECT_THROW(MixtureModel(binary_alphabet(), p), std::invalid_argument);
  p.class_limit.reset();
  p.max_len = 60;
  EXPECT_THROW(MixtureModel(binary_alphabet(), p), std::invalid_argument);
}

TEST(MixtureModel, MassMatchesOracleWithClassLimit) {
  std::mt19937_64 rng(4);
  for (auto prior : {PriorKind::xi1, PriorKind::xi2}) {
    const auto p = params(prior, 14, 1, 9, 2);
    MixtureModel model(binary_alphabet(), p.model);
    harness::BruteForceOracle oracle(binary_alphabet(), p.model);
    for (int t = 0; t < 10; ++t) {
      const auto h = random_history(rng, binary_alphabet(), rng() % 5);
      const Rational tol = two_pow_neg(40) + oracle.weight_error();
      EXPECT_LE(abs(value_of(model.mass(h), 40) - oracle.mass(h)), tol) << to_string(prior);
    }
  }
}

TEST(MixtureModel, MassPartitionsOverPerceptions) {
  std::mt19937_64 rng(6);
  MixtureModel model(blind_alphabet(), params(PriorKind::xi2, 21, 1).model);
  for (int t = 0; t < 6; ++t) {
    const auto h = random_history(rng, blind_alphabet(), rng() % 4);
    const std::size_t a = rng() % 2;
    Rational parts = 0;
    for (std::size_t r = 0; r < 2; ++r) {
      auto ext = h;
      ext.push_back({a, {0, r}});
      parts += value_of(model.mass(ext), 36);
    }
    EXPECT_TRUE(within(value_of(model.mass(h), 36), parts, 30));
  }
}

TEST(MixtureModel, ConsistentCountMatchesProgramList) {
  std::mt19937_64 rng(8);
  MixtureModel model(binary_alphabet(), params(PriorKind::xi1, 14, 1).model);
  for (int t = 0; t < 8; ++t) {
    const auto h = random_history(rng, binary_alphabet(), rng() % 4);
    const auto live = model.consistent_programs(h);
    std::map<std::size_t, BigInt> per_class;
    for (auto i : live) per_class[model.enumeration().programs[i].machine.states] += 1;
    for (std::size_t n = 1; n <= 2; ++n) EXPECT_EQ(model.consistent_count(h, n), per_class[n]);
  }
}

TEST(Agent, QValuesMatchOracle) {
  std::mt19937_64 rng(10);
  for (std::size_t horizon : {1U, 2U}) {
    const auto p = params(PriorKind::xi2, 14, horizon, 5, 2);
    Agent agent(binary_alphabet(), p);
    harness::BruteForceOracle oracle(binary_alphabet(), p.model);
    for (int t = 0; t < 3; ++t) {
      const auto h = random_history(rng, binary_alphabet(), rng() % 3);
      const auto rewards = agent.rewards_for(horizon);
      for (std::size_t a = 0; a < 2; ++a) {
        const Rational expect = oracle.q_value(h, a, rewards);
        const Rational got = value_of(agent.q_value(h, a), 34);
        EXPECT_LE(abs(got - expect), two_pow_neg(32) + oracle.weight_error()) << "H=" << horizon;
        EXPECT_GE(got + two_pow_neg(34), 0);
        EXPECT_LT(got, 1);
      }
    }
  }
}

TEST(Agent, SingleProgramClassGivesScaledReturn) {
  // |A| = |O| = 1 and one state: the two programs answer reward 0 or 1 forever.
  const Alphabet a{{"a"}, {"o"}, {rat(0, 1), rat(1, 1)}};
  auto p = params(PriorKind::xi1, 2, 3, 1, 1);
  Agent agent(a, p);
  const History h{{0, {0, 1}}};
  // Only the reward-1 program survives; its weight is 2^-2.
  const Rational expect = 3 * agent.rewards_for(3).mapped[1] * rat(1, 4);
  EXPECT_TRUE(within(value_of(agent.q_value(h, 0), 40), expect, 38));
}

TEST(Agent, SingleActionNeedsNoComparison) {
  const Alphabet a{{"a"}, {"o"}, {rat(0, 1), rat(1, 1)}};
  Agent agent(a, params(PriorKind::xi1, 16, 2));
  const auto d = agent.select_action({});
  EXPECT_EQ(d.action, 0U);
  EXPECT_TRUE(d.digits_consumed.empty());
}

TEST(Agent, SymmetricUnperturbedPriorIsUndecided) {
  auto p = params(PriorKind::xi1, 21, 1);
  p.digit_budget = 96;
  Agent agent(blind_alphabet(), p);
  EXPECT_THROW(agent.select_action({}), UndecidedComparison);
}

TEST(Agent, PerturbedPriorDecidesAndAgreesWithOracle) {
  auto p = params(PriorKind::xi2, 21, 1, 3, 3);
  Agent agent(blind_alphabet(), p);
  const auto d = agent.select_action({});
  ASSERT_EQ(d.digits_consumed.size(), 1U);
  EXPECT_LE(d.digits_consumed[0], p.digit_budget);
  harness::BruteForceOracle oracle(blind_alphabet(), p.model);
  const auto rewards = agent.rewards_for(1);
  const Rational q0 = oracle.q_value({}, 0, rewards), q1 = oracle.q_value({}, 1, rewards);
  ASSERT_NE(q0, q1);
  EXPECT_EQ(d.action, q0 > q1 ? 0U : 1U);
}

TEST(Agent, DeadlineCandidatesShrinkAndKeepTheMaximiser) {
  auto p = params(PriorKind::xi2, 21, 1, 3, 3);
  Agent agent(blind_alphabet(), p);
  const auto exact = agent.select_action({});
  const auto d = agent.select_action({}, {DecisionMode::deadline, std::chrono::milliseconds(10000), 7});
  ASSERT_FALSE(d.levels.empty());
  EXPECT_EQ(d.levels.front().candidates, (std::vector<std::size_t>{0, 1}));
  for (std::size_t i = 1; i < d.levels.size(); ++i) {
    EXPECT_GT(d.levels[i].precision, d.levels[i - 1].precision);
    for (auto c : d.levels[i].candidates)
      EXPECT_TRUE(std::ranges::find(d.levels[i - 1].candidates, c) != d.levels[i - 1].candidates.end());
  }
  for (const auto& l : d.levels) EXPECT_TRUE(std::ranges::find(l.candidates, exact.action) != l.candidates.end());
  EXPECT_EQ(d.levels.back().candidates.size(), 1U);
  EXPECT_EQ(d.action, exact.action);

  const auto none = agent.select_action({}, {DecisionMode::deadline, std::chrono::milliseconds(0), 7});
  EXPECT_EQ(none.levels.size(), 1U);
  EXPECT_LT(none.action, 2U);
}

TEST(RunEpisode, ZeroStepsAndFailures) {
  Agent agent(blind_alphabet(), params(PriorKind::xi2, 16, 1));
  EXPECT_TRUE(run_episode(agent, [](std::size_t, std::size_t) { return Perception{0, 0}; }, 0).empty());
  try {
    run_episode(agent,
                [](std::size_t step, std::size_t) {
                  if (step == 2) throw std::runtime_error("unplugged");
                  return Perception{0, 1};
                },
                4);
    FAIL() << "expected EpisodeError";
  } catch (const EpisodeError& e) {
    EXPECT_EQ(e.step(), 2U);
  }
  EXPECT_THROW(run_episode(agent, [](std::size_t, std::size_t) { return Perception{1, 0}; }, 1), EpisodeError);
}

TEST(RunEpisode, DeterministicAndObserved) {
  auto env = [](std::size_t, std::size_t a) { return Perception{0, a}; };
  std::vector<std::size_t> first, second;
  {
    Agent agent(blind_alphabet(), params(PriorKind::xi2, 16, 2, 4));
    std::size_t seen = 0;
    for (const auto& s : run_episode(agent, env, 3, {}, [&](const EpisodeStep&) { ++seen; })) first.push_back(s.action);
    EXPECT_EQ(seen, 3U);
  }
  {
    Agent agent(blind_alphabet(), params(PriorKind::xi2, 16, 2, 4));
    for (const auto& s : run_episode(agent, env, 3)) second.push_back(s.action);
  }
  EXPECT_EQ(first, second);
}

TEST(RunEpisode, ContradictedProgramsLoseMass) {
  Agent agent(blind_alphabet(), params(PriorKind::xi1, 16, 1));
  const History h1{{0, {0, 1}}};
  const History h2{{0, {0, 1}}, {0, {0, 0}}};
  const Rational m0 = value_of(agent.model().mass({}), 40);
  const Rational m1 = value_of(agent.model().mass(h1), 40);
  const Rational m2 = value_of(agent.model().mass(h2), 40);
  EXPECT_LT(m1, m0);
  EXPECT_LT(m2, m1);
  EXPECT_GT(m2, 0);
}
