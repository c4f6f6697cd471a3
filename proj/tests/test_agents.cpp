#include <gtest/gtest.h>

#include "support.hpp"

using namespace tmw;
using namespace tmw::test;

namespace {

std::shared_ptr<const ScriptedWorld::Table> table(std::initializer_list<std::pair<std::vector<std::string>, std::string>> rows) {
  auto t = std::make_shared<ScriptedWorld::Table>();
  for (const auto& [h, p] : rows) {
    std::vector<Letter> k;
    for (const auto& x : h) k.push_back(L(x));
    (*t)[k] = L(p);
  }
  return t;
}

Caps small_caps(std::uint32_t games, std::uint32_t cap, bool reset = true) {
  Caps c;
  c.life_games = games;
  c.game_big_step_cap = cap;
  c.reset_world_each_game = reset;
  return c;
}

Rational tail_success(const LifeRecord& life, std::size_t from) {
  OutcomeCounts c;
  for (std::size_t i = from; i < life.games.size(); ++i) c.add(life.games[i].outcome);
  return success(c);
}

}  // namespace

TEST(Random, RoughlyUniformAndSeeded) {
  RandomAgent x(A(), 4), y(A(), 4);
  int as = 0;
  for (int i = 0; i < 10000; ++i) {
    Letter l = x.act();
    EXPECT_EQ(l, y.act());
    as += l == L("a");
  }
  EXPECT_NEAR(as / 10000.0, 0.5, 0.03);
}

TEST(Td1, RepeatsWinningGame) {
  ScriptedWorld w(A(), table({{{"a"}, "o1"}, {{"a", "a"}, "loss"}, {{"a", "b"}, "victory"}, {{"b"}, "loss"}}));
  Td1 ag(A(), 3);
  auto life = play_life(ag, w, small_caps(200, 5), 1);
  std::size_t first = life.games.size();
  for (std::size_t i = 0; i < life.games.size(); ++i)
    if (life.games[i].outcome == Outcome::Victory) {
      first = i;
      break;
    }
  ASSERT_LT(first, 50u);
  for (std::size_t i = first; i < life.games.size(); ++i) EXPECT_EQ(life.games[i].outcome, Outcome::Victory);
  EXPECT_TRUE(ag.replaying());
  EXPECT_FALSE(ag.diverged());
}

TEST(Td1, NoVictoryKeepsRandom) {
  Td1 ag(A(), 3);
  auto life = play_life(ag, WorldRun(sample("always_loss.tm")), small_caps(50, 5), 1);
  EXPECT_EQ(life.counts.n_loss, 50u);
  EXPECT_FALSE(ag.replaying());
}

TEST(Td1, CoinWorldDiverges) {
  Td1 ag(A(), 3);
  auto life = play_life(ag, WorldRun(sample("coin.tm")), small_caps(100, 5), 7);
  EXPECT_GT(life.counts.n_victory, 0u);
  EXPECT_TRUE(ag.diverged());
}

TEST(Td2, ReachesMaxSumValueOnBehaviors) {
  const Caps c = small_caps(500, 2);
  std::size_t checked = 0;
  for (const auto& t : all_behaviors(A(), 2)) {
    ScriptedWorld w(A(), std::make_shared<const ScriptedWorld::Table>(t));
    Rational best = max_sum(build_tree_of_this_game(w, c)).root_value();
    Td2 ag(A(), 1);
    auto life = play_life(ag, w, c, 1);
    EXPECT_EQ(payoff(life.games.back().outcome), best);
    EXPECT_LE(ag.strategies_tried(), 6u);  // a; b; aa ab ba bb at most
    ++checked;
  }
  EXPECT_EQ(checked, 441u);
}

TEST(Td2, DrawOnlyWorldTriesEverythingThenDraws) {
  Td2 ag(A(), 1);
  auto life = play_life(ag, WorldRun(sample("never_final.tm")), small_caps(10, 2), 1);
  EXPECT_EQ(ag.strategies_tried(), 4u);
  EXPECT_EQ(ag.phase(), Td2::Phase::Drawing);
  EXPECT_EQ(life.counts.n_draw, 10u);
}

TEST(Td2, LossOnlyWorldTurnsRandom) {
  Td2 ag(A(), 1);
  play_life(ag, WorldRun(sample("always_loss.tm")), small_caps(10, 3), 1);
  EXPECT_EQ(ag.strategies_tried(), 2u);
  EXPECT_EQ(ag.phase(), Td2::Phase::Random);
}

TEST(Td2, WinsOnKthStrategy) {
  // only b, a, b wins; depth-first order tries a.., then b a a, then b a b
  ScriptedWorld w(A(), table({{{"a"}, "loss"}, {{"b"}, "o1"}, {{"b", "a"}, "o2"}, {{"b", "b"}, "loss"},
                              {{"b", "a", "a"}, "loss"}, {{"b", "a", "b"}, "victory"}}));
  Td2 ag(A(), 1);
  auto life = play_life(ag, w, small_caps(10, 5), 1);
  EXPECT_EQ(ag.strategies_tried(), 3u);
  EXPECT_EQ(ag.phase(), Td2::Phase::Winning);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(life.games[i].outcome, Outcome::Loss);
  for (std::size_t i = 2; i < 10; ++i) EXPECT_EQ(life.games[i].outcome, Outcome::Victory);
}

TEST(Td3, LearnsDeterministicWorld) {
  Td3 ag(A(), 100, 5);
  auto life = play_life(ag, WorldRun(sample("remember_a.tm")), small_caps(150, 10), 2);
  for (std::size_t i = 100; i < 150; ++i) EXPECT_EQ(life.games[i].outcome, Outcome::Victory);
}

TEST(Td3, ZeroBudgetPlaysLowestAction) {
  Td3 ag(A(), 0, 5);
  EXPECT_EQ(ag.act(), L("a"));
}

TEST(Td3, CoinEstimate) {
  Td3 ag(A(), 500, 5);
  play_life(ag, WorldRun(sample("coin.tm")), small_caps(500, 10), 3);
  EXPECT_NEAR(ag.tree().action_value(0, L("a")), 0.5, 0.05);
  EXPECT_DOUBLE_EQ(ag.tree().action_value(0, L("b")), 0.5);
}

TEST(Td4, FullCourageIsRandom) {
  Td4 t(A(), Rational(1), 9);
  RandomAgent r(A(), 9);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_EQ(t.act(), r.act());
    t.observe(L("draw"));
  }
  EXPECT_EQ(t.experiments(), t.steps());
}

TEST(Td4, ScheduleShrinks) {
  EXPECT_DOUBLE_EQ(td4_experiment_probability(Rational(1), 1000), 1.0);
  EXPECT_DOUBLE_EQ(td4_experiment_probability(Rational(1, 20), 1), 4.0 / 19.0);
  for (std::uint64_t g = 1; g < 1000; ++g)
    EXPECT_GE(td4_experiment_probability(Rational(1, 20), g), td4_experiment_probability(Rational(1, 20), g + 1));
  EXPECT_THROW(Td4(A(), Rational(0), 1), Error);
}

TEST(Td4, LessCourageFewerExperiments) {
  Td4 bold(A(), Rational(1, 2), 1), shy(A(), Rational(1, 100), 1);
  play_life(bold, WorldRun(sample("remember_a.tm")), small_caps(300, 10), 1);
  play_life(shy, WorldRun(sample("remember_a.tm")), small_caps(300, 10), 1);
  EXPECT_LT(static_cast<double>(shy.experiments()) / shy.steps(),
            static_cast<double>(bold.experiments()) / bold.steps());
}

TEST(Td4, DeterministicWorldMostlyWins) {
  Td4 ag(A(), Rational(1, 20), 2);
  auto life = play_life(ag, WorldRun(sample("remember_a.tm")), small_caps(1000, 10), 4);
  EXPECT_GE(tail_success(life, 500), Rational(9, 10));
}

TEST(Td5, SingleWorldIsMaxSum) {
  Caps c = small_caps(3, 4);
  for (const char* f : {"remember_a.tm", "coin.tm", "always_loss.tm"}) {
    auto m = sample(f);
    auto [s, v] = td5_best_strategy(std::vector<WorldMachine>{m}, 3, c);
    EXPECT_EQ(v, max_sum(build_multigame_tree(WorldRun(m), 3, c)).root_value()) << f;
    EXPECT_EQ(strategy_expected_success(s, build_multigame_tree(WorldRun(m), 3, c)), v) << f;
  }
}

TEST(Td5, OppositeWorldsSplitOneGame) {
  auto wa = make_world(1, {T(0, "a", 0, "victory"), T(0, "b", 0, "loss")});
  auto wb = make_world(1, {T(0, "a", 0, "loss"), T(0, "b", 0, "victory")});
  auto [s, v] = td5_best_strategy(std::vector<WorldMachine>{wa, wb}, 1, small_caps(1, 1));
  EXPECT_EQ(v, Rational(1, 2));
  // with two games the first one reveals the world
  auto two = td5_best_strategy(std::vector<WorldMachine>{wa, wb}, 2, small_caps(2, 1));
  EXPECT_EQ(two.second, Rational(3, 4));
}

TEST(Td5, StrategyPolicyReplaysStrategy) {
  auto m = sample("remember_a.tm");
  Caps c = small_caps(2, 3);
  auto [s, v] = td5_best_strategy(std::vector<WorldMachine>{m}, 2, c);
  EXPECT_EQ(v, Rational(1));
  StrategyPolicy p(A(), s);
  auto life = play_life(p, WorldRun(m), c, 1);
  EXPECT_EQ(life.counts.n_victory, 2u);
}

TEST(Td6, FindsModelAndWins) {
  Td6Config cfg;
  cfg.caps = small_caps(30, 10);
  Td6 ag(A(), cfg, 1);
  auto life = play_life(ag, WorldRun(sample("remember_a.tm")), cfg.caps, 1);
  EXPECT_TRUE(ag.has_model());
  EXPECT_FALSE(ag.stats().budget_exhausted);
  for (std::size_t i = ag.stats().last_change_game + 1; i < life.games.size(); ++i)
    EXPECT_EQ(life.games[i].outcome, Outcome::Victory);
  EXPECT_LT(ag.stats().last_change_game, 5u);
  auto m = ag.model();
  ASSERT_TRUE(m.has_value());
  EXPECT_LE(m->size(), 3u);
}

TEST(Td6, TooSmallModelSpaceGivesNoModel) {
  Td6Config cfg;
  cfg.model_size_cap = 1;
  cfg.caps = small_caps(20, 10);
  Td6 ag(A(), cfg, 1);
  play_life(ag, WorldRun(sample("remember_a.tm")), cfg.caps, 1);
  EXPECT_FALSE(ag.has_model());
  EXPECT_GT(ag.stats().searches, 1u);
}

TEST(Td6, ModelReproducesTranscript) {
  Td6Config cfg;
  cfg.caps = small_caps(15, 6, false);
  Rng pick(4);
  for (int i = 0; i < 5; ++i) {
    auto truth = make_world(1, {T(0, "a", 0, i % 2 ? "victory" : "o1", 'L'), T(0, "b", 0, "o2")});
    Td6 ag(A(), cfg, i);
    auto life = play_life(ag, WorldRun(truth), cfg.caps, 1);
    ASSERT_TRUE(ag.has_model());
    // replaying the agent's moves against the model gives the same percepts
    WorldRun model(*ag.model());
    Rng rng(1);
    for (const auto& g : life.games)
      for (std::size_t k = 0; k < g.moves.size(); ++k) {
        bool force = k + 1 >= cfg.caps.game_big_step_cap;
        EXPECT_EQ(model.respond(g.moves[k].action, rng, cfg.caps.world_limits(), force).percept, g.moves[k].percept);
      }
  }
}

TEST(MakeAgent, Parses) {
  Caps c;
  EXPECT_EQ(make_agent("random", A(), c, 1)->name(), "random");
  EXPECT_EQ(make_agent("kind=td1", A(), c, 1)->name(), "td1");
  EXPECT_EQ(make_agent("td3,budget=5", A(), c, 1)->name(), "td3");
  EXPECT_EQ(make_agent("td4, courage=1/10, k=2", A(), c, 1)->name(), "td4");
  EXPECT_EQ(make_agent("td6,size=2,depth=3", A(), c, 1)->name(), "td6");
  EXPECT_NE(make_agent("tm,file=" + std::string(TMW_SAMPLES) + "/agent_always_a.tm", A(), c, 1), nullptr);
  EXPECT_THROW(make_agent("td9", A(), c, 1), Error);
  EXPECT_THROW(make_agent("td3,colour=red", A(), c, 1), Error);
  EXPECT_THROW(make_agent("td3,budget=many", A(), c, 1), Error);
  EXPECT_THROW(make_agent("tm", A(), c, 1), Error);
  auto other = Alphabet::make({"victory", "loss", "draw", "o1", "o2"}, {"x", "y"});
  EXPECT_THROW(make_agent("tm,file=" + std::string(TMW_SAMPLES) + "/agent_always_a.tm", other, c, 1), Error);
}
