#include <gtest/gtest.h>

#include "support.hpp"
#include "tmw/machine_text.hpp"
#include "tmw/tape.hpp"

using namespace tmw;
using namespace tmw::test;

namespace {

std::shared_ptr<const AgentMachine> agent(const std::string& text) {
  return std::make_shared<const AgentMachine>(parse_agent(text));
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return Errc::InvalidConfig;
}

const std::string kHeader = "states 1 start p0 sigma victory loss draw o1 o2 omega a b\n";

}  // namespace

TEST(Alphabet, MinimalLayout) {
  const auto& a = A();
  EXPECT_EQ(a.sigma_size(), 5u);
  EXPECT_EQ(a.omega_size(), 2u);
  EXPECT_EQ(a.world_tape_size(), 8u);
  EXPECT_TRUE(a.is_final(a.victory()));
  EXPECT_TRUE(a.is_omega(L("a")));
  EXPECT_FALSE(a.is_sigma(a.blank()));
}

TEST(Alphabet, RejectsTooFewLetters) {
  EXPECT_EQ(code_of([] { Alphabet::make({"victory", "loss", "draw", "o1"}, {"a", "b"}); }), Errc::BadAlphabet);
  EXPECT_EQ(code_of([] { Alphabet::make({"victory", "loss", "draw", "o1", "o2"}, {"a"}); }), Errc::BadAlphabet);
  EXPECT_EQ(code_of([] { Alphabet::make({"victory", "loss", "draw", "o1", "a"}, {"a", "b"}); }), Errc::BadAlphabet);
}

TEST(Alphabet, ParseDescribeRoundTrip) {
  auto a = Alphabet::make({"win", "lose", "tie", "x", "y", "z"}, {"l", "r", "s"}, "B", {}, "win", "lose", "tie");
  EXPECT_EQ(Alphabet::parse(a.describe()), a);
  EXPECT_EQ(Alphabet::parse(A().describe()), A());
}

TEST(Tape, UnwrittenCellsAreBlank) {
  Tape t(A().blank());
  EXPECT_EQ(t.read(0), A().blank());
  EXPECT_EQ(t.read(-1000), A().blank());
  t.write(-3, L("a"));
  t.write(5, L("o1"));
  EXPECT_EQ(t.read(-3), L("a"));
  EXPECT_EQ(t.read(5), L("o1"));
  EXPECT_EQ(t.read(4), A().blank());
}

TEST(Tape, EqualityIgnoresBlankPadding) {
  Tape x(A().blank()), y(A().blank());
  x.write(10, L("a"));
  x.write(10, A().blank());
  EXPECT_EQ(x, y);
  EXPECT_EQ(x.hash(), y.hash());
}

TEST(AgentMachine, MissingStart) {
  EXPECT_EQ(code_of([] { parse_agent("states 1 start p3 sigma victory loss draw o1 o2 omega a b\np0 _ -> p0 a R\n"); }),
            Errc::MissingStart);
}

TEST(AgentMachine, OneStateMachineIsValid) {
  auto m = parse_agent(kHeader + "p0 _ -> p0 a R\n");
  EXPECT_EQ(m.n_states(), 1u);
  EXPECT_EQ(m.rules().size(), 1u);
}

TEST(AgentMachine, BadLetterAndUnknownState) {
  EXPECT_EQ(code_of([] { parse_agent(kHeader + "p0 _ -> p0 zz R\n"); }), Errc::BadLetter);
  EXPECT_EQ(code_of([] { parse_agent(kHeader + "p0 _ -> p4 a R\n"); }), Errc::UnknownState);
}

TEST(AgentMachine, DuplicateRuleCitesLine) {
  try {
    parse_agent(kHeader + "p0 _ -> p0 a R\np0 _ -> p0 b R\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DuplicateRule);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(AgentRun, SingleRuleEmitsAfterOneSmallStep) {
  AgentRun r(agent(kHeader + "p0 _ -> p0 b R\n"));
  EXPECT_EQ(r.emit(), L("b"));
  EXPECT_EQ(r.small_steps_this_big_step(), 1u);
  EXPECT_EQ(r.head(), 1);
}

TEST(AgentRun, TwoCycleHitsCap) {
  AgentRun r(agent("states 3 start p0 sigma victory loss draw o1 o2 omega a b cap 100\n"
                   "p0 _ -> p1 _ R\np1 _ -> p2 _ L\np2 _ -> p1 _ R\n"));
  try {
    r.emit();
    FAIL();
  } catch (const AgentFailure& e) {
    EXPECT_EQ(e.code(), Errc::SmallStepCapExceeded);
  }
}

TEST(AgentRun, MarkerThenActionTakesTwoSmallSteps) {
  AgentRun r(std::make_shared<const AgentMachine>(
      AgentMachine::from_description(load_machine(std::string(TMW_SAMPLES) + "/agent_marker.tm"))));
  EXPECT_EQ(r.emit(), L("b"));
  EXPECT_EQ(r.small_steps_this_big_step(), 2u);
  EXPECT_EQ(r.tape().read(1), L("b"));
  EXPECT_EQ(r.head(), 2);
}

TEST(AgentRun, HaltsWithoutRule) {
  AgentRun r(agent(kHeader + "p0 _ -> p0 a R\n"));
  r.emit();
  r.absorb(L("o1"));
  try {
    r.emit();
    FAIL();
  } catch (const AgentFailure& e) {
    EXPECT_EQ(e.code(), Errc::AgentHalted);
  }
}

TEST(AgentRun, NonActionOutputFails) {
  AgentRun r(agent(kHeader + "p0 _ -> p0 o1 R\n"));
  try {
    r.emit();
    FAIL();
  } catch (const AgentFailure& e) {
    EXPECT_EQ(e.code(), Errc::NonActionOutput);
  }
}

TEST(AgentRun, AbsorbOverwritesCellUnderHead) {
  auto m = agent("states 2 start p0 sigma victory loss draw o1 o2 omega a b service m\n"
                 "p0 _ -> p1 m L\np1 _ -> p0 a R\np0 victory -> p0 a R\n");
  AgentRun r(m);
  EXPECT_EQ(r.emit(), L("a"));
  // marker m sits at 0, head came back to 0
  EXPECT_EQ(r.head(), 0);
  EXPECT_EQ(r.tape().read(0), *m->alphabet().find("m"));
  r.absorb(L("victory"));
  EXPECT_EQ(r.tape().read(0), L("victory"));
  EXPECT_EQ(r.emit(), L("a"));
}

TEST(AgentRun, BigStepCounter) {
  AgentRun r(std::make_shared<const AgentMachine>(
      AgentMachine::from_description(load_machine(std::string(TMW_SAMPLES) + "/agent_always_a.tm"))));
  for (int i = 0; i < 5; ++i) {
    r.emit();
    r.absorb(L("o2"));
  }
  EXPECT_EQ(r.big_steps_total(), 5u);
}

TEST(WorldMachine, NotTotal) {
  EXPECT_EQ(code_of([] { parse_world(kHeader + "p0 a -> p0 victory R\n"); }), Errc::NotTotal);
}

TEST(WorldMachine, IllegalNondeterminism) {
  std::vector<Tuple> t{T(0, "a", 1, "a"), T(0, "a", 1, "b")};
  EXPECT_EQ(code_of([&] { make_world(2, t); }), Errc::IllegalNondeterminism);
}

TEST(WorldMachine, NonSigmaOutput) {
  EXPECT_EQ(code_of([] { make_world(1, {T(0, "a", 0, "b")}); }), Errc::NonSigmaOutput);
}

TEST(WorldMachine, DirectionOnlyDuplicate) {
  EXPECT_EQ(code_of([] { make_world(1, {T(0, "a", 0, "o1", 'L'), T(0, "a", 0, "o1", 'R')}); }),
            Errc::DirectionOnlyDuplicate);
}

TEST(WorldMachine, DuplicateTuple) {
  EXPECT_EQ(code_of([] { make_world(1, {T(0, "a", 0, "o1"), T(0, "a", 0, "o1")}); }), Errc::DuplicateTuple);
}

TEST(WorldSize, Examples) {
  EXPECT_EQ(make_world(3, {}).size(), 3u);
  auto w19 = make_world(19, {T(0, "a", 0, "victory"), T(0, "a", 0, "loss")});
  EXPECT_EQ(w19.n_states(), 19u);
  EXPECT_EQ(w19.indefiniteness(), 1u);
  EXPECT_EQ(w19.size(), 20u);
  auto w4 = make_world(4, {T(1, "_", 0, "victory"), T(1, "_", 0, "loss"), T(2, "b", 0, "o1"), T(2, "b", 0, "o2"),
                           T(2, "b", 0, "draw")});
  EXPECT_EQ(w4.size(), 4u + (5u - 2u));
}

TEST(WorldRun, SingleRuleAnswersVictory) {
  WorldRun w(sample("always_victory.tm"));
  Rng rng(1);
  EXPECT_EQ(w.respond(L("a"), rng).percept, L("victory"));
  EXPECT_EQ(w.respond(L("b"), rng).percept, L("victory"));
}

TEST(WorldRun, FreshTapeHoldsOnlyTheAction) {
  WorldRun w(sample("remember_a.tm"));
  Rng rng(1);
  EXPECT_EQ(w.respond(L("a"), rng).percept, L("o1"));
  EXPECT_EQ(w.tape().read(0), L("a"));
  EXPECT_EQ(w.tape().read(-1), L("o1"));
  EXPECT_EQ(w.tape().read(1), A().blank());
}

TEST(WorldRun, LoopingBigStepBecomesDraw) {
  WorldRun w(sample("slow_loop.tm"));
  Rng rng(1);
  auto s = w.respond(L("a"), rng);
  EXPECT_EQ(s.percept, L("draw"));
  EXPECT_TRUE(s.small_step_cap_hit);
  EXPECT_EQ(w.small_steps(), 801u);
  EXPECT_EQ(w.control(), w.machine().start());
}

TEST(WorldRun, SmallStepCapIsConfigurable) {
  WorldRun w(sample("slow_loop.tm"));
  Rng rng(1);
  w.respond(L("a"), rng, WorldLimits{10, 1024});
  EXPECT_EQ(w.small_steps(), 11u);
}

TEST(WorldRun, CoinIsFair) {
  WorldRun base(sample("coin.tm"));
  Rng rng(2024);
  int wins = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    WorldRun w = base;
    wins += w.respond(L("a"), rng).percept == L("victory");
  }
  EXPECT_NEAR(wins / double(n), 0.5, 0.02);
}

TEST(WorldOutcomes, Deterministic) {
  WorldRun w(sample("remember_a.tm"));
  auto o = w.outcomes(L("a"));
  ASSERT_EQ(o.size(), 1u);
  EXPECT_EQ(o[0].percept, L("o1"));
  EXPECT_EQ(o[0].probability, Rational(1));
}

TEST(WorldOutcomes, PairAndTriple) {
  WorldRun two(sample("coin.tm"));
  auto o = two.outcomes(L("a"));
  ASSERT_EQ(o.size(), 2u);
  EXPECT_EQ(o[0].probability, Rational(1, 2));
  EXPECT_EQ(o[1].probability, Rational(1, 2));

  WorldRun three(make_world(1, {T(0, "b", 0, "o1"), T(0, "b", 0, "o2"), T(0, "b", 0, "victory")}));
  auto q = three.outcomes(L("b"));
  ASSERT_EQ(q.size(), 3u);
  for (const auto& x : q) EXPECT_EQ(x.probability, Rational(1, 3));
}

TEST(WorldOutcomes, GroupAfterDeterministicPrefix) {
  // a walks one cell right, then a group fires
  auto m = make_world(2, {T(0, "a", 1, "a"), T(1, "_", 0, "o1"), T(1, "_", 0, "o2")});
  WorldRun w(m);
  auto o = w.outcomes(L("a"));
  ASSERT_EQ(o.size(), 2u);
  EXPECT_EQ(o[0].percept, L("o1"));
  EXPECT_EQ(o[1].percept, L("o2"));
  EXPECT_EQ(o[0].next.tape().read(1), L("o1"));
}

// Properties

TEST(Properties, ValidationRejectsMutations) {
  Rng rng(7);
  int checked = 0;
  for (int i = 0; i < 200; ++i) {
    auto m = random_world(rng, 1 + rng.below(3));
    auto t = m.tuples();
    // drop a whole row
    {
      auto u = t;
      auto victim = u[rng.below(u.size())];
      std::erase_if(u, [&](const Tuple& x) { return x.from == victim.from && x.read == victim.read; });
      EXPECT_EQ(code_of([&] { WorldMachine::create(A(), m.n_states(), state(0), u); }), Errc::NotTotal);
    }
    // output tuple writing an action
    {
      auto u = t;
      for (auto& x : u)
        if (x.to == state(0)) {
          x.write = L("a");
          break;
        }
      EXPECT_EQ(code_of([&] { WorldMachine::create(A(), m.n_states(), state(0), u); }), Errc::NonSigmaOutput);
    }
    // second non-output tuple on a non-output row
    if (m.n_states() > 1) {
      for (const auto& x : t)
        if (x.to != state(0)) {
          auto u = t;
          Tuple y = x;
          y.write = letter((index(x.write) + 1) % A().world_tape_size());
          u.push_back(y);
          EXPECT_EQ(code_of([&] { WorldMachine::create(A(), m.n_states(), state(0), u); }),
                    Errc::IllegalNondeterminism);
          ++checked;
          break;
        }
    }
  }
  EXPECT_GT(checked, 50);
}

TEST(Properties, GroupsHaveDistinctLetters) {
  Rng rng(8);
  for (int i = 0; i < 300; ++i) {
    auto m = random_world(rng, 1 + rng.below(3));
    for (std::size_t s = 0; s < m.n_states(); ++s)
      for (std::size_t l = 0; l < A().world_tape_size(); ++l) {
        auto r = m.row(state(s), letter(l));
        ASSERT_FALSE(r.empty());
        for (std::size_t k = 1; k < r.size(); ++k) EXPECT_NE(r[k].write, r[k - 1].write);
      }
  }
}

TEST(Properties, OutcomeProbabilitiesSumToOne) {
  Rng rng(9);
  for (int i = 0; i < 300; ++i) {
    WorldRun w(random_world(rng, 1 + rng.below(3)));
    for (int step = 0; step < 4; ++step) {
      Letter a = A().omega(rng.below(2));
      auto o = w.outcomes(a);
      Rational sum = 0;
      for (const auto& b : o) sum += b.probability;
      EXPECT_EQ(sum, Rational(1));
      w = o[rng.below(o.size())].next;
    }
  }
}

TEST(Properties, RespondReplaysWithSeed) {
  Rng pick(10);
  for (int i = 0; i < 50; ++i) {
    auto m = random_world(pick, 1 + pick.below(3));
    auto run = [&](std::uint64_t seed) {
      WorldRun w(m);
      Rng rng(seed);
      std::vector<Letter> out;
      for (int k = 0; k < 20; ++k) out.push_back(w.respond(A().omega(k % 2), rng).percept);
      return out;
    };
    EXPECT_EQ(run(99), run(99));
  }
}

TEST(Properties, RespondMatchesOutcomes) {
  // chi-by-eye: every percept frequency within 3 sigma of its exact probability
  Rng pick(11);
  int groups = 0;
  for (int i = 0; i < 40 && groups < 8; ++i) {
    auto m = random_world(pick, 1 + pick.below(2));
    WorldRun base(m);
    auto o = base.outcomes(L("a"));
    if (o.size() < 2) continue;
    ++groups;
    Rng rng(1234 + i);
    std::map<Letter, int> freq;
    const int n = 10000;
    for (int k = 0; k < n; ++k) {
      WorldRun w = base;
      ++freq[w.respond(L("a"), rng).percept];
    }
    for (const auto& b : o) {
      double p = to_double(b.probability);
      double sd = std::sqrt(p * (1 - p) / n);
      EXPECT_NEAR(freq[b.percept] / double(n), p, 3 * sd + 1e-9);
    }
  }
  EXPECT_GE(groups, 3);
}

TEST(MachineText, RoundTrip) {
  auto m = sample("remember_a.tm");
  EXPECT_EQ(parse_world(to_text(m)), m);
  EXPECT_EQ(world_id(parse_world(to_text(m))), world_id(m));
  auto ag = parse_agent(read_file(std::string(TMW_SAMPLES) + "/agent_marker.tm"));
  EXPECT_EQ(to_text(parse_agent(to_text(ag))), to_text(ag));
}

TEST(MachineText, ErrorsCiteLines) {
  try {
    parse_machine(kHeader + "p0 a -> p0 victory R\np0 b -> p0 victory X\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::ParseError);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  try {
    parse_world(kHeader + "p0 a -> p0 victory R\np0 zz -> p0 victory R\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::BadLetter);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}
