#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tmw/alphabet.hpp"
#include "tmw/game.hpp"
#include "tmw/game_tree.hpp"
#include "tmw/machine_text.hpp"
#include "tmw/policy.hpp"
#include "tmw/rng.hpp"
#include "tmw/worldspace.hpp"

namespace tmw {

class RandomAgent final : public Policy {
 public:
  RandomAgent(const Alphabet& a, std::uint64_t seed) : a_(a), rng_(seed) {}

  Letter act() override { return a_.omega(rng_.below(a_.omega_size())); }
  void observe(Letter) override {}
  std::string name() const override { return "random"; }

 private:
  Alphabet a_;
  Rng rng_;
};

/// Plays at random until the first victory, then repeats the winning game.
/// If a replayed game sees a percept the recorded game did not (possible
/// only in nondeterministic worlds) the recording is dropped and play is
/// random again until the next victory.
class Td1 final : public Policy {
 public:
  Td1(const Alphabet& a, std::uint64_t seed) : a_(a), rng_(seed) {}

  Letter act() override {
    Letter x;
    if (replaying() && pos_ < script_.size()) x = script_[pos_].action;
    else x = a_.omega(rng_.below(a_.omega_size()));
    game_.push_back({x, Letter{}});
    return x;
  }

  void observe(Letter p) override {
    game_.back().percept = p;
    if (replaying() && (pos_ >= script_.size() || script_[pos_].percept != p)) {
      script_.clear();
      diverged_ = true;
    }
    ++pos_;
    if (auto o = a_.outcome(p)) {
      if (*o == Outcome::Victory && script_.empty()) script_ = game_;
      game_.clear();
      pos_ = 0;
    }
  }

  std::string name() const override { return "td1"; }

  bool replaying() const { return !script_.empty(); }
  bool diverged() const { return diverged_; }

 private:
  Alphabet a_;
  Rng rng_;
  std::vector<Move> script_;
  std::vector<Move> game_;
  std::size_t pos_ = 0;
  bool diverged_ = false;
};

/// Tries the strategies of the game one per game, in depth-first omega
/// order, until a victory; then repeats it. If every strategy has been tried
/// without a victory it repeats the last drawn game, and with no draw either
/// it plays at random.
///
/// In a deterministic world a strategy is a path, so the odometer over
/// action sequences below visits each strategy exactly once.
class Td2 final : public Policy {
 public:
  enum class Phase : std::uint8_t { Searching, Winning, Drawing, Random };

  Td2(const Alphabet& a, std::uint64_t seed) : a_(a), rng_(seed) {}

  Letter act() override {
    Letter x;
    if (phase_ == Phase::Random) {
      x = a_.omega(rng_.below(a_.omega_size()));
    } else {
      const auto& plan = phase_ == Phase::Searching ? next_ : fixed_;
      x = pos_ < plan.size() ? plan[pos_] : a_.omega(0);
    }
    played_.push_back(x);
    ++pos_;
    return x;
  }

  void observe(Letter p) override {
    auto o = a_.outcome(p);
    if (!o) return;
    if (phase_ == Phase::Searching) {
      ++tried_;
      if (*o == Outcome::Victory) {
        fixed_ = played_;
        phase_ = Phase::Winning;
      } else {
        if (*o == Outcome::Draw) last_draw_ = played_;
        if (!advance(played_)) {
          if (last_draw_) {
            fixed_ = *last_draw_;
            phase_ = Phase::Drawing;
          } else {
            phase_ = Phase::Random;
          }
        }
      }
    }
    played_.clear();
    pos_ = 0;
  }

  std::string name() const override { return "td2"; }

  Phase phase() const { return phase_; }
  std::uint64_t strategies_tried() const { return tried_; }

 private:
  // Next leaf in depth-first order after the path `s`.
  bool advance(std::vector<Letter> s) {
    while (!s.empty() && a_.omega_index(s.back()) + 1 == a_.omega_size()) s.pop_back();
    if (s.empty()) return false;
    s.back() = a_.omega(a_.omega_index(s.back()) + 1);
    next_ = std::move(s);
    return true;
  }

  Alphabet a_;
  Rng rng_;
  Phase phase_ = Phase::Searching;
  std::vector<Letter> next_;
  std::vector<Letter> fixed_;
  std::vector<Letter> played_;
  std::optional<std::vector<Letter>> last_draw_;
  std::size_t pos_ = 0;
  std::uint64_t tried_ = 0;
};

/// Visit counts of the tree of this game, learned from play. Histories are
/// within one game; every game starts at the root.
class EmpiricalTree {
 public:
  static constexpr std::uint32_t none = ~std::uint32_t{0};

  struct Edge {
    std::uint64_t count = 0;
    std::uint32_t child = none;  // Ai node after a non-final percept
  };
  struct ActionStats {
    std::uint64_t visits = 0;
    std::map<Letter, Edge> percepts;
  };
  struct Node {
    std::map<Letter, ActionStats> actions;
  };

  explicit EmpiricalTree(const Alphabet& a) : a_(a), nodes_(1) {}

  std::uint32_t current() const { return cur_; }
  const Node& node(std::uint32_t id) const { return nodes_[id]; }
  std::size_t size() const { return nodes_.size(); }

  void record(Letter action, Letter percept) {
    auto& st = nodes_[cur_].actions[action];
    ++st.visits;
    auto& e = st.percepts[percept];
    ++e.count;
    if (a_.is_final(percept)) {
      cur_ = 0;
      return;
    }
    if (e.child == none) {
      e.child = static_cast<std::uint32_t>(nodes_.size());
      nodes_.emplace_back();
    }
    cur_ = e.child;
  }

  /// Max-Sum on the empirical tree; an untried action is worth a draw.
  double value(std::uint32_t id) const { return best(id).second; }

  /// Recommended action at `id`: lowest omega letter among the maxima.
  Letter recommend(std::uint32_t id) const { return best(id).first; }

  double action_value(std::uint32_t id, Letter a) const {
    auto it = nodes_[id].actions.find(a);
    if (it == nodes_[id].actions.end()) return 0.5;
    const auto& st = it->second;
    double v = 0;
    for (const auto& [p, e] : st.percepts) {
      double w = static_cast<double>(e.count) / static_cast<double>(st.visits);
      if (auto o = a_.outcome(p)) v += w * to_double(payoff(*o));
      else v += w * value(e.child);
    }
    return v;
  }

 private:
  std::pair<Letter, double> best(std::uint32_t id) const {
    Letter arg = a_.omega(0);
    double v = -1;
    for (std::size_t i = 0; i < a_.omega_size(); ++i) {
      double x = action_value(id, a_.omega(i));
      if (x > v) {
        v = x;
        arg = a_.omega(i);
      }
    }
    return {arg, v};
  }

  Alphabet a_;
  std::vector<Node> nodes_;
  std::uint32_t cur_ = 0;
};

/// Random play for `budget` games while learning the tree of this game, then
/// Max-Sum on what was learned. The tree keeps learning afterwards.
class Td3 final : public Policy {
 public:
  Td3(const Alphabet& a, std::uint64_t budget, std::uint64_t seed) : a_(a), budget_(budget), rng_(seed), tree_(a) {}

  Letter act() override {
    last_ = games_ < budget_ ? a_.omega(rng_.below(a_.omega_size())) : tree_.recommend(tree_.current());
    return last_;
  }

  void observe(Letter p) override {
    tree_.record(last_, p);
    if (a_.is_final(p)) ++games_;
  }

  std::string name() const override { return "td3"; }
  const EmpiricalTree& tree() const { return tree_; }

 private:
  Alphabet a_;
  std::uint64_t budget_;
  Rng rng_;
  EmpiricalTree tree_;
  Letter last_{};
  std::uint64_t games_ = 0;
};

/// Experiment probability on game g (1-based): min(1, k·ε / ((1 - ε)·√g)).
/// Experiments die out like 1/√g, so their share of all moves goes to zero;
/// ε = 1 means always experimenting.
inline double td4_experiment_probability(const Rational& courage, std::uint64_t game, double k = 4.0) {
  if (courage >= 1) return 1.0;
  const double e = to_double(courage);
  return std::min(1.0, k * e / ((1.0 - e) * std::sqrt(static_cast<double>(game))));
}

/// Max-Sum on the empirical tree, except that each big step is, with a
/// probability that shrinks with the number of games played, an experiment
/// that plays a uniformly random action.
class Td4 final : public Policy {
 public:
  Td4(const Alphabet& a, Rational courage, std::uint64_t seed, double k = 4.0)
      : a_(a), courage_(std::move(courage)), k_(k), rng_(seed), tree_(a) {
    if (courage_ <= 0 || courage_ > 1) throw Error(Errc::InvalidConfig, "courage must be in (0, 1]");
  }

  Letter act() override {
    const double p = td4_experiment_probability(courage_, games_ + 1, k_);
    ++steps_;
    if (p >= 1.0 || rng_.uniform() < p) {
      ++experiments_;
      last_ = a_.omega(rng_.below(a_.omega_size()));
    } else {
      last_ = tree_.recommend(tree_.current());
    }
    return last_;
  }

  void observe(Letter p) override {
    tree_.record(last_, p);
    if (a_.is_final(p)) ++games_;
  }

  std::string name() const override { return "td4"; }

  std::uint64_t experiments() const { return experiments_; }
  std::uint64_t steps() const { return steps_; }
  const EmpiricalTree& tree() const { return tree_; }

 private:
  Alphabet a_;
  Rational courage_;
  double k_;
  Rng rng_;
  EmpiricalTree tree_;
  Letter last_{};
  std::uint64_t games_ = 0;
  std::uint64_t experiments_ = 0;
  std::uint64_t steps_ = 0;
};

/// Follows a precomputed multigame strategy; histories it does not cover
/// (after the last game of the tree, or off the strategy) get omega[0].
class StrategyPolicy final : public Policy {
 public:
  StrategyPolicy(const Alphabet& a, Strategy s) : a_(a), s_(std::move(s)) {}

  Letter act() override {
    Letter x = s_.action(history_).value_or(a_.omega(0));
    history_.push_back(x);
    return x;
  }
  void observe(Letter p) override { history_.push_back(p); }
  std::string name() const override { return "td5"; }

 private:
  Alphabet a_;
  Strategy s_;
  std::vector<Letter> history_;
};

/// The best multigame strategy for a weighted set of worlds: Max-Sum over the
/// tree whose root holds every world at once. A strategy's value there is the
/// weighted mean of its values in the single worlds.
template <WorldModel W>
std::pair<Strategy, Rational> td5_best_strategy(std::vector<Weighted<W>> worlds, std::uint32_t n_games,
                                                const Caps& caps, TreeLimits limits = {}) {
  if (worlds.empty()) throw Error(Errc::InvalidConfig, "no worlds");
  auto tree = build_belief_tree<W>(std::move(worlds), caps, n_games, limits);
  auto vt = max_sum(tree);
  return {vt.strategy, vt.root_value()};
}

template <WorldModel W>
std::pair<Strategy, Rational> td5_best_strategy(const std::vector<W>& worlds, std::uint32_t n_games, const Caps& caps,
                                                TreeLimits limits = {}) {
  std::vector<Weighted<W>> belief;
  for (const auto& w : worlds) belief.push_back({w, Rational(1)});
  return td5_best_strategy(std::move(belief), n_games, caps, limits);
}

inline std::pair<Strategy, Rational> td5_best_strategy(const std::vector<WorldMachine>& worlds,
                                                       std::uint32_t n_games, const Caps& caps,
                                                       TreeLimits limits = {}) {
  std::vector<WorldRun> runs;
  for (const auto& m : worlds) runs.emplace_back(m);
  return td5_best_strategy(runs, n_games, caps, limits);
}

struct Td6Config {
  std::size_t model_size_cap = 3;
  std::uint32_t search_depth = 4;
  std::uint64_t search_budget = 20'000'000;  // simulated small steps per model search
  Caps caps;  // the game rules, which the agent is assumed to know
};

/// Adopts as the model of the world the first deterministic machine, in
/// size order, that reproduces the life so far, and plans on it by
/// depth-limited search. The model is only searched again when it is
/// contradicted.
///
/// The search fixes rows lazily: only rows the transcript actually visits
/// are branched, and the others keep the first option (p0, sigma[0], L).
/// With victory first in sigma, a model is optimistic about anything that
/// has never been tried.
class Td6 final : public Policy {
 public:
  struct Stats {
    std::uint64_t searches = 0;
    std::uint64_t models_adopted = 0;
    std::uint64_t small_steps_simulated = 0;
    bool budget_exhausted = false;
    std::uint64_t last_change_game = 0;  // game (0-based) in which the last model was adopted
  };

  Td6(const Alphabet& a, Td6Config cfg, std::uint64_t seed)
      : a_(a), cfg_(std::move(cfg)), rng_(seed), sig_(a.world_signature()) {
    if (cfg_.model_size_cap == 0 || cfg_.search_depth == 0)
      throw Error(Errc::InvalidConfig, "model size cap and search depth must be positive");
    cfg_.caps.validate();
  }

  Letter act() override {
    if (!model_ && step_in_game_ == 0 && retry_) {
      retry_ = false;
      search();
    }
    last_ = model_ ? plan() : a_.omega(rng_.below(a_.omega_size()));
    return last_;
  }

  void observe(Letter p) override {
    const bool force = step_in_game_ + 1 >= cfg_.caps.game_big_step_cap;
    moves_.push_back({last_, p, force});
    ++step_in_game_;
    if (model_ && !verify_last()) search();
    if (a_.is_final(p)) {
      step_in_game_ = 0;
      ++games_;
      if (!model_) retry_ = true;
    }
  }

  std::string name() const override { return "td6"; }

  const Stats& stats() const { return stats_; }
  bool has_model() const { return model_.has_value(); }

  /// The adopted model with untouched rows at their default.
  std::optional<WorldMachine> model() const {
    if (!model_) return std::nullopt;
    const auto& opts = options(model_->n);
    std::vector<Tuple> t;
    for (std::size_t row = 0; row < model_->table.size(); ++row) {
      Tuple x = opts[model_->table[row] < 0 ? 0 : static_cast<std::size_t>(model_->table[row])];
      x.from = state(row / sig_.letters);
      x.read = letter(row % sig_.letters);
      t.push_back(x);
    }
    return WorldMachine::create(a_, model_->n, state(0), std::move(t));
  }

 private:
  struct Step {
    Letter action;
    Letter percept;
    bool force;
  };

  struct Model {
    std::size_t n = 0;
    std::vector<std::int32_t> table;  // option index per row, -1 while undecided
    std::size_t max_state = 0;        // highest state referenced, for symmetry breaking
  };

  struct Sim {
    Tape tape;
    std::int64_t head = 0;
    State st{};
    std::size_t pos = 0;       // moves reproduced so far
    std::uint64_t small = 0;   // small steps in the current big step
    bool mid = false;          // inside a big step
  };

  const std::vector<Tuple>& options(std::size_t n) const {
    auto it = opts_.find(n);
    if (it == opts_.end()) {
      std::vector<Tuple> flat;
      for (const auto& o : detail::row_options(sig_, n, 0)) flat.push_back(o.front());
      it = opts_.emplace(n, std::move(flat)).first;
    }
    return it->second;
  }

  std::size_t row_of(const Sim& s) const { return index(s.st) * sig_.letters + index(s.tape.read(s.head)); }

  enum class Run : std::uint8_t { Done, NeedRow, Mismatch, OutOfBudget };

  // Reproduces the transcript from s.pos on. Stops at an undecided row when
  // `lazy`; otherwise undecided rows take option 0.
  Run replay(Sim& s, Model& m, bool lazy, std::size_t& need) {
    const auto& opts = options(m.n);
    const WorldLimits lim = cfg_.caps.world_limits();
    while (s.pos < moves_.size()) {
      const Step& mv = moves_[s.pos];
      if (!s.mid) {
        s.tape.write(s.head, mv.action);
        s.small = 0;
        s.mid = true;
      }
      for (;;) {
        const std::size_t row = row_of(s);
        if (m.table[row] < 0) {
          if (lazy) {
            need = row;
            return Run::NeedRow;
          }
          m.table[row] = 0;
        }
        if (++stats_.small_steps_simulated > budget_end_) return Run::OutOfBudget;
        const Tuple& t = opts[static_cast<std::size_t>(m.table[row])];
        Letter out;
        bool output;
        if (s.small >= lim.small_step_cap) {
          out = a_.draw();
          output = true;
          s.tape.write(s.head, out);
          s.head += static_cast<std::int64_t>(t.dir);
          s.st = state(0);
        } else {
          out = t.write;
          output = t.to == state(0);
          if (output && mv.force && !a_.is_final(out)) out = a_.draw();
          s.tape.write(s.head, out);
          s.head += static_cast<std::int64_t>(t.dir);
          s.st = t.to;
        }
        ++s.small;
        if (!output) continue;
        if (out != mv.percept) return Run::Mismatch;
        s.mid = false;
        ++s.pos;
        if (a_.is_final(out) && cfg_.caps.reset_world_each_game) {
          s.tape.clear();
          s.head = 0;
        }
        break;
      }
    }
    return Run::Done;
  }

  bool dfs(Sim s, Model& m) {
    std::size_t need = 0;
    switch (replay(s, m, true, need)) {
      case Run::Done:
        sim_ = std::move(s);
        return true;
      case Run::Mismatch: return false;
      case Run::OutOfBudget: throw Error(Errc::BudgetExceeded, "model search budget exhausted");
      case Run::NeedRow: break;
    }
    const auto& opts = options(m.n);
    const std::size_t saved_max = m.max_state;
    for (std::size_t i = 0; i < opts.size(); ++i) {
      const std::size_t to = index(opts[i].to);
      if (to > m.max_state + 1) continue;
      m.table[need] = static_cast<std::int32_t>(i);
      m.max_state = std::max(saved_max, to);
      if (dfs(s, m)) return true;
    }
    m.table[need] = -1;
    m.max_state = saved_max;
    return false;
  }

  void search() {
    ++stats_.searches;
    model_.reset();
    budget_end_ = stats_.small_steps_simulated + cfg_.search_budget;
    try {
      for (std::size_t n = 1; n <= cfg_.model_size_cap; ++n) {
        Model m;
        m.n = n;
        m.table.assign(n * sig_.letters, -1);
        Sim s;
        s.tape = Tape(a_.blank());
        if (dfs(std::move(s), m)) {
          model_ = std::move(m);
          ++stats_.models_adopted;
          stats_.last_change_game = games_;
          return;
        }
      }
    } catch (const Error& e) {
      if (e.code() != Errc::BudgetExceeded) throw;
      stats_.budget_exhausted = true;
    }
  }

  // Extends the model's run by the newest move.
  bool verify_last() {
    std::size_t need = 0;
    budget_end_ = stats_.small_steps_simulated + cfg_.search_budget;
    Run r = replay(sim_, *model_, false, need);
    if (r == Run::Done) return true;
    model_.reset();
    return false;
  }

  // Best action by exhaustive look-ahead on the model, within this game.
  // Values are in half-points: victory 2, draw 1, loss 0; a game still
  // running at the horizon counts as a draw.
  Letter plan() {
    Letter best = a_.omega(0);
    look(sim_, step_in_game_, cfg_.search_depth, &best);
    return best;
  }

  int look(const Sim& from, std::uint32_t step, std::uint32_t depth, Letter* best) {
    int v = -1;
    for (std::size_t i = 0; i < a_.omega_size(); ++i) {
      Sim s = from;
      const Letter p = predict(s, a_.omega(i), step + 1 >= cfg_.caps.game_big_step_cap);
      int x;
      if (auto o = a_.outcome(p)) x = *o == Outcome::Victory ? 2 : *o == Outcome::Draw ? 1 : 0;
      else x = depth <= 1 ? 1 : look(s, step + 1, depth - 1, nullptr);
      if (x > v) {
        v = x;
        if (best) *best = a_.omega(i);
      }
    }
    return v;
  }

  Letter predict(Sim& s, Letter action, bool force) {
    const auto& opts = options(model_->n);
    const WorldLimits lim = cfg_.caps.world_limits();
    s.tape.write(s.head, action);
    s.small = 0;
    for (;;) {
      const std::int32_t o = model_->table[row_of(s)];
      const Tuple& t = opts[o < 0 ? 0 : static_cast<std::size_t>(o)];
      Letter out = t.write;
      bool output = t.to == state(0);
      if (s.small >= lim.small_step_cap) {
        out = a_.draw();
        output = true;
      } else if (output && force && !a_.is_final(out)) {
        out = a_.draw();
      }
      s.tape.write(s.head, out);
      s.head += static_cast<std::int64_t>(t.dir);
      s.st = output ? state(0) : t.to;
      ++s.small;
      if (output) return out;
    }
  }

  Alphabet a_;
  Td6Config cfg_;
  Rng rng_;
  TapeSignature sig_;
  mutable std::map<std::size_t, std::vector<Tuple>> opts_;
  std::vector<Step> moves_;
  std::optional<Model> model_;
  Sim sim_;
  Letter last_{};
  std::uint32_t step_in_game_ = 0;
  std::uint64_t games_ = 0;
  std::uint64_t budget_end_ = 0;
  bool retry_ = true;
  Stats stats_;
};

/// Builds an agent from "kind=td4,courage=1/20" (or just "td4").
/// Keys: kind (random|td1|td2|td3|td4|td6|tm), budget (td3), courage and k
/// (td4), size, depth and search_budget (td6), file (tm).
inline std::unique_ptr<Policy> make_agent(const std::string& spec, const Alphabet& a, const Caps& caps,
                                          std::uint64_t seed) {
  std::map<std::string, std::string> kv;
  for (const auto& part : detail::split(spec, ',')) {
    auto item = detail::trim(part);
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos) kv["kind"] = item;
    else kv[detail::trim(item.substr(0, eq))] = detail::trim(item.substr(eq + 1));
  }
  auto take = [&](const std::string& key, const std::string& dflt) {
    auto it = kv.find(key);
    if (it == kv.end()) return dflt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  auto number = [&](const std::string& key, std::uint64_t dflt) -> std::uint64_t {
    auto v = take(key, "");
    if (v.empty()) return dflt;
    try {
      return std::stoull(v);
    } catch (const std::logic_error&) {
      throw Error(Errc::InvalidConfig, "agent parameter " + key + " is not a number: '" + v + "'");
    }
  };

  const std::string kind = take("kind", "");
  std::unique_ptr<Policy> out;
  if (kind == "random") {
    out = std::make_unique<RandomAgent>(a, seed);
  } else if (kind == "td1") {
    out = std::make_unique<Td1>(a, seed);
  } else if (kind == "td2") {
    out = std::make_unique<Td2>(a, seed);
  } else if (kind == "td3") {
    out = std::make_unique<Td3>(a, number("budget", 20), seed);
  } else if (kind == "td4") {
    Rational eps = parse_rational(take("courage", "1/20"));
    double k = std::stod(take("k", "4"));
    out = std::make_unique<Td4>(a, eps, seed, k);
  } else if (kind == "td6") {
    Td6Config c;
    c.caps = caps;
    c.model_size_cap = number("size", c.model_size_cap);
    c.search_depth = static_cast<std::uint32_t>(number("depth", c.search_depth));
    c.search_budget = number("search_budget", c.search_budget);
    out = std::make_unique<Td6>(a, c, seed);
  } else if (kind == "tm") {
    auto file = take("file", "");
    if (file.empty()) throw Error(Errc::InvalidConfig, "kind=tm needs file=<agent machine>");
    auto m = std::make_shared<const AgentMachine>(AgentMachine::from_description(load_machine(file)));
    if (!(m->alphabet().sigma_names() == a.sigma_names() && m->alphabet().omega_names() == a.omega_names()))
      throw Error(Errc::BadAlphabet, "agent machine alphabet does not match the world alphabet");
    out = std::make_unique<MachinePolicy>(m, caps.agent_small_step_cap);
  } else {
    throw Error(Errc::InvalidConfig, "unknown agent kind '" + kind + "'");
  }
  if (!kv.empty()) throw Error(Errc::InvalidConfig, "unknown agent parameter '" + kv.begin()->first + "'");
  return out;
}

}  // namespace tmw
