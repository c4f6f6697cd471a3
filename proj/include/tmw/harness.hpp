#pragma once

#include <atomic>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "tmw/agents.hpp"
#include "tmw/game.hpp"
#include "tmw/game_tree.hpp"
#include "tmw/machine_text.hpp"
#include "tmw/rational.hpp"
#include "tmw/rng.hpp"
#include "tmw/worldspace.hpp"

namespace tmw {

inline constexpr const char* report_version = "tmw-eval 1";

/// Parameters of the definition, defaults: 1000 big steps
/// per game, 800 small steps per world big step, 100 games per life, world
/// size at most 20, pass above 70%.
struct EvalConfig {
  WorldSpaceSpec space;
  std::vector<WorldMachine> worlds;  // when non-empty, evaluated instead of sampling
  std::size_t sample_count = 100;
  std::size_t lives_per_world = 1;
  Caps caps;
  std::uint64_t seed = 1;
  Rational threshold{7, 10};
  unsigned workers = 1;  // does not affect results

  static EvalConfig full_scale() {
    EvalConfig c;
    c.space.max_size = 20;
    c.space.determinism = Determinism::All;
    return c;
  }

  void validate() const {
    caps.validate();
    if (worlds.empty() && sample_count == 0) throw Error(Errc::InvalidConfig, "sample_count must be at least 1");
    if (lives_per_world == 0) throw Error(Errc::InvalidConfig, "lives_per_world must be at least 1");
    if (workers == 0) throw Error(Errc::InvalidConfig, "workers must be at least 1");
  }
};

struct WorldEntry {
  std::size_t index = 0;
  std::string world_id;
  std::size_t size = 0;
  std::size_t states = 0;
  std::vector<Rational> successes;  // one per life
  Rational mean;
  std::string error;  // non-empty: entry aborted, excluded from the aggregate
};

struct EvalReport {
  std::string agent;
  std::vector<WorldEntry> entries;
  Rational mean;          // mean of per-world means
  double std_error = 0;   // of the per-world means
  double ci_low = 0;
  double ci_high = 0;
  bool pass = false;      // mean > threshold
  std::size_t n_ok = 0;
  std::size_t n_failed = 0;
  std::vector<std::string> annotations;
  nlohmann::ordered_json provenance;

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["version"] = report_version;
    j["agent"] = agent;
    j["provenance"] = provenance;
    auto& w = j["worlds"] = nlohmann::ordered_json::array();
    for (const auto& e : entries) {
      nlohmann::ordered_json x;
      x["index"] = e.index;
      x["world"] = e.world_id;
      x["size"] = e.size;
      x["states"] = e.states;
      if (!e.error.empty()) {
        x["error"] = e.error;
      } else {
        auto& s = x["successes"] = nlohmann::ordered_json::array();
        for (const auto& r : e.successes) s.push_back(to_string(r));
        x["mean"] = to_string(e.mean);
      }
      w.push_back(std::move(x));
    }
    auto& a = j["aggregate"];
    a["mean"] = to_string(mean);
    a["mean_decimal"] = to_double(mean);
    a["std_error"] = std_error;
    a["ci95"] = {ci_low, ci_high};
    a["n_worlds"] = n_ok;
    a["n_failed"] = n_failed;
    a["threshold"] = provenance.value("threshold", "");
    a["pass"] = pass;
    j["annotations"] = annotations;
    return j;
  }
};

namespace detail {

inline nlohmann::ordered_json caps_json(const Caps& c) {
  nlohmann::ordered_json j;
  j["game_big_step_cap"] = c.game_big_step_cap;
  j["world_small_step_cap"] = c.world_small_step_cap;
  j["life_games"] = c.life_games;
  j["agent_small_step_cap"] = c.agent_small_step_cap;
  j["reset_world_each_game"] = c.reset_world_each_game;
  return j;
}

/// Seeds: world i is sampled from derive_seed(seed, i); life j in world i
/// uses s = derive_seed(derive_seed(seed, i), 1 + j), with the agent seeded
/// by derive_seed(s, 1) and the world's random stream by derive_seed(s, 2).
inline std::uint64_t life_seed(std::uint64_t master, std::size_t world, std::size_t life) {
  return derive_seed(derive_seed(master, world), 1 + life);
}

template <class F>
void parallel_for(std::size_t n, unsigned workers, F&& body) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < std::min<std::size_t>(workers, n); ++w)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) body(i);
    });
  for (auto& t : pool) t.join();
}

}  // namespace detail

using AgentFactory = std::function<std::unique_ptr<Policy>(const Alphabet&, const Caps&, std::uint64_t seed)>;

/// Samples (or takes) the worlds, plays lives_per_world lives of the agent
/// in each, and averages. Results depend only on the config and the master
/// seed, not on `workers`.
inline EvalReport evaluate(const AgentFactory& make, const std::string& agent_label, const EvalConfig& cfg) {
  cfg.validate();
  const bool sampled = cfg.worlds.empty();
  const std::size_t n = sampled ? cfg.sample_count : cfg.worlds.size();

  std::vector<std::optional<WorldMachine>> worlds(n);
  std::vector<std::string> world_error(n);
  for (std::size_t i = 0; i < n; ++i) {
    try {
      if (sampled) {
        Rng rng(derive_seed(cfg.seed, i));
        worlds[i] = sample_world(cfg.space, rng);
      } else {
        worlds[i] = cfg.worlds[i];
      }
    } catch (const Error& e) {
      world_error[i] = e.what();
    }
  }

  const std::size_t lives = cfg.lives_per_world;
  std::vector<Rational> results(n * lives);
  std::vector<std::string> errors(n * lives);
  detail::parallel_for(n * lives, cfg.workers, [&](std::size_t task) {
    const std::size_t i = task / lives, j = task % lives;
    if (!worlds[i]) return;
    try {
      const std::uint64_t s = detail::life_seed(cfg.seed, i, j);
      auto agent = make(worlds[i]->alphabet(), cfg.caps, derive_seed(s, 1));
      auto life = play_life(*agent, WorldRun(*worlds[i]), cfg.caps, derive_seed(s, 2));
      results[task] = success(life.counts);
    } catch (const std::exception& e) {
      errors[task] = e.what();
    }
  });

  EvalReport r;
  r.agent = agent_label;
  Rational sum = 0;
  std::vector<double> means;
  for (std::size_t i = 0; i < n; ++i) {
    WorldEntry e;
    e.index = i;
    if (worlds[i]) {
      e.world_id = hex_id(world_id(*worlds[i]));
      e.size = worlds[i]->size();
      e.states = worlds[i]->n_states();
    }
    e.error = world_error[i];
    for (std::size_t j = 0; j < lives && e.error.empty(); ++j) {
      if (!errors[i * lives + j].empty()) e.error = errors[i * lives + j];
      else e.successes.push_back(results[i * lives + j]);
    }
    if (e.error.empty()) {
      Rational m = 0;
      for (const auto& x : e.successes) m += x;
      e.mean = m / static_cast<long>(lives);
      sum += e.mean;
      means.push_back(to_double(e.mean));
      ++r.n_ok;
    } else {
      e.successes.clear();
      ++r.n_failed;
    }
    r.entries.push_back(std::move(e));
  }
  if (r.n_ok == 0) throw Error(Errc::EmptyLife, "no world could be evaluated");
  r.mean = sum / static_cast<long>(r.n_ok);
  const double mu = to_double(r.mean);
  if (means.size() > 1) {
    double ss = 0;
    for (double x : means) ss += (x - mu) * (x - mu);
    r.std_error = std::sqrt(ss / static_cast<double>(means.size() - 1)) / std::sqrt(static_cast<double>(means.size()));
  }
  r.ci_low = mu - 1.96 * r.std_error;
  r.ci_high = mu + 1.96 * r.std_error;
  r.pass = r.mean > cfg.threshold;

  auto& p = r.provenance;
  p["seed"] = cfg.seed;
  p["worlds"] = sampled ? "sampled" : "given";
  p["alphabet"] = cfg.space.alphabet.describe();
  p["max_size"] = cfg.space.max_size;
  p["determinism"] = cfg.space.determinism == Determinism::All ? "all" : "deterministic_only";
  p["sample_count"] = n;
  p["lives_per_world"] = lives;
  p["caps"] = detail::caps_json(cfg.caps);
  p["threshold"] = to_string(cfg.threshold);
  p["seed_derivation"] = "world i: splitmix(seed, i); life j: splitmix(splitmix(seed, i), 1 + j)";

  r.annotations.push_back("confidence interval: normal approximation over per-world means; unreliable for small N");
  if (sampled && cfg.space.determinism == Determinism::All)
    r.annotations.push_back(
        "mixed population: machines are sampled uniformly; the count correction between deterministic and "
        "nondeterministic machines is not applied");
  if (!(cfg.space.max_size == 20 && cfg.space.alphabet.sigma_size() == 5 && cfg.caps == Caps{}))
    r.annotations.push_back("threshold comparison is descriptive: it is meant for size 20, |sigma| = 5 and default caps");
  r.annotations.push_back("the conjectured TD5 average of about 80% is not computed here");
  return r;
}

inline EvalReport evaluate(const std::string& agent_spec, const EvalConfig& cfg) {
  // a malformed spec is a config error, not a per-world one
  try {
    make_agent(agent_spec, cfg.worlds.empty() ? cfg.space.alphabet : cfg.worlds.front().alphabet(), cfg.caps, 0);
  } catch (const Error& e) {
    if (e.code() == Errc::InvalidConfig || e.code() == Errc::ParseError) throw;
  }
  return evaluate([&](const Alphabet& a, const Caps& c, std::uint64_t seed) { return make_agent(agent_spec, a, c, seed); },
                  agent_spec, cfg);
}

/// Exact mean over the worlds of the strategy's expected success in the tree
/// of n_games games.
inline Rational exact_evaluate(const Strategy& s, const std::vector<WorldMachine>& worlds, std::uint32_t n_games,
                               const Caps& caps, TreeLimits limits = {}) {
  if (worlds.empty()) throw Error(Errc::InvalidConfig, "no worlds");
  Rational sum = 0;
  for (const auto& w : worlds) sum += strategy_expected_success(s, build_multigame_tree(WorldRun(w), n_games, caps, limits));
  return sum / static_cast<long>(worlds.size());
}

}  // namespace tmw
