#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "tmw/harness.hpp"
#include "tmw/transcript.hpp"

using namespace tmw;

namespace {

// "game=1000,world=800,life=100,agent=100000,reset=0"
Caps parse_caps(const std::string& text) {
  Caps c;
  for (const auto& part : detail::split(text, ',')) {
    auto item = detail::trim(part);
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos) throw Error(Errc::InvalidConfig, "caps item without '=': " + item);
    auto key = detail::trim(item.substr(0, eq));
    auto val = detail::trim(item.substr(eq + 1));
    std::uint64_t v = 0;
    try {
      v = std::stoull(val);
    } catch (const std::logic_error&) {
      throw Error(Errc::InvalidConfig, "caps value is not a number: " + item);
    }
    if (key == "game") c.game_big_step_cap = static_cast<std::uint32_t>(v);
    else if (key == "world") c.world_small_step_cap = v;
    else if (key == "life") c.life_games = static_cast<std::uint32_t>(v);
    else if (key == "agent") c.agent_small_step_cap = v;
    else if (key == "reset") c.reset_world_each_game = v != 0;
    else throw Error(Errc::InvalidConfig, "unknown caps key '" + key + "'");
  }
  c.validate();
  return c;
}

Alphabet parse_alphabet(const std::string& text) { return text.empty() ? Alphabet::minimal() : Alphabet::parse(text); }

void write_out(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw Error(Errc::InvalidConfig, "cannot write " + path);
  f << text;
}

void write_worlds(const std::vector<WorldMachine>& ws, const std::string& dir) {
  if (dir.empty()) {
    for (const auto& w : ws) std::cout << to_text(w) << "\n";
    return;
  }
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < ws.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "world_%06zu.tm", i);
    write_out((std::filesystem::path(dir) / name).string(), to_text(ws[i]));
  }
}

std::string outcome_line(const OutcomeCounts& c) {
  return std::to_string(c.n_victory) + " victories, " + std::to_string(c.n_loss) + " losses, " +
         std::to_string(c.n_draw) + " draws";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Turing-machine worlds: machines, games, agents and evaluation"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  std::string caps_text, alphabet_text, out;
  std::size_t max_size = 2;
  bool all_machines = false;

  auto common = [&](CLI::App* s, bool with_space) {
    s->add_option("--seed", seed, "master seed");
    s->add_option("--caps", caps_text, "game=,world=,life=,agent=,reset= (defaults 1000,800,100,100000,0)");
    s->add_option("--out", out, "output file or directory");
    if (with_space) {
      s->add_option("--alphabet", alphabet_text, "sigma=..;omega=..[;blank=..] (default: minimal)");
      s->add_option("--max-size", max_size, "largest world size");
      s->add_flag("--nondeterministic", all_machines, "include nondeterministic machines");
    }
  };

  auto* validate = app.add_subcommand("validate", "check machine files");
  std::vector<std::string> files;
  validate->add_option("files", files, "machine files")->required();

  auto* enumerate = app.add_subcommand("enumerate", "write every world of the space");
  std::uint64_t budget = 10'000'000;
  common(enumerate, true);
  enumerate->add_option("--budget", budget, "refuse spaces with more machines");

  auto* sample = app.add_subcommand("sample", "draw worlds uniformly");
  std::size_t count = 1;
  common(sample, true);
  sample->add_option("--count", count, "number of worlds");

  auto* play = app.add_subcommand("play", "play one life, write the transcript");
  std::string world_file, agent_spec = "random";
  common(play, false);
  play->add_option("--world", world_file, "world machine file")->required();
  play->add_option("--agent", agent_spec, "agent spec, e.g. kind=td4,courage=1/20");

  auto* tree = app.add_subcommand("tree", "build a game tree and run Max-Sum");
  std::uint32_t games = 1;
  common(tree, false);
  tree->add_option("--world", world_file, "world machine file")->required();
  tree->add_option("--games", games, "games in the tree");

  auto* best = app.add_subcommand("best-strategy", "TD5: the best strategy for a set of worlds");
  std::vector<std::string> world_files;
  common(best, false);
  best->add_option("--world", world_files, "world machine files")->required();
  best->add_option("--games", games, "games in the tree");

  auto* eval = app.add_subcommand("evaluate", "evaluate an agent on sampled or given worlds");
  std::size_t samples = 100, lives = 1;
  unsigned workers = 1;
  std::string threshold = "7/10";
  bool full = false;
  common(eval, true);
  eval->add_option("--agent", agent_spec, "agent spec")->required();
  eval->add_option("--world", world_files, "evaluate on these worlds instead of sampling");
  eval->add_option("--samples", samples, "number of sampled worlds");
  eval->add_option("--lives", lives, "lives per world");
  eval->add_option("--workers", workers, "threads");
  eval->add_option("--threshold", threshold, "pass above this mean");
  eval->add_flag("--full-scale", full, "size 20, all machines, default caps");

  CLI11_PARSE(app, argc, argv);

  try {
    const Caps caps = parse_caps(caps_text);
    const Determinism det = all_machines ? Determinism::All : Determinism::DeterministicOnly;

    if (*validate) {
      int bad = 0;
      for (const auto& f : files) {
        try {
          auto d = load_machine(f);
          if (d.alphabet.service_size() > 0 || d.small_step_cap) {
            auto m = AgentMachine::from_description(d);
            std::cout << f << ": agent, " << m.n_states() << " states\n";
          } else {
            try {
              auto w = WorldMachine::from_description(d);
              std::cout << f << ": world " << hex_id(world_id(w)) << ", size " << w.size() << ", " << w.n_states()
                        << " states" << (w.deterministic() ? "" : ", nondeterministic") << "\n";
            } catch (const Error&) {
              auto m = AgentMachine::from_description(d);
              std::cout << f << ": agent, " << m.n_states() << " states\n";
            }
          }
        } catch (const std::exception& e) {
          std::cerr << f << ": " << e.what() << "\n";
          ++bad;
        }
      }
      return bad == 0 ? 0 : 1;
    }

    if (*enumerate) {
      WorldSpaceSpec spec{parse_alphabet(alphabet_text), max_size, det, budget};
      auto ws = enumerate_worlds(spec);
      write_worlds(ws, out);
      std::cerr << ws.size() << " worlds\n";
      return 0;
    }

    if (*sample) {
      WorldSpaceSpec spec{parse_alphabet(alphabet_text), max_size, det, 1};
      std::vector<WorldMachine> ws;
      for (std::size_t i = 0; i < count; ++i) {
        Rng rng(derive_seed(seed, i));
        ws.push_back(sample_world(spec, rng));
      }
      write_worlds(ws, out);
      return 0;
    }

    if (*play) {
      auto w = parse_world(read_file(world_file));
      auto agent = make_agent(agent_spec, w.alphabet(), caps, derive_seed(seed, 1));
      auto life = play_life(*agent, WorldRun(w), caps, derive_seed(seed, 2));
      life.world_id = hex_id(world_id(w));
      write_out(out, serialize_life(life, w.alphabet()));
      std::cerr << agent->name() << ": " << outcome_line(life.counts) << ", success " << to_string(success(life.counts))
                << "\n";
      return 0;
    }

    if (*tree) {
      auto w = parse_world(read_file(world_file));
      auto t = build_multigame_tree(WorldRun(w), games, caps);
      auto v = max_sum(t);
      std::ostringstream s;
      dump_tree(s, t, &v);
      write_out(out, s.str());
      std::cerr << t.size() << " nodes, value " << to_string(v.root_value()) << "\n";
      return 0;
    }

    if (*best) {
      std::vector<WorldMachine> ws;
      for (const auto& f : world_files) ws.push_back(parse_world(read_file(f)));
      auto [s, v] = td5_best_strategy(ws, games, caps);
      std::ostringstream o;
      const auto& a = ws.front().alphabet();
      for (const auto& [h, x] : s.choices()) {
        if (h.empty()) o << "(start) ";
        for (Letter l : h) o << a.name(l) << " ";
        o << "-> " << a.name(x) << "\n";
      }
      write_out(out, o.str());
      std::cerr << "value " << to_string(v) << " over " << ws.size() << " worlds, " << s.size() << " choices\n";
      return 0;
    }

    if (*eval) {
      EvalConfig cfg = full ? EvalConfig::full_scale() : EvalConfig{};
      if (!full) {
        cfg.space = WorldSpaceSpec{parse_alphabet(alphabet_text), max_size, det, 1};
        cfg.caps = caps;
      }
      for (const auto& f : world_files) cfg.worlds.push_back(parse_world(read_file(f)));
      cfg.sample_count = samples;
      cfg.lives_per_world = lives;
      cfg.seed = seed;
      cfg.threshold = parse_rational(threshold);
      cfg.workers = workers;
      auto r = evaluate(agent_spec, cfg);
      if (!out.empty()) write_out(out, r.to_json().dump(2) + "\n");
      std::cout << "agent " << r.agent << ": mean " << to_string(r.mean) << " (" << to_double(r.mean) << "), 95% CI ["
                << r.ci_low << ", " << r.ci_high << "], " << r.n_ok << " worlds, " << r.n_failed << " failed, "
                << (r.pass ? "above" : "not above") << " " << threshold << "\n";
      for (const auto& a : r.annotations) std::cout << "  note: " << a << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
