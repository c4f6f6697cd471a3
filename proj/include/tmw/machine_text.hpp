#pragma once

// Machine text format, shared by agent and world files.
//
//   # comment
//   states 2 start p0 sigma victory loss draw o1 o2 omega a b [blank _]
//          [finals victory loss draw] [service m] [cap 5000]
//   p0 a -> p1 a R
//   p1 _ -> p0 victory L
//
// The header is the first non-comment line. States are p0 .. p{N-1}. Every
// following line is one tuple `q x -> q' y D` with D in {L, R}. Tokens are
// separated by whitespace; '#' starts a comment anywhere on a line.
// `service` and `cap` are only meaningful for agent machines.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "tmw/agent_machine.hpp"
#include "tmw/machine.hpp"
#include "tmw/world_machine.hpp"

namespace tmw {

namespace detail {

inline std::vector<std::string> tokens(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

inline bool is_header_key(const std::string& s) {
  return s == "states" || s == "start" || s == "sigma" || s == "omega" || s == "blank" ||
         s == "finals" || s == "service" || s == "cap";
}

inline Error parse_error(int line, const std::string& msg) {
  return Error(Errc::ParseError, "line " + std::to_string(line) + ": " + msg);
}

}  // namespace detail

inline MachineDescription parse_machine(std::string_view text) {
  MachineDescription d;
  bool have_header = false;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    auto tok = detail::tokens(line);
    if (tok.empty()) continue;

    if (!have_header) {
      if (tok[0] != "states") throw detail::parse_error(line_no, "expected header starting with 'states'");
      std::vector<std::string> sigma, omega, service, finals{"victory", "loss", "draw"};
      std::string blank = "_";
      bool have_n = false;
      for (std::size_t i = 0; i < tok.size();) {
        const std::string key = tok[i++];
        if (!detail::is_header_key(key)) throw detail::parse_error(line_no, "unknown header key '" + key + "'");
        std::vector<std::string> values;
        while (i < tok.size() && !detail::is_header_key(tok[i])) values.push_back(tok[i++]);
        auto one = [&]() -> const std::string& {
          if (values.size() != 1) throw detail::parse_error(line_no, "'" + key + "' takes one value");
          return values[0];
        };
        if (key == "states") {
          try {
            d.n_states = std::stoul(one());
          } catch (const std::logic_error&) {
            throw detail::parse_error(line_no, "bad state count '" + values.at(0) + "'");
          }
          have_n = true;
        } else if (key == "start") {
          d.start = one();
        } else if (key == "sigma") {
          sigma = values;
        } else if (key == "omega") {
          omega = values;
        } else if (key == "blank") {
          blank = one();
        } else if (key == "finals") {
          if (values.size() != 3) throw detail::parse_error(line_no, "'finals' takes three letters");
          finals = values;
        } else if (key == "service") {
          service = values;
        } else if (key == "cap") {
          try {
            d.small_step_cap = std::stoull(one());
          } catch (const std::logic_error&) {
            throw detail::parse_error(line_no, "bad cap '" + values.at(0) + "'");
          }
        }
      }
      if (!have_n) throw detail::parse_error(line_no, "missing state count");
      try {
        d.alphabet = Alphabet::make(sigma, omega, blank, service, finals[0], finals[1], finals[2]);
      } catch (const Error& e) {
        throw detail::parse_error(line_no, e.what());
      }
      have_header = true;
      continue;
    }

    if (tok.size() != 6 || tok[2] != "->")
      throw detail::parse_error(line_no, "expected 'q x -> q2 y D'");
    MachineDescription::Rule r;
    r.from = tok[0];
    r.read = tok[1];
    r.to = tok[3];
    r.write = tok[4];
    if (tok[5] == "L") r.dir = Dir::Left;
    else if (tok[5] == "R") r.dir = Dir::Right;
    else throw detail::parse_error(line_no, "direction must be L or R, got '" + tok[5] + "'");
    r.line = line_no;
    d.rules.push_back(std::move(r));
  }
  if (!have_header) throw Error(Errc::ParseError, "empty machine file");
  return d;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::InvalidConfig, "cannot open '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline MachineDescription load_machine(const std::string& path) { return parse_machine(read_file(path)); }

namespace detail {

inline std::string header_text(const Alphabet& a, std::size_t n_states, State start) {
  std::ostringstream o;
  o << "states " << n_states << " start " << state_name(start) << " sigma";
  for (const auto& s : a.sigma_names()) o << ' ' << s;
  o << " omega";
  for (const auto& s : a.omega_names()) o << ' ' << s;
  o << " blank " << a.name(a.blank());
  if (a.name(a.victory()) != "victory" || a.name(a.loss()) != "loss" || a.name(a.draw()) != "draw")
    o << " finals " << a.name(a.victory()) << ' ' << a.name(a.loss()) << ' ' << a.name(a.draw());
  auto svc = a.service_names();
  if (!svc.empty()) {
    o << " service";
    for (const auto& s : svc) o << ' ' << s;
  }
  return o.str();
}

inline void tuple_text(std::ostream& o, const Alphabet& a, const Tuple& t) {
  o << state_name(t.from) << ' ' << a.name(t.read) << " -> " << state_name(t.to) << ' ' << a.name(t.write)
    << ' ' << dir_char(t.dir) << '\n';
}

}  // namespace detail

/// Canonical text: header, then tuples in canonical order.
inline std::string to_text(const WorldMachine& m) {
  std::ostringstream o;
  o << detail::header_text(m.alphabet(), m.n_states(), m.start()) << '\n';
  for (const auto& t : m.tuples()) detail::tuple_text(o, m.alphabet(), t);
  return o.str();
}

inline std::string to_text(const AgentMachine& m) {
  std::ostringstream o;
  o << detail::header_text(m.alphabet(), m.n_states(), m.start());
  if (m.small_step_cap()) o << " cap " << *m.small_step_cap();
  o << '\n';
  for (const auto& t : m.rules()) detail::tuple_text(o, m.alphabet(), t);
  return o.str();
}

/// FNV-1a over the canonical text; the identity recorded in reports.
inline std::uint64_t world_id(const WorldMachine& m) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : to_text(m)) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex_id(std::uint64_t id) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, id >>= 4) s[static_cast<std::size_t>(i)] = digits[id & 15];
  return s;
}

inline WorldMachine parse_world(std::string_view text) { return WorldMachine::from_description(parse_machine(text)); }
inline AgentMachine parse_agent(std::string_view text) { return AgentMachine::from_description(parse_machine(text)); }

}  // namespace tmw
