#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tmw/error.hpp"

namespace tmw {

/// A tape symbol. Letters are indices into an Alphabet's symbol table.
enum class Letter : std::uint8_t {};

constexpr std::size_t index(Letter l) { return static_cast<std::size_t>(l); }
constexpr Letter letter(std::size_t i) { return static_cast<Letter>(i); }

enum class Dir : std::int8_t { Left = -1, Right = 1 };

constexpr char dir_char(Dir d) { return d == Dir::Left ? 'L' : 'R'; }

enum class Outcome : std::uint8_t { Victory, Loss, Draw };

constexpr std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::Victory: return "victory";
    case Outcome::Loss: return "loss";
    case Outcome::Draw: return "draw";
  }
  return "?";
}

/// The letters a world machine may write on an output tuple, described only
/// by tape size. Worldspace counting works on this when no full alphabet is
/// needed.
struct TapeSignature {
  std::size_t letters = 0;
  std::vector<bool> output_ok;  // per letter: may appear as a percept

  std::size_t output_count() const {
    return static_cast<std::size_t>(std::count(output_ok.begin(), output_ok.end(), true));
  }
};

/// Percepts (sigma, containing the three final letters), actions (omega), the
/// blank, and optional agent-only service letters.
///
/// Letter layout is fixed: sigma in the given order, then omega, then the
/// blank, then service letters. Canonical orders everywhere (enumeration,
/// tie-breaking) follow this numbering.
class Alphabet {
 public:
  Alphabet() = default;

  static Alphabet make(std::vector<std::string> sigma, std::vector<std::string> omega,
                       std::string blank = "_", std::vector<std::string> service = {},
                       std::string victory = "victory", std::string loss = "loss",
                       std::string draw = "draw") {
    Alphabet a;
    a.n_sigma_ = sigma.size();
    a.n_omega_ = omega.size();
    a.names_ = std::move(sigma);
    a.names_.insert(a.names_.end(), omega.begin(), omega.end());
    a.names_.push_back(std::move(blank));
    a.names_.insert(a.names_.end(), service.begin(), service.end());

    std::set<std::string_view> seen;
    for (const auto& n : a.names_) {
      if (n.empty() || n.find_first_of(" \t\r\n#") != std::string::npos)
        throw Error(Errc::BadAlphabet, "illegal letter name '" + n + "'");
      if (!seen.insert(n).second) throw Error(Errc::BadAlphabet, "letter '" + n + "' declared twice");
    }
    if (a.names_.size() > 255) throw Error(Errc::BadAlphabet, "too many letters");

    auto find_final = [&](const std::string& name) {
      auto l = a.find(name);
      if (!l || !a.is_sigma(*l))
        throw Error(Errc::BadAlphabet, "final letter '" + name + "' must be a percept letter");
      return *l;
    };
    a.victory_ = find_final(victory);
    a.loss_ = find_final(loss);
    a.draw_ = find_final(draw);
    if (a.victory_ == a.loss_ || a.victory_ == a.draw_ || a.loss_ == a.draw_)
      throw Error(Errc::BadAlphabet, "final letters must be distinct");
    if (a.n_sigma_ < 5)
      throw Error(Errc::BadAlphabet, "need at least two non-final percept letters");
    if (a.n_omega_ < 2) throw Error(Errc::BadAlphabet, "need at least two action letters");
    return a;
  }

  /// sigma = {victory, loss, draw, o1, o2}, omega = {a, b}, blank '_'.
  static Alphabet minimal() {
    return make({"victory", "loss", "draw", "o1", "o2"}, {"a", "b"});
  }

  /// Same letters plus agent service letters.
  Alphabet with_service(const std::vector<std::string>& service) const {
    std::vector<std::string> s(names_.begin(), names_.begin() + static_cast<long>(n_sigma_));
    std::vector<std::string> o(names_.begin() + static_cast<long>(n_sigma_),
                               names_.begin() + static_cast<long>(n_sigma_ + n_omega_));
    auto svc = service_names();
    svc.insert(svc.end(), service.begin(), service.end());
    return make(std::move(s), std::move(o), names_[n_sigma_ + n_omega_], std::move(svc),
                name(victory_), name(loss_), name(draw_));
  }

  std::size_t sigma_size() const { return n_sigma_; }
  std::size_t omega_size() const { return n_omega_; }
  /// |sigma ∪ omega ∪ {blank}|: the world tape alphabet.
  std::size_t world_tape_size() const { return n_sigma_ + n_omega_ + 1; }
  /// Including service letters.
  std::size_t tape_size() const { return names_.size(); }
  std::size_t service_size() const { return names_.size() - world_tape_size(); }

  Letter blank() const { return letter(n_sigma_ + n_omega_); }
  Letter victory() const { return victory_; }
  Letter loss() const { return loss_; }
  Letter draw() const { return draw_; }

  Letter sigma(std::size_t i) const { return letter(i); }
  Letter omega(std::size_t i) const { return letter(n_sigma_ + i); }
  std::size_t omega_index(Letter l) const { return index(l) - n_sigma_; }

  bool contains(Letter l) const { return index(l) < names_.size(); }
  bool is_sigma(Letter l) const { return index(l) < n_sigma_; }
  bool is_omega(Letter l) const { return index(l) >= n_sigma_ && index(l) < n_sigma_ + n_omega_; }
  bool is_final(Letter l) const { return l == victory_ || l == loss_ || l == draw_; }
  bool in_world_tape(Letter l) const { return index(l) < world_tape_size(); }

  std::optional<Outcome> outcome(Letter l) const {
    if (l == victory_) return Outcome::Victory;
    if (l == loss_) return Outcome::Loss;
    if (l == draw_) return Outcome::Draw;
    return std::nullopt;
  }

  Letter final_letter(Outcome o) const {
    switch (o) {
      case Outcome::Victory: return victory_;
      case Outcome::Loss: return loss_;
      case Outcome::Draw: return draw_;
    }
    return draw_;
  }

  const std::string& name(Letter l) const { return names_.at(index(l)); }

  std::optional<Letter> find(std::string_view name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
      if (names_[i] == name) return letter(i);
    return std::nullopt;
  }

  std::vector<std::string> sigma_names() const {
    return {names_.begin(), names_.begin() + static_cast<long>(n_sigma_)};
  }
  std::vector<std::string> omega_names() const {
    return {names_.begin() + static_cast<long>(n_sigma_),
            names_.begin() + static_cast<long>(n_sigma_ + n_omega_)};
  }
  std::vector<std::string> service_names() const {
    return {names_.begin() + static_cast<long>(world_tape_size()), names_.end()};
  }

  TapeSignature world_signature() const {
    TapeSignature sig{world_tape_size(), std::vector<bool>(world_tape_size(), false)};
    for (std::size_t i = 0; i < n_sigma_; ++i) sig.output_ok[i] = true;
    return sig;
  }

  /// "sigma=victory,loss,draw,o1,o2;omega=a,b;blank=_" (finals named
  /// victory/loss/draw unless given as finals=v,l,d).
  static Alphabet parse(std::string_view text);

  std::string describe() const;

  bool operator==(const Alphabet&) const = default;

 private:
  std::vector<std::string> names_;
  std::size_t n_sigma_ = 0;
  std::size_t n_omega_ = 0;
  Letter victory_{}, loss_{}, draw_{};
};

namespace detail {

inline std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto pos = text.find(sep, start);
    if (pos == std::string_view::npos) pos = text.size();
    out.emplace_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

inline std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace detail

inline Alphabet Alphabet::parse(std::string_view text) {
  std::vector<std::string> sigma, omega, service, finals{"victory", "loss", "draw"};
  std::string blank = "_";
  for (const auto& part : detail::split(text, ';')) {
    auto item = detail::trim(part);
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos) throw Error(Errc::ParseError, "alphabet item without '=': " + item);
    auto key = detail::trim(item.substr(0, eq));
    auto values = detail::split(item.substr(eq + 1), ',');
    for (auto& v : values) v = detail::trim(v);
    if (key == "sigma") sigma = values;
    else if (key == "omega") omega = values;
    else if (key == "blank") blank = values.at(0);
    else if (key == "service") service = values;
    else if (key == "finals") {
      if (values.size() != 3) throw Error(Errc::ParseError, "finals needs three letters");
      finals = values;
    } else {
      throw Error(Errc::ParseError, "unknown alphabet key '" + key + "'");
    }
  }
  return make(sigma, omega, blank, service, finals[0], finals[1], finals[2]);
}

inline std::string Alphabet::describe() const {
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ",") + x;
    return s;
  };
  std::string out = "sigma=" + join(sigma_names()) + ";omega=" + join(omega_names()) +
                    ";blank=" + names_[n_sigma_ + n_omega_];
  if (victory_ != letter(0) || loss_ != letter(1) || draw_ != letter(2) || name(victory_) != "victory" ||
      name(loss_) != "loss" || name(draw_) != "draw")
    out += ";finals=" + name(victory_) + "," + name(loss_) + "," + name(draw_);
  if (service_size() > 0) out += ";service=" + join(service_names());
  return out;
}

}  // namespace tmw
