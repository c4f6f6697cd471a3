#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "tmw/alphabet.hpp"

namespace tmw {

/// Two-sided tape, blank everywhere except where written. Cells are stored
/// in two growable arrays: [0, +inf) and (-inf, -1].
class Tape {
 public:
  Tape() = default;
  explicit Tape(Letter blank) : blank_(blank) {}

  Letter blank() const { return blank_; }

  Letter read(std::int64_t pos) const {
    if (pos >= 0) {
      auto i = static_cast<std::size_t>(pos);
      return i < right_.size() ? right_[i] : blank_;
    }
    auto i = static_cast<std::size_t>(-pos - 1);
    return i < left_.size() ? left_[i] : blank_;
  }

  void write(std::int64_t pos, Letter l) {
    auto& side = pos >= 0 ? right_ : left_;
    auto i = pos >= 0 ? static_cast<std::size_t>(pos) : static_cast<std::size_t>(-pos - 1);
    if (i >= side.size()) {
      if (l == blank_) return;
      side.resize(i + 1, blank_);
    }
    side[i] = l;
  }

  void clear() {
    left_.clear();
    right_.clear();
  }

  /// Lowest and one-past-highest written position (may include blanks).
  std::int64_t lo() const { return -static_cast<std::int64_t>(left_.size()); }
  std::int64_t hi() const { return static_cast<std::int64_t>(right_.size()); }

  /// Content equality: trailing blanks do not count.
  bool operator==(const Tape& o) const {
    if (blank_ != o.blank_) return false;
    auto lo_ = std::min(lo(), o.lo());
    auto hi_ = std::max(hi(), o.hi());
    for (auto p = lo_; p < hi_; ++p)
      if (read(p) != o.read(p)) return false;
    return true;
  }

  std::size_t hash() const {
    std::size_t h = 1469598103934665603ULL;
    auto lo_ = lo(), hi_ = hi();
    while (lo_ < hi_ && read(lo_) == blank_) ++lo_;
    while (hi_ > lo_ && read(hi_ - 1) == blank_) --hi_;
    for (auto p = lo_; p < hi_; ++p) {
      h ^= static_cast<std::size_t>(p) * 31 + index(read(p));
      h *= 1099511628211ULL;
    }
    return h;
  }

 private:
  Letter blank_{};
  std::vector<Letter> right_;
  std::vector<Letter> left_;
};

}  // namespace tmw
