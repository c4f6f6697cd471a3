#pragma once

#include <cstdint>
#include <random>

#include "tmw/rational.hpp"

namespace tmw {

/// splitmix64 finalizer; used for all seed derivation.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives a child seed from a parent seed and a stream label.
constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t label) {
  return mix64(mix64(parent) ^ mix64(label + 0x632be59bd9b4e019ULL));
}

/// Bit-reproducible random stream. std::uniform_int_distribution is
/// implementation-defined, so draws are done by hand.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  /// Uniform in [0, n) for big n.
  BigInt below(const BigInt& n) {
    const auto bits = boost::multiprecision::msb(n) + 1;
    for (;;) {
      BigInt x = 0;
      for (std::size_t got = 0; got < bits; got += 64) x = (x << 64) | BigInt(engine_());
      x &= (BigInt(1) << bits) - 1;
      if (x < n) return x;
    }
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// True with exact probability num/den.
  bool bernoulli(const Rational& p) {
    if (p <= 0) return false;
    if (p >= 1) return true;
    const BigInt& num = boost::multiprecision::numerator(p);
    const BigInt& den = boost::multiprecision::denominator(p);
    return below(den) < num;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace tmw
