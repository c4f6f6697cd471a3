#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <vector>

#include "tmw/rational.hpp"
#include "tmw/rng.hpp"
#include "tmw/world_machine.hpp"

namespace tmw {

enum class Determinism : std::uint8_t { DeterministicOnly, All };

struct WorldSpaceSpec {
  Alphabet alphabet = Alphabet::minimal();
  std::size_t max_size = 2;
  Determinism determinism = Determinism::DeterministicOnly;
  std::uint64_t budget = 10'000'000;  // most machines enumerate_worlds may yield
};

/// (2pa)^(pa): every (state, letter) row picks any (state, letter, direction).
inline BigInt count_raw_deterministic(std::uint64_t p, std::uint64_t a) {
  if (p == 0 || a == 0) throw Error(Errc::InvalidConfig, "p and a must be positive");
  return boost::multiprecision::pow(BigInt(2 * p * a), static_cast<unsigned>(p * a));
}

namespace detail {

/// Options for one row, in canonical (lexicographic tuple-vector) order.
/// Option cost is the group size minus one. `from`/`read` are left zero.
inline std::vector<std::vector<Tuple>> row_options(const TapeSignature& sig, std::size_t n_states,
                                                   std::size_t max_cost) {
  std::vector<std::vector<Tuple>> out;
  std::vector<Letter> outputs;
  for (std::size_t l = 0; l < sig.letters; ++l)
    if (sig.output_ok[l]) outputs.push_back(letter(l));

  for (std::size_t t = 0; t < n_states; ++t)
    for (std::size_t w = 0; w < sig.letters; ++w) {
      if (t == 0 && !sig.output_ok[w]) continue;
      for (Dir d : {Dir::Left, Dir::Right}) out.push_back({Tuple{State{}, Letter{}, state(t), letter(w), d}});
    }

  // groups of k >= 2 output tuples with distinct letters
  const std::size_t max_k = std::min(outputs.size(), max_cost + 1);
  for (std::size_t k = 2; k <= max_k; ++k) {
    std::vector<std::size_t> pick(k);
    std::function<void(std::size_t, std::size_t)> choose = [&](std::size_t pos, std::size_t from) {
      if (pos == k) {
        for (std::uint64_t dirs = 0; dirs < (std::uint64_t{1} << k); ++dirs) {
          std::vector<Tuple> g;
          for (std::size_t i = 0; i < k; ++i)
            g.push_back({State{}, Letter{}, state(0), outputs[pick[i]],
                         (dirs >> (k - 1 - i)) & 1 ? Dir::Right : Dir::Left});
          out.push_back(std::move(g));
        }
        return;
      }
      for (std::size_t i = from; i < outputs.size(); ++i) {
        pick[pos] = i;
        choose(pos + 1, i + 1);
      }
    };
    choose(0, 0);
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline BigInt binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  BigInt r = 1;
  for (std::size_t i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

/// Coefficients of the per-row option polynomial: [j] = options of cost j.
inline std::vector<BigInt> row_polynomial(const TapeSignature& sig, std::size_t n_states, std::size_t max_cost) {
  const std::size_t outs = sig.output_count();
  std::vector<BigInt> p(max_cost + 1, BigInt(0));
  p[0] = BigInt(2 * outs + 2 * sig.letters * (n_states - 1));
  for (std::size_t j = 1; j <= max_cost; ++j) p[j] = binomial(outs, j + 1) * (BigInt(1) << (j + 1));
  return p;
}

inline std::vector<BigInt> poly_mul(const std::vector<BigInt>& a, const std::vector<BigInt>& b, std::size_t deg) {
  std::vector<BigInt> c(deg + 1, BigInt(0));
  for (std::size_t i = 0; i < a.size() && i <= deg; ++i)
    for (std::size_t j = 0; j < b.size() && i + j <= deg; ++j) c[i + j] += a[i] * b[j];
  return c;
}

/// pow[r] = P^r truncated to degree `deg`, for r = 0 .. rows.
inline std::vector<std::vector<BigInt>> poly_powers(const std::vector<BigInt>& p, std::size_t rows,
                                                    std::size_t deg) {
  std::vector<std::vector<BigInt>> pw(rows + 1);
  pw[0].assign(deg + 1, BigInt(0));
  pw[0][0] = 1;
  for (std::size_t r = 1; r <= rows; ++r) pw[r] = poly_mul(pw[r - 1], p, deg);
  return pw;
}

inline BigInt prefix_sum(const std::vector<BigInt>& c, std::size_t upto) {
  BigInt s = 0;
  for (std::size_t i = 0; i <= upto && i < c.size(); ++i) s += c[i];
  return s;
}

inline std::size_t max_cost(std::size_t max_size, std::size_t n_states, Determinism det) {
  return det == Determinism::DeterministicOnly ? 0 : max_size - n_states;
}

}  // namespace detail

/// Valid machines with exactly `n_states` states and size at most `max_size`.
inline BigInt count_worlds(const TapeSignature& sig, std::size_t n_states, std::size_t max_size, Determinism det) {
  if (n_states == 0 || n_states > max_size) return 0;
  const std::size_t b = detail::max_cost(max_size, n_states, det);
  const auto p = detail::row_polynomial(sig, n_states, b);
  const auto pw = detail::poly_powers(p, n_states * sig.letters, b);
  return detail::prefix_sum(pw.back(), b);
}

/// Valid machines of size at most `max_size`, over all state counts.
inline BigInt count_worlds(const TapeSignature& sig, std::size_t max_size, Determinism det) {
  BigInt total = 0;
  for (std::size_t n = 1; n <= max_size; ++n) total += count_worlds(sig, n, max_size, det);
  return total;
}

/// Valid deterministic machines with p states: (2|Σ| + 2a(p-1))^(pa).
inline BigInt count_valid_deterministic(const TapeSignature& sig, std::size_t p) {
  return count_worlds(sig, p, p, Determinism::DeterministicOnly);
}

/// Calls `fn(n_states, tuples)` for every valid machine of size at most
/// `max_size`, start state p0, in canonical order: by state count, then by
/// the transition table flattened in (state, letter) row-major order. Stops
/// when `fn` returns false. Returns the number of machines visited.
inline std::uint64_t for_each_world_table(const TapeSignature& sig, std::size_t max_size, Determinism det,
                                          const std::function<bool(std::size_t, const std::vector<Tuple>&)>& fn) {
  std::uint64_t visited = 0;
  bool stop = false;
  for (std::size_t n = 1; n <= max_size && !stop; ++n) {
    const std::size_t budget = detail::max_cost(max_size, n, det);
    const auto options = detail::row_options(sig, n, budget);
    const std::size_t rows = n * sig.letters;
    std::vector<Tuple> table;
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t row, std::size_t left) {
      if (stop) return;
      if (row == rows) {
        ++visited;
        if (!fn(n, table)) stop = true;
        return;
      }
      const State s = state(row / sig.letters);
      const Letter l = letter(row % sig.letters);
      for (const auto& opt : options) {
        if (opt.size() - 1 > left) continue;
        const std::size_t mark = table.size();
        for (Tuple t : opt) {
          t.from = s;
          t.read = l;
          table.push_back(t);
        }
        rec(row + 1, left - (opt.size() - 1));
        table.resize(mark);
        if (stop) return;
      }
    };
    rec(0, budget);
  }
  return visited;
}

/// Every valid world of size at most spec.max_size, in canonical order.
/// Machines are not merged by behavior: a behavior realized by many tables
/// counts many times. BudgetExceeded past spec.budget machines.
inline std::vector<WorldMachine> enumerate_worlds(const WorldSpaceSpec& spec) {
  if (spec.alphabet.service_size() != 0) throw Error(Errc::BadAlphabet, "world machines have no service letters");
  std::vector<WorldMachine> out;
  if (spec.max_size == 0) return out;
  const BigInt total = count_worlds(spec.alphabet.world_signature(), spec.max_size, spec.determinism);
  if (total > spec.budget)
    throw Error(Errc::BudgetExceeded, "world space has " + total.str() + " machines, budget is " +
                                          std::to_string(spec.budget));
  for_each_world_table(spec.alphabet.world_signature(), spec.max_size, spec.determinism,
                       [&](std::size_t n, const std::vector<Tuple>& t) {
                         out.push_back(WorldMachine::create(spec.alphabet, n, state(0), t));
                         return true;
                       });
  return out;
}

/// Exactly uniform over valid tables of size at most max_size: the state
/// count and then each row's option are drawn in proportion to the number of
/// completions, so no draw is ever rejected.
inline std::vector<Tuple> sample_world_table(const TapeSignature& sig, std::size_t max_size, Determinism det,
                                             Rng& rng, std::size_t& n_states) {
  if (max_size == 0) throw Error(Errc::InvalidConfig, "max_size must be at least 1");
  std::vector<BigInt> per_n(max_size + 1, BigInt(0));
  BigInt total = 0;
  for (std::size_t n = 1; n <= max_size; ++n) {
    per_n[n] = count_worlds(sig, n, max_size, det);
    total += per_n[n];
  }
  BigInt r = rng.below(total);
  std::size_t n = 1;
  for (; r >= per_n[n]; ++n) r -= per_n[n];
  n_states = n;

  const std::size_t budget = detail::max_cost(max_size, n, det);
  const std::size_t rows = n * sig.letters;
  const auto p = detail::row_polynomial(sig, n, budget);
  const auto pw = detail::poly_powers(p, rows, budget);
  const auto options = detail::row_options(sig, n, budget);
  std::vector<std::vector<const std::vector<Tuple>*>> by_cost(budget + 1);
  for (const auto& o : options) by_cost[o.size() - 1].push_back(&o);

  std::vector<Tuple> table;
  std::size_t left = budget;
  for (std::size_t row = 0; row < rows; ++row) {
    const auto& rest = pw[rows - row - 1];
    std::vector<BigInt> weight(left + 1);
    BigInt sum = 0;
    for (std::size_t j = 0; j <= left; ++j) {
      weight[j] = p[j] * detail::prefix_sum(rest, left - j);
      sum += weight[j];
    }
    BigInt x = rng.below(sum);
    std::size_t j = 0;
    for (; x >= weight[j]; ++j) x -= weight[j];
    const auto& pool = by_cost[j];
    for (Tuple t : *pool[rng.below(static_cast<std::uint64_t>(pool.size()))]) {
      t.from = state(row / sig.letters);
      t.read = letter(row % sig.letters);
      table.push_back(t);
    }
    left -= j;
  }
  return table;
}

inline WorldMachine sample_world(const WorldSpaceSpec& spec, Rng& rng) {
  std::size_t n = 0;
  auto t = sample_world_table(spec.alphabet.world_signature(), spec.max_size, spec.determinism, rng, n);
  return WorldMachine::create(spec.alphabet, n, state(0), std::move(t));
}

}  // namespace tmw
