#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "tmw/game.hpp"
#include "tmw/rational.hpp"
#include "tmw/world_machine.hpp"

namespace tmw {

enum class NodeKind : std::uint8_t { Ai, World, Leaf };

using NodeId = std::uint32_t;
inline constexpr NodeId no_node = std::numeric_limits<NodeId>::max();

struct TreeNode {
  NodeKind kind = NodeKind::Ai;
  std::uint32_t depth = 0;
  NodeId parent = no_node;
  Letter arc{};              // letter on the incoming arc
  Rational probability{1};   // incoming arc probability (children of world nodes)
  Rational reward{0};        // payoff / n_games of a game that ended on the incoming arc
  NodeId first_child = 0;
  std::uint32_t n_children = 0;
  std::uint32_t game = 0;    // 0-based game this node belongs to
};

/// A game tree with Ai, World, and Leaf vertices. Children of a node are
/// stored contiguously, Ai children in omega order and World children in
/// sigma order, and every child id is greater than its parent's id.
class GameTree {
 public:
  GameTree() = default;
  GameTree(Alphabet alphabet, std::uint32_t n_games) : alphabet_(std::move(alphabet)), n_games_(n_games) {}

  const Alphabet& alphabet() const { return alphabet_; }
  std::uint32_t n_games() const { return n_games_; }
  std::size_t size() const { return nodes_.size(); }
  NodeId root() const { return 0; }

  const TreeNode& node(NodeId id) const { return nodes_[id]; }
  TreeNode& node(NodeId id) { return nodes_[id]; }

  std::span<const TreeNode> nodes() const { return nodes_; }

  /// Ids of the children of `id`.
  std::vector<NodeId> children(NodeId id) const {
    std::vector<NodeId> out(nodes_[id].n_children);
    for (std::uint32_t i = 0; i < out.size(); ++i) out[i] = nodes_[id].first_child + i;
    return out;
  }

  /// Child reached over the arc labelled `l`, if any.
  std::optional<NodeId> child(NodeId id, Letter l) const {
    const auto& n = nodes_[id];
    for (NodeId c = n.first_child; c < n.first_child + n.n_children; ++c)
      if (nodes_[c].arc == l) return c;
    return std::nullopt;
  }

  /// Arc letters from the root down to `id`: action, percept, action, ...
  std::vector<Letter> history(NodeId id) const {
    std::vector<Letter> h;
    for (; id != root(); id = nodes_[id].parent) h.push_back(nodes_[id].arc);
    std::reverse(h.begin(), h.end());
    return h;
  }

  NodeId add(TreeNode n) {
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
  }

 private:
  Alphabet alphabet_;
  std::uint32_t n_games_ = 1;
  std::vector<TreeNode> nodes_;
};

struct TreeLimits {
  std::size_t node_budget = 1'000'000;
};

/// A world state with a probability mass: an Ai vertex stands for a
/// distribution over the world states consistent with the history so far.
template <WorldModel W>
struct Weighted {
  W run;
  Rational weight;
};

namespace detail {

template <WorldModel W>
void add_weighted(std::vector<Weighted<W>>& belief, W run, const Rational& w) {
  for (auto& b : belief)
    if (b.run == run) {
      b.weight += w;
      return;
    }
  belief.push_back({std::move(run), w});
}

template <WorldModel W>
class TreeBuilder {
 public:
  TreeBuilder(GameTree& tree, const Caps& caps, TreeLimits limits)
      : tree_(tree), caps_(caps), limits_(limits), a_(tree.alphabet()) {}

  void expand_ai(NodeId ai, std::vector<Weighted<W>> belief, std::uint32_t game, std::uint32_t step) {
    const auto n_omega = static_cast<std::uint32_t>(a_.omega_size());
    const NodeId first = next_id();
    reserve(n_omega);
    for (std::uint32_t i = 0; i < n_omega; ++i) {
      TreeNode w;
      w.kind = NodeKind::World;
      w.depth = tree_.node(ai).depth + 1;
      w.parent = ai;
      w.arc = a_.omega(i);
      w.game = game;
      tree_.add(std::move(w));
    }
    tree_.node(ai).first_child = first;
    tree_.node(ai).n_children = n_omega;
    for (std::uint32_t i = 0; i < n_omega; ++i) expand_world(first + i, belief, game, step);
  }

 private:
  NodeId next_id() const { return static_cast<NodeId>(tree_.size()); }

  void reserve(std::size_t more) {
    if (tree_.size() + more > limits_.node_budget)
      throw Error(Errc::TreeTooLarge, "game tree exceeds " + std::to_string(limits_.node_budget) + " nodes");
  }

  void expand_world(NodeId wn, const std::vector<Weighted<W>>& belief, std::uint32_t game,
                    std::uint32_t step) {
    const Letter action = tree_.node(wn).arc;
    const bool at_cap = step >= caps_.game_big_step_cap;
    const WorldLimits lim = caps_.world_limits();

    // percept -> (mass, successor belief)
    std::map<Letter, std::pair<Rational, std::vector<Weighted<W>>>> by_percept;
    Rational total = 0;
    for (const auto& b : belief) {
      for (auto& br : b.run.outcomes(action, lim, at_cap)) {
        Rational w = b.weight * br.probability;
        auto& slot = by_percept[br.percept];
        slot.first += w;
        total += w;
        add_weighted(slot.second, std::move(br.next), w);
      }
    }

    const NodeId first = next_id();
    reserve(by_percept.size());
    const std::uint32_t depth = tree_.node(wn).depth + 1;
    for (const auto& [percept, entry] : by_percept) {
      TreeNode c;
      c.depth = depth;
      c.parent = wn;
      c.arc = percept;
      c.probability = entry.first / total;
      c.game = game;
      if (auto o = a_.outcome(percept)) {
        c.reward = payoff(*o) / tree_.n_games();
        c.kind = game + 1 == tree_.n_games() ? NodeKind::Leaf : NodeKind::Ai;
        if (c.kind == NodeKind::Ai) c.game = game + 1;
      } else {
        c.kind = NodeKind::Ai;
      }
      tree_.add(std::move(c));
    }
    tree_.node(wn).first_child = first;
    tree_.node(wn).n_children = static_cast<std::uint32_t>(by_percept.size());

    NodeId id = first;
    for (auto& [percept, entry] : by_percept) {
      auto& [mass, next] = entry;
      if (tree_.node(id).kind == NodeKind::Ai) {
        for (auto& b : next) b.weight /= mass;
        if (a_.is_final(percept)) {
          if (caps_.reset_world_each_game) {
            std::vector<Weighted<W>> fresh;
            for (auto& b : next) {
              b.run.reset();
              add_weighted(fresh, std::move(b.run), b.weight);
            }
            next = std::move(fresh);
          }
          expand_ai(id, std::move(next), game + 1, 1);
        } else {
          expand_ai(id, std::move(next), game, step + 1);
        }
      }
      ++id;
    }
  }

  GameTree& tree_;
  const Caps& caps_;
  TreeLimits limits_;
  const Alphabet& a_;
};

}  // namespace detail

/// Tree of `n_games` consecutive games starting from a weighted set of world
/// states. Each Ai vertex carries the world states consistent with its
/// history; a World vertex has one child per percept reachable from any of
/// them, with the conditional probability of that percept. Percepts that
/// cannot occur are pruned. Game g+1 starts where game g left the world.
template <WorldModel W>
GameTree build_belief_tree(std::vector<Weighted<W>> belief, const Caps& caps, std::uint32_t n_games = 1,
                           TreeLimits limits = {}) {
  caps.validate();
  if (belief.empty()) throw Error(Errc::InvalidConfig, "no world states");
  if (n_games == 0) throw Error(Errc::InvalidConfig, "at least one game");
  Rational total = 0;
  for (const auto& b : belief) total += b.weight;
  if (total <= 0) throw Error(Errc::InvalidConfig, "world weights must be positive");
  std::vector<Weighted<W>> norm;
  for (auto& b : belief) detail::add_weighted(norm, std::move(b.run), b.weight / total);

  GameTree tree(norm.front().run.alphabet(), n_games);
  tree.add(TreeNode{});
  detail::TreeBuilder<W>(tree, caps, limits).expand_ai(tree.root(), std::move(norm), 0, 1);
  return tree;
}

/// The tree of this game: one game from the given world state.
template <WorldModel W>
GameTree build_tree_of_this_game(const W& root, const Caps& caps, TreeLimits limits = {}) {
  return build_belief_tree<W>({{root, Rational(1)}}, caps, 1, limits);
}

/// Tree of n consecutive games: every leaf of the k-game tree is replaced by
/// the tree of the next game, rooted at the world state the leaf carries.
template <WorldModel W>
GameTree build_multigame_tree(const W& root, std::uint32_t n_games, const Caps& caps, TreeLimits limits = {}) {
  return build_belief_tree<W>({{root, Rational(1)}}, caps, n_games, limits);
}

/// A strategy as a map from Ai-vertex history to the chosen action. It is
/// independent of any particular tree, so one strategy can be scored in
/// several worlds.
class Strategy {
 public:
  void set(std::vector<Letter> history, Letter action) { choices_[std::move(history)] = action; }

  std::optional<Letter> action(const std::vector<Letter>& history) const {
    auto it = choices_.find(history);
    if (it == choices_.end()) return std::nullopt;
    return it->second;
  }

  std::size_t size() const { return choices_.size(); }
  const std::map<std::vector<Letter>, Letter>& choices() const { return choices_; }

  bool operator==(const Strategy&) const = default;

 private:
  std::map<std::vector<Letter>, Letter> choices_;
};

/// Per-node choice: for Ai vertices the index of the kept child, -1 for
/// vertices the strategy never reaches.
using Choices = std::vector<std::int32_t>;

/// Converts tree-bound choices into a history-keyed strategy.
inline Strategy to_strategy(const GameTree& tree, const Choices& choices) {
  Strategy s;
  std::vector<NodeId> stack{tree.root()};
  while (!stack.empty()) {
    NodeId id = stack.back();
    stack.pop_back();
    const auto& n = tree.node(id);
    if (n.kind == NodeKind::Leaf) continue;
    if (n.kind == NodeKind::Ai) {
      const NodeId c = n.first_child + static_cast<NodeId>(choices.at(id));
      s.set(tree.history(id), tree.node(c).arc);
      stack.push_back(c);
    } else {
      for (NodeId c = n.first_child; c < n.first_child + n.n_children; ++c) stack.push_back(c);
    }
  }
  return s;
}

struct ValuedTree {
  std::vector<Rational> value;  // best possible success at each vertex
  Choices best;                 // argmax child at every Ai vertex
  Strategy strategy;            // best strategy from the root

  const Rational& root_value() const { return value.front(); }
};

/// Max-Sum: leaves are worth their payoff (1, 0, 1/2 per game, averaged over
/// the games in the tree), an Ai vertex the maximum of its children, a World
/// vertex the probability-weighted sum of its children. Ties go to the
/// lowest omega letter.
inline ValuedTree max_sum(const GameTree& tree) {
  ValuedTree vt;
  vt.value.assign(tree.size(), Rational(0));
  vt.best.assign(tree.size(), -1);
  for (NodeId id = static_cast<NodeId>(tree.size()); id-- > 0;) {
    const auto& n = tree.node(id);
    Rational v = 0;
    if (n.kind == NodeKind::Ai) {
      std::int32_t arg = 0;
      v = vt.value[n.first_child];
      for (std::uint32_t i = 1; i < n.n_children; ++i)
        if (vt.value[n.first_child + i] > v) {
          v = vt.value[n.first_child + i];
          arg = static_cast<std::int32_t>(i);
        }
      vt.best[id] = arg;
    } else if (n.kind == NodeKind::World) {
      for (NodeId c = n.first_child; c < n.first_child + n.n_children; ++c)
        v += tree.node(c).probability * vt.value[c];
    }
    vt.value[id] = n.reward + v;
  }
  vt.strategy = to_strategy(tree, vt.best);
  return vt;
}

/// Number of strategies: a sum over Ai children, a product over World
/// children.
inline BigInt count_strategies(const GameTree& tree) {
  std::vector<BigInt> count(tree.size());
  for (NodeId id = static_cast<NodeId>(tree.size()); id-- > 0;) {
    const auto& n = tree.node(id);
    if (n.kind == NodeKind::Leaf) {
      count[id] = 1;
    } else if (n.kind == NodeKind::Ai) {
      count[id] = 0;
      for (NodeId c = n.first_child; c < n.first_child + n.n_children; ++c) count[id] += count[c];
    } else {
      count[id] = 1;
      for (NodeId c = n.first_child; c < n.first_child + n.n_children; ++c) count[id] *= count[c];
    }
  }
  return count.front();
}

/// Calls `fn` once per strategy, depth-first in omega order. Stops early if
/// `fn` returns false. Returns the number of strategies visited.
inline std::uint64_t for_each_strategy(const GameTree& tree, const std::function<bool(const Choices&)>& fn) {
  Choices choices(tree.size(), -1);
  std::vector<NodeId> pending{tree.root()};
  std::uint64_t visited = 0;
  bool stop = false;

  std::function<void()> step = [&]() {
    if (stop) return;
    if (pending.empty()) {
      ++visited;
      if (!fn(choices)) stop = true;
      return;
    }
    const NodeId id = pending.back();
    pending.pop_back();
    const auto& n = tree.node(id);
    if (n.kind == NodeKind::Leaf) {
      step();
    } else if (n.kind == NodeKind::World) {
      for (std::uint32_t i = n.n_children; i-- > 0;) pending.push_back(n.first_child + i);
      step();
      pending.resize(pending.size() - n.n_children);
    } else {
      for (std::uint32_t i = 0; i < n.n_children && !stop; ++i) {
        choices[id] = static_cast<std::int32_t>(i);
        pending.push_back(n.first_child + i);
        step();
        pending.pop_back();
      }
      choices[id] = -1;
    }
    pending.push_back(id);
  };
  step();
  return visited;
}

/// All strategies, in canonical order. TreeTooLarge past `max_count`.
inline std::vector<Strategy> enumerate_strategies(const GameTree& tree, std::uint64_t max_count = 1'000'000) {
  if (count_strategies(tree) > max_count)
    throw Error(Errc::TreeTooLarge, "more than " + std::to_string(max_count) + " strategies");
  std::vector<Strategy> out;
  for_each_strategy(tree, [&](const Choices& c) {
    out.push_back(to_strategy(tree, c));
    return true;
  });
  return out;
}

/// Expected success of a strategy: over every leaf it reaches, the product of
/// world-arc probabilities times the leaf payoff.
inline Rational strategy_expected_success(const Strategy& s, const GameTree& tree) {
  std::vector<Letter> history;
  std::function<Rational(NodeId)> eval = [&](NodeId id) -> Rational {
    const auto& n = tree.node(id);
    Rational v = n.reward;
    if (n.kind == NodeKind::Ai) {
      auto a = s.action(history);
      if (!a) throw Error(Errc::StrategyMismatch, "strategy has no action for a reachable history");
      auto c = tree.child(id, *a);
      if (!c) throw Error(Errc::StrategyMismatch, "strategy action is not an arc of the tree");
      history.push_back(*a);
      v += eval(*c);
      history.pop_back();
    } else if (n.kind == NodeKind::World) {
      for (NodeId c = n.first_child; c < n.first_child + n.n_children; ++c) {
        history.push_back(tree.node(c).arc);
        v += tree.node(c).probability * eval(c);
        history.pop_back();
      }
    }
    return v;
  };
  return eval(tree.root());
}

/// Same, for choices bound to this tree.
inline Rational strategy_expected_success(const Choices& choices, const GameTree& tree) {
  std::function<Rational(NodeId)> eval = [&](NodeId id) -> Rational {
    const auto& n = tree.node(id);
    Rational v = n.reward;
    if (n.kind == NodeKind::Ai) {
      if (choices.at(id) < 0) throw Error(Errc::StrategyMismatch, "no choice at a reachable Ai vertex");
      v += eval(n.first_child + static_cast<NodeId>(choices[id]));
    } else if (n.kind == NodeKind::World) {
      for (NodeId c = n.first_child; c < n.first_child + n.n_children; ++c)
        v += tree.node(c).probability * eval(c);
    }
    return v;
  };
  return eval(tree.root());
}

/// Indented dump, one vertex per line: kind, arc letter, arc probability,
/// and (when given) the Max-Sum value.
inline void dump_tree(std::ostream& out, const GameTree& tree, const ValuedTree* values = nullptr) {
  std::function<void(NodeId, int)> rec = [&](NodeId id, int indent) {
    const auto& n = tree.node(id);
    out << std::string(static_cast<std::size_t>(indent) * 2, ' ');
    out << (n.kind == NodeKind::Ai ? "ai" : n.kind == NodeKind::World ? "world" : "leaf");
    if (id != tree.root()) out << ' ' << tree.alphabet().name(n.arc);
    if (tree.node(n.parent == no_node ? id : n.parent).kind == NodeKind::World) out << " p=" << n.probability;
    if (n.reward != 0) out << " r=" << n.reward;
    if (values) out << " v=" << values->value[id];
    out << '\n';
    for (NodeId c = n.first_child; c < n.first_child + n.n_children; ++c) rec(c, indent + 1);
  };
  rec(tree.root(), 0);
}

}  // namespace tmw
