#pragma once

// Perfect-information extensive-form mechanisms over applicant types.
//
// A node where applicant i acts partitions i's current type set T_i(h)
// among its children. T_i(h) is never stored per node: it is the universe
// at the root and is replaced by the child's set whenever i acts, so a
// player's type set is unchanged at nodes where someone else moves.

#include <algorithm>
#include <atomic>
#include <functional>
#include <iterator>
#include <numeric>
#include <tuple>
#include <bit>
#include <cstdint>
#include <mutex>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "osp/core.hpp"
#include "osp/da.hpp"
#include "osp/parallel.hpp"

namespace osp {

using NodeId = std::size_t;
using TypeSet = std::vector<TypeId>;  // sorted, unique

struct MechanismNode {
  Applicant player = -1;               // -1 on leaves
  std::vector<NodeId> children;
  std::vector<TypeSet> child_types;    // parallel to children
  std::vector<Position> outcome;       // leaves: applicant -> position

  bool is_leaf() const { return player < 0; }
};

struct MechanismTree {
  int n = 0;
  std::vector<TypeSet> universe;       // per applicant
  std::vector<MechanismNode> nodes;    // preorder, nodes[0] is the root

  const MechanismNode& root() const { return nodes.front(); }
};

inline TypeSet full_universe(int n) {
  TypeSet all(factorial(n));
  std::iota(all.begin(), all.end(), 0);
  return all;
}

inline bool contains(const TypeSet& s, TypeId t) { return std::binary_search(s.begin(), s.end(), t); }

// ---------------------------------------------------------------------------
// validate

struct ValidationReport {
  bool ok = true;
  NodeId node = 0;
  std::string message;

  explicit operator bool() const { return ok; }
};

inline ValidationReport validate(const MechanismTree& tree) {
  auto fail = [](NodeId node, std::string msg) { return ValidationReport{false, node, std::move(msg)}; };
  const int n = tree.n;
  if (n < 1 || n > kMaxAgents) return fail(0, "market size out of range");
  if (tree.universe.size() != static_cast<std::size_t>(n)) return fail(0, "need one type universe per applicant");
  const auto type_count = static_cast<TypeId>(factorial(n));
  auto well_formed = [&](const TypeSet& s) {
    if (s.empty()) return false;
    if (s.front() < 0 || s.back() >= type_count) return false;
    return std::adjacent_find(s.begin(), s.end(), std::greater_equal<>()) == s.end();
  };
  for (const auto& u : tree.universe)
    if (!well_formed(u)) return fail(0, "type universe must be a nonempty sorted set of type ids");
  if (tree.nodes.empty()) return fail(0, "tree has no nodes");

  std::vector<int> parents(tree.nodes.size(), 0);
  std::vector<const TypeSet*> current(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) current[static_cast<std::size_t>(i)] = &tree.universe[static_cast<std::size_t>(i)];

  std::optional<ValidationReport> bad;
  auto walk = [&](auto&& self, NodeId h) -> void {
    if (bad) return;
    const MechanismNode& node = tree.nodes[h];
    if (node.is_leaf()) {
      if (node.outcome.size() != static_cast<std::size_t>(n)) {
        bad = fail(h, "leaf matching has wrong size");
        return;
      }
      std::vector<bool> used(static_cast<std::size_t>(n), false);
      for (Position x : node.outcome) {
        if (x < 0 || x >= n || used[static_cast<std::size_t>(x)]) {
          bad = fail(h, "leaf matching is not a bijection");
          return;
        }
        used[static_cast<std::size_t>(x)] = true;
      }
      return;
    }
    if (node.player >= n) {
      bad = fail(h, "acting player out of range");
      return;
    }
    if (node.children.empty()) {
      bad = fail(h, "internal node without children");
      return;
    }
    if (node.child_types.size() != node.children.size()) {
      bad = fail(h, "child type sets do not match children");
      return;
    }
    const auto i = static_cast<std::size_t>(node.player);
    TypeSet merged;
    for (std::size_t c = 0; c < node.children.size(); ++c) {
      const NodeId child = node.children[c];
      if (child <= h || child >= tree.nodes.size()) {
        bad = fail(h, "children must follow their parent in preorder");
        return;
      }
      if (++parents[child] > 1) {
        bad = fail(child, "node has more than one parent");
        return;
      }
      if (!well_formed(node.child_types[c])) {
        bad = fail(h, "child type set must be a nonempty sorted set of type ids");
        return;
      }
      merged.insert(merged.end(), node.child_types[c].begin(), node.child_types[c].end());
    }
    std::sort(merged.begin(), merged.end());
    if (std::adjacent_find(merged.begin(), merged.end()) != merged.end()) {
      bad = fail(h, "child type sets overlap");
      return;
    }
    if (merged != *current[i]) {
      bad = fail(h, "child type sets do not cover the player's type set");
      return;
    }
    const TypeSet* saved = current[i];
    for (std::size_t c = 0; c < node.children.size() && !bad; ++c) {
      current[i] = &node.child_types[c];
      self(self, node.children[c]);
    }
    current[i] = saved;
  };
  walk(walk, 0);
  if (bad) return *bad;
  for (NodeId h = 1; h < tree.nodes.size(); ++h)
    if (parents[h] != 1) return fail(h, "node unreachable from the root");
  return {};
}

// ---------------------------------------------------------------------------
// execute

/// Leaf reached when each applicant i reports type types[i].
inline NodeId execute_leaf(const MechanismTree& tree, std::span<const TypeId> types) {
  if (types.size() != static_cast<std::size_t>(tree.n)) throw std::invalid_argument("profile size differs from tree");
  for (int i = 0; i < tree.n; ++i)
    if (!contains(tree.universe[static_cast<std::size_t>(i)], types[static_cast<std::size_t>(i)]))
      throw std::invalid_argument("profile outside the mechanism's environment");
  NodeId h = 0;
  while (!tree.nodes[h].is_leaf()) {
    const MechanismNode& node = tree.nodes[h];
    const TypeId t = types[static_cast<std::size_t>(node.player)];
    std::optional<NodeId> next;
    for (std::size_t c = 0; c < node.children.size(); ++c)
      if (contains(node.child_types[c], t)) {
        if (next) throw std::logic_error("ambiguous descent: tree fails validation");
        next = node.children[c];
      }
    if (!next) throw std::logic_error("no consistent child: tree fails validation");
    h = *next;
  }
  return h;
}

inline std::vector<TypeId> type_ids(const PreferenceProfile& p) {
  std::vector<TypeId> out;
  for (const auto& o : p.prefs()) out.push_back(order_index(o));
  return out;
}

inline Matching execute(const MechanismTree& tree, const PreferenceProfile& p) {
  const auto ids = type_ids(p);
  return Matching(tree.nodes[execute_leaf(tree, ids)].outcome);
}

// ---------------------------------------------------------------------------
// check_implements

struct Exhaustive {};
struct Sampled {
  std::uint64_t count = 0;
  std::uint64_t seed = 0;
};

struct ImplementsReport {
  bool ok = true;
  std::uint64_t checked = 0;
  std::optional<PreferenceProfile> counterexample;
  std::optional<Matching> expected;
  std::optional<Matching> got;

  explicit operator bool() const { return ok; }
};

namespace detail {

class ImplementsChecker {
 public:
  ImplementsChecker(const MechanismTree& tree, const PrioritySet& q)
      : tree_(tree), q_(q), orders_(all_orders(tree.n)) {
    if (q.size() != tree.n) throw std::invalid_argument("priority set size differs from tree");
  }

  /// Returns false and records the first counterexample on mismatch.
  bool check(std::span<const TypeId> types) {
    std::vector<Order> prefs;
    prefs.reserve(types.size());
    for (TypeId t : types) prefs.push_back(orders_[static_cast<std::size_t>(t)]);
    PreferenceProfile p(std::move(prefs));
    const auto& got = tree_.nodes[execute_leaf(tree_, types)].outcome;
    Matching want = run_da(q_, p);
    if (got == want.applicant_to_position()) return true;
    std::lock_guard lock(mu_);
    if (!report_.counterexample) {
      report_.ok = false;
      report_.counterexample = std::move(p);
      report_.expected = std::move(want);
      report_.got = Matching(got);
    }
    failed_ = true;
    return false;
  }

  bool failed() const { return failed_; }
  const std::vector<Order>& orders() const { return orders_; }
  ImplementsReport finish(std::uint64_t checked) {
    report_.checked = checked;
    return std::move(report_);
  }

 private:
  const MechanismTree& tree_;
  const PrioritySet& q_;
  std::vector<Order> orders_;
  std::mutex mu_;
  std::atomic<bool> failed_{false};
  ImplementsReport report_;
};

}  // namespace detail

/// Compares the tree with deferred acceptance on every profile in the
/// product of the type universes.
inline ImplementsReport check_implements(const MechanismTree& tree, const PrioritySet& q, Exhaustive,
                                         unsigned threads = 1) {
  detail::ImplementsChecker checker(tree, q);
  std::uint64_t total = 1;
  for (const auto& u : tree.universe) total *= u.size();
  std::atomic<std::uint64_t> checked{0};
  parallel_shards(total, threads, [&](unsigned, std::uint64_t begin, std::uint64_t end) {
    std::vector<TypeId> types(static_cast<std::size_t>(tree.n));
    for (std::uint64_t idx = begin; idx < end && !checker.failed(); ++idx) {
      std::uint64_t rest = idx;
      for (int i = tree.n - 1; i >= 0; --i) {
        const auto& u = tree.universe[static_cast<std::size_t>(i)];
        types[static_cast<std::size_t>(i)] = u[rest % u.size()];
        rest /= u.size();
      }
      checker.check(types);
      checked.fetch_add(1, std::memory_order_relaxed);
    }
  });
  return checker.finish(checked.load());
}

/// Same comparison on `count` profiles drawn uniformly from the universes.
/// Profile k uses its own generator seeded from (seed, k), so the checked
/// set does not depend on the thread count.
inline ImplementsReport check_implements(const MechanismTree& tree, const PrioritySet& q, Sampled mode,
                                         unsigned threads = 1) {
  detail::ImplementsChecker checker(tree, q);
  std::atomic<std::uint64_t> checked{0};
  parallel_shards(mode.count, threads, [&](unsigned, std::uint64_t begin, std::uint64_t end) {
    std::vector<TypeId> types(static_cast<std::size_t>(tree.n));
    for (std::uint64_t k = begin; k < end && !checker.failed(); ++k) {
      std::seed_seq seq{static_cast<std::uint32_t>(mode.seed), static_cast<std::uint32_t>(mode.seed >> 32),
                        static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
      std::mt19937_64 rng(seq);
      for (int i = 0; i < tree.n; ++i) {
        const auto& u = tree.universe[static_cast<std::size_t>(i)];
        std::uniform_int_distribution<std::size_t> pick(0, u.size() - 1);
        types[static_cast<std::size_t>(i)] = u[pick(rng)];
      }
      checker.check(types);
      checked.fetch_add(1, std::memory_order_relaxed);
    }
  });
  return checker.finish(checked.load());
}

/// Comparison on an explicit list of profiles.
inline ImplementsReport check_implements(const MechanismTree& tree, const PrioritySet& q,
                                         std::span<const PreferenceProfile> profiles) {
  detail::ImplementsChecker checker(tree, q);
  std::uint64_t checked = 0;
  for (const auto& p : profiles) {
    ++checked;
    if (!checker.check(type_ids(p))) break;
  }
  return checker.finish(checked);
}

// ---------------------------------------------------------------------------
// check_osp

struct OspViolation {
  NodeId node = 0;
  Applicant player = -1;
  TypeId type = 0;
  NodeId truthful_leaf = 0;
  NodeId deviating_leaf = 0;
  Position truthful_position = -1;   // worst truthful outcome under `type`
  Position deviating_position = -1;  // best outcome after deviating
};

struct OspReport {
  bool ok = true;
  std::vector<OspViolation> violations;

  explicit operator bool() const { return ok; }
};

namespace detail {

/// Bitmask over positions for each node and applicant: positions the
/// applicant is matched to in some leaf below the node.
inline std::vector<std::array<std::uint8_t, kMaxAgents>> reachable_positions(const MechanismTree& tree) {
  std::vector<std::array<std::uint8_t, kMaxAgents>> reach(tree.nodes.size());
  // Preorder: children come after parents, so a reverse sweep is bottom-up.
  for (NodeId h = tree.nodes.size(); h-- > 0;) {
    auto& r = reach[h];
    r.fill(0);
    const auto& node = tree.nodes[h];
    if (node.is_leaf()) {
      for (int i = 0; i < tree.n; ++i) r[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(1u << node.outcome[static_cast<std::size_t>(i)]);
    } else {
      for (NodeId c : node.children)
        for (int i = 0; i < tree.n; ++i) r[static_cast<std::size_t>(i)] |= reach[c][static_cast<std::size_t>(i)];
    }
  }
  return reach;
}

/// For one applicant, the positions reachable below each node when the
/// applicant keeps playing a fixed type truthfully. Nodes with no action
/// of the applicant below them collapse to the unrestricted reach mask.
class TruthfulReach {
 public:
  TruthfulReach(const MechanismTree& tree, const std::vector<std::array<std::uint8_t, kMaxAgents>>& reach,
                Applicant player)
      : tree_(tree), reach_(reach), player_(player), acts_below_(tree.nodes.size(), false),
        memo_(tree.nodes.size()) {
    for (NodeId h = tree.nodes.size(); h-- > 0;) {
      const auto& node = tree.nodes[h];
      bool below = node.player == player;
      for (NodeId c : node.children) below = below || acts_below_[c];
      acts_below_[h] = below;
    }
  }

  std::uint8_t at(NodeId h, TypeId t) {
    if (!acts_below_[h]) return reach_[h][static_cast<std::size_t>(player_)];
    return table(h)[static_cast<std::size_t>(t)];
  }

 private:
  const std::vector<std::uint8_t>& table(NodeId h) {
    auto& m = memo_[h];
    if (!m.empty()) return m;
    const auto& node = tree_.nodes[h];
    std::vector<std::uint8_t> out(factorial(tree_.n), 0);
    if (node.player == player_) {
      for (std::size_t c = 0; c < node.children.size(); ++c)
        for (TypeId t : node.child_types[c]) out[static_cast<std::size_t>(t)] = at(node.children[c], t);
    } else {
      for (NodeId c : node.children) {
        if (!acts_below_[c]) {
          const std::uint8_t v = reach_[c][static_cast<std::size_t>(player_)];
          for (auto& o : out) o |= v;
        } else {
          const auto& sub = table(c);
          for (std::size_t t = 0; t < out.size(); ++t) out[t] |= sub[t];
        }
      }
    }
    m = std::move(out);
    return m;
  }

  const MechanismTree& tree_;
  const std::vector<std::array<std::uint8_t, kMaxAgents>>& reach_;
  Applicant player_;
  std::vector<bool> acts_below_;
  std::vector<std::vector<std::uint8_t>> memo_;
};

inline int worst_in(const Order& o, std::uint32_t mask) {
  for (int r = o.size() - 1; r >= 0; --r)
    if (mask >> o.at(r) & 1u) return o.at(r);
  return -1;
}

/// A leaf below h where `player` gets `target`; if `type` is set, only
/// paths on which the player keeps reporting that type are followed.
inline std::optional<NodeId> find_leaf(const MechanismTree& tree, NodeId h, Applicant player,
                                       std::optional<TypeId> type, Position target) {
  const auto& node = tree.nodes[h];
  if (node.is_leaf())
    return node.outcome[static_cast<std::size_t>(player)] == target ? std::optional<NodeId>(h) : std::nullopt;
  for (std::size_t c = 0; c < node.children.size(); ++c) {
    if (type && node.player == player && !contains(node.child_types[c], *type)) continue;
    if (auto leaf = find_leaf(tree, node.children[c], player, type, target)) return leaf;
  }
  return std::nullopt;
}

}  // namespace detail

/// Exact obvious-strategyproofness check: at every node h where i acts and
/// every t in T_i(h), the worst position i can end up with by continuing
/// truthfully must be weakly better (under t) than the best position at any
/// leaf below a different child of h.
inline OspReport check_osp(const MechanismTree& tree, unsigned threads = 1, std::size_t max_violations = 64) {
  if (auto v = validate(tree); !v) throw std::invalid_argument("check_osp on invalid tree: " + v.message);
  const auto reach = detail::reachable_positions(tree);
  const auto orders = all_orders(tree.n);
  OspReport report;
  std::mutex mu;
  parallel_shards(static_cast<std::uint64_t>(tree.n), threads, [&](unsigned, std::uint64_t begin, std::uint64_t end) {
    for (auto pi = begin; pi < end; ++pi) {
      const auto player = static_cast<Applicant>(pi);
      detail::TruthfulReach truthful(tree, reach, player);
      for (NodeId h = 0; h < tree.nodes.size(); ++h) {
        const auto& node = tree.nodes[h];
        if (node.player != player) continue;
        const std::size_t k = node.children.size();
        // others[c]: positions reachable under any child except c.
        std::vector<std::uint8_t> prefix(k + 1, 0), suffix(k + 1, 0);
        for (std::size_t c = 0; c < k; ++c)
          prefix[c + 1] = prefix[c] | reach[node.children[c]][static_cast<std::size_t>(player)];
        for (std::size_t c = k; c-- > 0;)
          suffix[c] = suffix[c + 1] | reach[node.children[c]][static_cast<std::size_t>(player)];
        for (std::size_t c = 0; c < k; ++c) {
          const std::uint8_t others = prefix[c] | suffix[c + 1];
          if (!others) continue;
          for (TypeId t : node.child_types[c]) {
            const Order& pref = orders[static_cast<std::size_t>(t)];
            const int worst = detail::worst_in(pref, truthful.at(node.children[c], t));
            const int best = pref.best_in(others);
            if (!pref.prefers(best, worst)) continue;
            std::lock_guard lock(mu);
            report.ok = false;
            if (report.violations.size() >= max_violations) continue;
            OspViolation v{h, player, t, 0, 0, worst, best};
            v.truthful_leaf = detail::find_leaf(tree, node.children[c], player, t, worst).value();
            for (std::size_t d = 0; d < k; ++d) {
              if (d == c) continue;
              if (auto leaf = detail::find_leaf(tree, node.children[d], player, std::nullopt, best)) {
                v.deviating_leaf = *leaf;
                break;
              }
            }
            report.violations.push_back(v);
          }
        }
      }
    }
  });
  std::sort(report.violations.begin(), report.violations.end(), [](const auto& x, const auto& y) {
    return std::tie(x.node, x.player, x.type) < std::tie(y.node, y.player, y.type);
  });
  return report;
}

inline std::string describe(const OspViolation& v, int n) {
  return "node " + std::to_string(v.node) + ": applicant " + applicant_name(v.player) + " with type " +
         digits(order_from_index(n, v.type)) + " may end at " + position_name(v.truthful_position) +
         " (leaf " + std::to_string(v.truthful_leaf) + ") by staying truthful but could reach " +
         position_name(v.deviating_position) + " (leaf " + std::to_string(v.deviating_leaf) + ") by deviating";
}

// ---------------------------------------------------------------------------
// Pruning and structure

/// Restricts the environment to sub-universes: every child type set is
/// intersected with the player's sub-universe and emptied children are
/// dropped together with their subtrees.
inline MechanismTree prune(const MechanismTree& tree, const std::vector<TypeSet>& sub_universe) {
  if (sub_universe.size() != static_cast<std::size_t>(tree.n)) throw std::invalid_argument("need one sub-universe per applicant");
  MechanismTree out;
  out.n = tree.n;
  for (int i = 0; i < tree.n; ++i) {
    TypeSet s;
    std::set_intersection(tree.universe[static_cast<std::size_t>(i)].begin(), tree.universe[static_cast<std::size_t>(i)].end(),
                          sub_universe[static_cast<std::size_t>(i)].begin(), sub_universe[static_cast<std::size_t>(i)].end(),
                          std::back_inserter(s));
    if (s.empty()) throw std::invalid_argument("sub-universe must meet the tree's universe");
    out.universe.push_back(std::move(s));
  }
  auto copy = [&](auto&& self, NodeId h) -> NodeId {
    const NodeId id = out.nodes.size();
    out.nodes.emplace_back();
    const auto& node = tree.nodes[h];
    if (node.is_leaf()) {
      out.nodes[id].outcome = node.outcome;
      return id;
    }
    out.nodes[id].player = node.player;
    const auto& keep = out.universe[static_cast<std::size_t>(node.player)];
    for (std::size_t c = 0; c < node.children.size(); ++c) {
      TypeSet s;
      std::set_intersection(node.child_types[c].begin(), node.child_types[c].end(), keep.begin(), keep.end(),
                            std::back_inserter(s));
      if (s.empty()) continue;
      const NodeId child = self(self, node.children[c]);
      out.nodes[id].children.push_back(child);
      out.nodes[id].child_types.push_back(std::move(s));
    }
    return id;
  };
  copy(copy, 0);
  return out;
}

struct TreeShape {
  std::size_t nodes = 0;
  std::size_t leaves = 0;
  int depth = 0;
  int max_moves = 0;   // most actions by one applicant on a root-to-leaf path
  int max_active = 0;  // most simultaneously active applicants at a node
};

/// An applicant is active at h if it moves at h, or moved earlier on the
/// path and its final position is not yet fixed below h.
inline TreeShape tree_shape(const MechanismTree& tree) {
  const auto reach = detail::reachable_positions(tree);
  TreeShape s;
  s.nodes = tree.nodes.size();
  std::vector<int> moves(static_cast<std::size_t>(tree.n), 0);
  auto walk = [&](auto&& self, NodeId h, int depth) -> void {
    s.depth = std::max(s.depth, depth);
    const auto& node = tree.nodes[h];
    if (node.is_leaf()) {
      ++s.leaves;
      return;
    }
    int active = 0;
    for (int i = 0; i < tree.n; ++i) {
      if (i == node.player) ++active;
      else if (moves[static_cast<std::size_t>(i)] > 0 && std::popcount(static_cast<unsigned>(reach[h][static_cast<std::size_t>(i)])) > 1) ++active;
    }
    s.max_active = std::max(s.max_active, active);
    auto& m = moves[static_cast<std::size_t>(node.player)];
    ++m;
    s.max_moves = std::max(s.max_moves, m);
    for (NodeId c : node.children) self(self, c, depth + 1);
    --m;
  };
  walk(walk, 0, 0);
  return s;
}

}  // namespace osp
