#pragma once

// Builds an obviously strategyproof mechanism for deferred acceptance under
// limited-cyclic priorities by composing three gadgets block by block:
// a serial pick for a singleton block, the two-applicant trading gadget
// (2Tr) for a pair, and the three-active "lurker" gadget (3Lu) for a
// two-adjacent-alternating block. After a block is matched the remaining
// market is reclassified and the construction continues below every leaf.

#include <bit>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "osp/classify.hpp"
#include "osp/core.hpp"
#include "osp/mechanism.hpp"

namespace osp {

/// Raised when asked to synthesize for priorities that are not limited
/// cyclic; carries the forbidden sub-pattern found by the scanner.
class NotLimitedCyclicError : public std::invalid_argument {
 public:
  explicit NotLimitedCyclicError(std::optional<ForbiddenMatch> w)
      : std::invalid_argument("priorities are not limited cyclic" +
                              (w ? "; " + describe(*w) : std::string())),
        witness(std::move(w)) {}

  std::optional<ForbiddenMatch> witness;
};

namespace detail {

using PositionMask = std::uint32_t;

inline PositionMask bit(Position x) { return PositionMask{1} << x; }

class Synthesizer {
 public:
  explicit Synthesizer(const PrioritySet& q) : q_(q), n_(q.size()), orders_(all_orders(q.size())) {}

  MechanismTree run() {
    tree_.n = n_;
    State s;
    s.assigned.assign(static_cast<std::size_t>(n_), -1);
    for (int i = 0; i < n_; ++i) tree_.universe.push_back(full_universe(n_));
    s.types = tree_.universe;
    build(s);
    return std::move(tree_);
  }

 private:
  struct State {
    std::vector<Position> assigned;  // -1 while unmatched
    std::vector<TypeSet> types;      // current T_i along the path

    void match(Applicant a, Position x) { assigned[static_cast<std::size_t>(a)] = x; }
    PositionMask free_positions(int n) const {
      PositionMask m = (PositionMask{1} << n) - 1;
      for (Position x : assigned)
        if (x >= 0) m &= ~bit(x);
      return m;
    }
  };

  using Continue = std::function<NodeId(State)>;
  using OnClinch = std::function<NodeId(Position, State)>;

  NodeId leaf(const State& s) {
    const NodeId id = tree_.nodes.size();
    tree_.nodes.emplace_back();
    tree_.nodes[id].outcome = s.assigned;
    return id;
  }

  /// Node where `who` either clinches its favorite among `clinch` or, when
  /// its favorite among clinch|pass lies in `pass`, takes the pass branch.
  /// Branches no remaining type would take are omitted, and a node with a
  /// single surviving branch is skipped entirely.
  NodeId act(State s, Applicant who, PositionMask clinch, PositionMask pass, const OnClinch& on_clinch,
             const Continue& on_pass = {}) {
    const PositionMask offered = clinch | pass;
    std::vector<TypeSet> by_position(static_cast<std::size_t>(n_));
    TypeSet passing;
    for (TypeId t : s.types[static_cast<std::size_t>(who)]) {
      const Position fav = orders_[static_cast<std::size_t>(t)].best_in(offered);
      if (clinch & bit(fav)) by_position[static_cast<std::size_t>(fav)].push_back(t);
      else passing.push_back(t);
    }
    struct Branch {
      Position clinched;  // -1 for pass
      TypeSet types;
    };
    std::vector<Branch> branches;
    for (Position x = 0; x < n_; ++x)
      if (!by_position[static_cast<std::size_t>(x)].empty())
        branches.push_back({x, std::move(by_position[static_cast<std::size_t>(x)])});
    if (!passing.empty()) branches.push_back({-1, std::move(passing)});
    if (branches.empty()) throw std::logic_error("action node with an empty type set");

    auto follow = [&](Branch& b, State next) {
      next.types[static_cast<std::size_t>(who)] = std::move(b.types);
      if (b.clinched >= 0) return on_clinch(b.clinched, std::move(next));
      if (!on_pass) throw std::logic_error("pass branch without continuation");
      return on_pass(std::move(next));
    };
    if (branches.size() == 1) return follow(branches.front(), std::move(s));

    const NodeId id = tree_.nodes.size();
    tree_.nodes.emplace_back();
    tree_.nodes[id].player = who;
    for (auto& b : branches) {
      TypeSet copy = b.types;
      const NodeId child = follow(b, s);
      tree_.nodes[id].children.push_back(child);
      tree_.nodes[id].child_types.push_back(std::move(copy));
    }
    return id;
  }

  NodeId build(State s) {
    std::vector<Applicant> open;
    for (Applicant a = 0; a < n_; ++a)
      if (s.assigned[static_cast<std::size_t>(a)] < 0) open.push_back(a);
    if (open.empty()) return leaf(s);
    const PositionMask free = s.free_positions(n_);
    std::vector<Position> free_list;
    for (Position x = 0; x < n_; ++x)
      if (free & bit(x)) free_list.push_back(x);

    const PrioritySet residual = restrict(q_, Restriction{open, free_list});
    const Classification cls = classify(residual);
    if (!cls.limited_cyclic()) throw std::logic_error("residual priorities lost the limited-cyclic property");
    const auto& first = cls.partition.front();

    if (first.size() == 1) return serial(std::move(s), open[static_cast<std::size_t>(first[0])], free);
    if (first.size() == 2) {
      const Applicant a = open[static_cast<std::size_t>(first[0])];
      const Applicant b = open[static_cast<std::size_t>(first[1])];
      PositionMask a_first = 0, b_first = 0;
      for (Position x : free_list) {
        const Applicant top = top_open(x, s);
        if (top == a) a_first |= bit(x);
        else if (top == b) b_first |= bit(x);
        else throw std::logic_error("pair block is not on top of every list");
      }
      return two_trader(std::move(s), a, b, a_first, b_first);
    }
    const BlockLabeling& lab = cls.labelings.front();
    Lurker g;
    for (int local : lab.order) g.order.push_back(open[static_cast<std::size_t>(local)]);
    for (int local : lab.x_positions) g.x |= bit(free_list[static_cast<std::size_t>(local)]);
    g.u = free_list[static_cast<std::size_t>(lab.u)];
    g.v = free_list[static_cast<std::size_t>(lab.v)];
    return three_lurker(std::move(s), g);
  }

  Applicant top_open(Position x, const State& s) const {
    const Order& l = q_.list(x);
    for (int r = 0; r < n_; ++r)
      if (s.assigned[static_cast<std::size_t>(l.at(r))] < 0) return l.at(r);
    return -1;
  }

  NodeId serial(State s, Applicant a, PositionMask free) {
    return act(std::move(s), a, free, 0, [this, a](Position x, State next) {
      next.match(a, x);
      return build(std::move(next));
    });
  }

  // 2Tr: a holds top priority on `mine`, b on `theirs`.
  NodeId two_trader(State s, Applicant a, Applicant b, PositionMask mine, PositionMask theirs) {
    const PositionMask all = mine | theirs;
    return act(
        std::move(s), a, mine, theirs,
        [=, this](Position x, State next) {
          next.match(a, x);
          return act(std::move(next), b, all & ~bit(x), 0, [=, this](Position y, State last) {
            last.match(b, y);
            return build(std::move(last));
          });
        },
        [=, this](State next) {
          return act(std::move(next), b, all, 0, [=, this](Position y, State after_b) {
            after_b.match(b, y);
            return act(std::move(after_b), a, all & ~bit(y), 0, [=, this](Position z, State last) {
              last.match(a, z);
              return build(std::move(last));
            });
          });
        });
  }

  struct Lurker {
    std::vector<Applicant> order;  // a_1..a_k
    PositionMask x = 0;
    Position u = -1;
    Position v = -1;
  };

  // 3Lu over a_1, a_2, a_3 of a two-adjacent-alternating block; the rest of
  // the block is handled by reclassifying once a_1..a_3 are placed (or, on
  // the branch where a_1 takes an x position, once a_1 alone is placed).
  NodeId three_lurker(State s, const Lurker& g) {
    const Applicant a1 = g.order[0], a2 = g.order[1], a3 = g.order[2];
    const PositionMask X = g.x, U = bit(g.u), V = bit(g.v);
    auto place = [this](State st, std::initializer_list<std::pair<Applicant, Position>> m) {
      for (auto [who, where] : m) st.match(who, where);
      return build(std::move(st));
    };
    // a_1 picks from X|u once a_2 has taken v; a_3 then depends on u.
    auto a1_after_v_taken = [=, this](State st, bool a3_waits_on_u) {
      return act(std::move(st), a1, X | U, 0, [=, this](Position y, State next) {
        next.match(a1, y);
        if (!a3_waits_on_u) return build(std::move(next));
        if (y != g.u) {
          next.match(a3, g.u);
          return build(std::move(next));
        }
        return act(std::move(next), a3, X, 0, [=, this](Position z, State last) {
          last.match(a3, z);
          return build(std::move(last));
        });
      });
    };
    return act(
        std::move(s), a1, X | U, V,
        [=, this](Position y, State next) {
          next.match(a1, y);
          return build(std::move(next));
        },
        [=, this](State after_a1) {
          return act(
              std::move(after_a1), a2, X | V, U,
              [=, this](Position y, State next) {
                if (y != g.v) return place(std::move(next), {{a1, g.v}, {a2, y}});
                next.match(a2, g.v);
                return a1_after_v_taken(std::move(next), false);
              },
              [=, this](State after_a2) {
                return act(
                    std::move(after_a2), a3, X, U,
                    [=, this](Position y, State next) {
                      return place(std::move(next), {{a1, g.v}, {a2, g.u}, {a3, y}});
                    },
                    [=, this](State after_a3) {
                      return act(std::move(after_a3), a2, X | V, 0, [=, this](Position y, State next) {
                        if (y != g.v) return place(std::move(next), {{a1, g.v}, {a3, g.u}, {a2, y}});
                        next.match(a2, g.v);
                        return a1_after_v_taken(std::move(next), true);
                      });
                    });
              });
        });
  }

  const PrioritySet& q_;
  int n_;
  std::vector<Order> orders_;
  MechanismTree tree_;
};

}  // namespace detail

/// OSP mechanism tree over the full preference domain implementing
/// deferred acceptance under q. Throws NotLimitedCyclicError otherwise.
inline MechanismTree synthesize(const PrioritySet& q) {
  const Classification cls = classify(q);
  if (!cls.limited_cyclic()) throw NotLimitedCyclicError(cls.witness);
  return detail::Synthesizer(q).run();
}

}  // namespace osp
