#pragma once

// Structural predicates on priority sets: Ergin cycles, the acyclic block
// partition, two-adjacent-alternating (TAA) blocks, limited-cyclic
// classification and the forbidden sub-pattern scanner.

#include <algorithm>
#include <array>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "osp/core.hpp"

namespace osp {

/// True iff some applicants a, b, c and positions i, j have
/// a >_i b >_i c and c >_j a.
inline bool is_cyclic(const PrioritySet& q) {
  const int n = q.size();
  for (Position i = 0; i < n; ++i) {
    const Order& li = q.list(i);
    for (int ra = 0; ra < n; ++ra)
      for (int rc = ra + 2; rc < n; ++rc) {
        const Applicant a = li.at(ra), c = li.at(rc);
        for (Position j = 0; j < n; ++j)
          if (q.prefers(j, c, a)) return true;
      }
  }
  return false;
}

using BlockPartition = std::vector<std::vector<Applicant>>;

/// Peels off the one or two applicants holding top priority anywhere,
/// recursing on the rest. Succeeds (blocks of size <= 2, unanimous
/// dominance between blocks) exactly when q is acyclic.
inline std::optional<BlockPartition> acyclic_partition(const PrioritySet& q) {
  const int n = q.size();
  std::vector<bool> gone(static_cast<std::size_t>(n), false);
  auto top_k = [&](const Order& o, int k) {
    std::vector<Applicant> out;
    for (int r = 0; r < n && static_cast<int>(out.size()) < k; ++r)
      if (!gone[static_cast<std::size_t>(o.at(r))]) out.push_back(o.at(r));
    return out;
  };
  BlockPartition blocks;
  int left = n;
  while (left > 0) {
    std::vector<Applicant> tops;
    for (Position x = 0; x < n; ++x) {
      const Applicant t = top_k(q.list(x), 1).front();
      if (std::find(tops.begin(), tops.end(), t) == tops.end()) tops.push_back(t);
    }
    if (tops.size() > 2) return std::nullopt;
    if (tops.size() == 2) {
      for (Position x = 0; x < n; ++x) {
        auto two = top_k(q.list(x), 2);
        std::sort(two.begin(), two.end());
        auto want = tops;
        std::sort(want.begin(), want.end());
        if (two != want) return std::nullopt;
      }
    }
    // Keep the block in position 0's order.
    std::sort(tops.begin(), tops.end(),
              [&](Applicant a, Applicant b) { return q.prefers(0, a, b); });
    for (Applicant a : tops) gone[static_cast<std::size_t>(a)] = true;
    left -= static_cast<int>(tops.size());
    blocks.push_back(std::move(tops));
  }
  return blocks;
}

/// Labeling of a TAA block: applicants a_1..a_k (as indices of the lists'
/// item space) and which list indices carry the u and v patterns. All
/// other lists carry x = a_1 > a_2 > ... > a_k.
struct TaaLabeling {
  std::vector<int> order;
  int u_list = -1;
  int v_list = -1;

  friend bool operator==(const TaaLabeling&, const TaaLabeling&) = default;
};

/// The three list shapes for labeling a_1..a_k: x keeps the labeling,
/// u keeps a_1 and swaps (a_2,a_3), (a_4,a_5), ..., v swaps (a_1,a_2),
/// (a_3,a_4), ...; a trailing unpaired applicant stays in place.
struct TaaShapes {
  Order x, u, v;
};

inline TaaShapes taa_shapes(std::span<const int> labeling) {
  const auto k = labeling.size();
  std::vector<int> x(labeling.begin(), labeling.end()), u = x, v = x;
  for (std::size_t i = 1; i + 1 < k; i += 2) std::swap(u[i], u[i + 1]);
  for (std::size_t i = 0; i + 1 < k; i += 2) std::swap(v[i], v[i + 1]);
  return {Order(x), Order(u), Order(v)};
}

namespace detail {

inline std::optional<TaaLabeling> match_taa(std::span<const Order> lists, std::span<const int> labeling) {
  const auto shapes = taa_shapes(labeling);
  int u_at = -1, v_at = -1;
  for (std::size_t i = 0; i < lists.size(); ++i) {
    const Order& l = lists[i];
    if (l == shapes.x) continue;
    if (l == shapes.u && u_at == -1) {
      u_at = static_cast<int>(i);
    } else if (l == shapes.v && v_at == -1) {
      v_at = static_cast<int>(i);
    } else {
      return std::nullopt;
    }
  }
  if (u_at == -1 || v_at == -1) return std::nullopt;
  return TaaLabeling{{labeling.begin(), labeling.end()}, u_at, v_at};
}

inline void check_taa_input(std::span<const Order> lists) {
  if (lists.size() < 3) throw std::invalid_argument("two-adjacent-alternating needs at least 3 lists");
  const int k = lists.front().size();
  if (k < 3) throw std::invalid_argument("two-adjacent-alternating needs at least 3 applicants");
  for (const auto& l : lists)
    if (l.size() != k) throw std::invalid_argument("lists must rank the same applicants");
}

}  // namespace detail

/// Exhaustive TAA detection over all k! labelings; first hit in
/// lexicographic labeling order.
inline std::optional<TaaLabeling> taa_by_search(std::span<const Order> lists) {
  detail::check_taa_input(lists);
  std::vector<int> labeling(static_cast<std::size_t>(lists.front().size()));
  std::iota(labeling.begin(), labeling.end(), 0);
  do {
    if (auto hit = detail::match_taa(lists, labeling)) return hit;
  } while (std::next_permutation(labeling.begin(), labeling.end()));
  return std::nullopt;
}

/// Linear-time TAA detection: the labeling is read off a candidate
/// majority list and the two minority lists are checked against it.
inline std::optional<TaaLabeling> taa_by_fingerprint(std::span<const Order> lists) {
  detail::check_taa_input(lists);
  const auto ell = lists.size();
  for (std::size_t i = 0; i < ell; ++i) {
    const auto copies = static_cast<std::size_t>(std::count(lists.begin(), lists.end(), lists[i]));
    if (copies != ell - 2) continue;
    const auto labeling = lists[i].ranking();
    if (auto hit = detail::match_taa(lists, labeling)) return hit;
  }
  return std::nullopt;
}

/// Largest block size for which TAA detection searches all labelings.
inline constexpr int kTaaSearchLimit = 7;

inline std::optional<TaaLabeling> is_two_adjacent_alternating(std::span<const Order> lists) {
  detail::check_taa_input(lists);
  return lists.front().size() <= kTaaSearchLimit ? taa_by_search(lists) : taa_by_fingerprint(lists);
}

inline std::optional<TaaLabeling> is_two_adjacent_alternating(const PrioritySet& q) {
  return is_two_adjacent_alternating(std::span<const Order>(q.lists()));
}

// ---------------------------------------------------------------------------
// Forbidden patterns

/// A named forbidden pattern. Pattern (b) has three relabel-distinct
/// members; the others have one.
struct ForbiddenPattern {
  char letter;
  std::vector<PrioritySet> members;
  std::vector<PrioritySet> canonical;
};

inline const std::vector<ForbiddenPattern>& forbidden_patterns() {
  static const std::vector<ForbiddenPattern> patterns = [] {
    std::vector<ForbiddenPattern> v{
        {'a', {priorities({"abc", "bca", "cab"})}, {}},
        {'b', {priorities({"abc", "abc", "cab"}), priorities({"abc", "abc", "cba"}), priorities({"abc", "abc", "bca"})}, {}},
        {'c', {priorities({"abc", "acb", "cba"})}, {}},
        {'d', {priorities({"abc", "bac", "cba"})}, {}},
        {'e', {priorities({"abcd", "abdc", "acbd", "bacd"})}, {}},
    };
    for (auto& p : v)
      for (const auto& m : p.members) p.canonical.push_back(canonical_form(m));
    return v;
  }();
  return patterns;
}

struct ForbiddenMatch {
  Restriction restriction;
  int pattern = -1;  // index into forbidden_patterns()
  int member = -1;

  char letter() const { return forbidden_patterns().at(static_cast<std::size_t>(pattern)).letter; }
};

/// First restriction of size m (in restrictions() order) whose canonical
/// form equals a forbidden pattern of that size.
inline std::optional<ForbiddenMatch> scan_forbidden_of_size(const PrioritySet& q, int m) {
  if (m > q.size()) return std::nullopt;
  const auto& patterns = forbidden_patterns();
  for (auto& r : restrictions(q.size(), m)) {
    const PrioritySet c = canonical_form(restrict(q, r));
    for (std::size_t p = 0; p < patterns.size(); ++p)
      for (std::size_t j = 0; j < patterns[p].canonical.size(); ++j)
        if (patterns[p].canonical[j] == c) return ForbiddenMatch{std::move(r), static_cast<int>(p), static_cast<int>(j)};
  }
  return std::nullopt;
}

/// Scans restrictions of size 3, then size 4.
inline std::optional<ForbiddenMatch> scan_forbidden(const PrioritySet& q) {
  if (auto m = scan_forbidden_of_size(q, 3)) return m;
  return scan_forbidden_of_size(q, 4);
}

// ---------------------------------------------------------------------------
// Limited-cyclic classification

enum class Verdict { LimitedCyclic, NotLimitedCyclic };

inline const char* to_string(Verdict v) {
  return v == Verdict::LimitedCyclic ? "limited cyclic" : "not limited cyclic";
}

/// TAA labeling of one partition block, in original applicant/position ids.
struct BlockLabeling {
  std::size_t block = 0;
  std::vector<Applicant> order;     // a_1..a_k
  std::vector<Position> x_positions;
  Position u = -1;
  Position v = -1;
};

struct Classification {
  Verdict verdict = Verdict::NotLimitedCyclic;
  BlockPartition partition;              // iff LimitedCyclic
  std::vector<BlockLabeling> labelings;  // one per block of size >= 3
  std::optional<ForbiddenMatch> witness; // iff NotLimitedCyclic

  bool limited_cyclic() const { return verdict == Verdict::LimitedCyclic; }
};

/// The finest ordered partition that is contiguous in position 0's list and
/// keeps together every pair some position orders differently.
inline BlockPartition disagreement_partition(const PrioritySet& q) {
  const int n = q.size();
  const Order& anchor = q.list(0);
  // reach[r]: furthest anchor rank that must share a block with rank r.
  std::vector<int> reach(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) {
    reach[static_cast<std::size_t>(r)] = r;
    for (int s = r + 1; s < n; ++s)
      for (Position j = 1; j < n; ++j)
        if (q.prefers(j, anchor.at(s), anchor.at(r))) {
          reach[static_cast<std::size_t>(r)] = s;
          break;
        }
  }
  BlockPartition blocks;
  int start = 0;
  int end = 0;
  for (int r = 0; r < n; ++r) {
    end = std::max(end, reach[static_cast<std::size_t>(r)]);
    if (r == end) {
      std::vector<Applicant> b;
      for (int s = start; s <= end; ++s) b.push_back(anchor.at(s));
      blocks.push_back(std::move(b));
      start = r + 1;
      end = r + 1;
    }
  }
  return blocks;
}

inline Classification classify(const PrioritySet& q) {
  Classification out;
  auto blocks = disagreement_partition(q);
  const int n = q.size();
  bool ok = true;
  for (std::size_t b = 0; b < blocks.size() && ok; ++b) {
    if (blocks[b].size() < 3) continue;
    auto members = blocks[b];
    std::sort(members.begin(), members.end());
    std::vector<Order> lists;
    for (Position x = 0; x < n; ++x) lists.push_back(detail::filter_order(q.list(x), members));
    const auto taa = is_two_adjacent_alternating(std::span<const Order>(lists));
    if (!taa) {
      ok = false;
      break;
    }
    BlockLabeling bl;
    bl.block = b;
    for (int local : taa->order) bl.order.push_back(members[static_cast<std::size_t>(local)]);
    bl.u = taa->u_list;
    bl.v = taa->v_list;
    for (Position x = 0; x < n; ++x)
      if (x != bl.u && x != bl.v) bl.x_positions.push_back(x);
    out.labelings.push_back(std::move(bl));
  }
  if (ok) {
    out.verdict = Verdict::LimitedCyclic;
    out.partition = std::move(blocks);
  } else {
    out.verdict = Verdict::NotLimitedCyclic;
    out.labelings.clear();
    out.witness = scan_forbidden(q);
  }
  return out;
}

/// "forbidden pattern (a) on applicants {a,b,c} positions {1,2,3}"
inline std::string describe(const ForbiddenMatch& m) {
  return std::string("forbidden pattern (") + m.letter() + ") on applicants " +
         set_names(m.restriction.applicants) + " positions " + position_set_names(m.restriction.positions);
}

}  // namespace osp
