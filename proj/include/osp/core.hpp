#pragma once

// Domain types for one-sided balanced matching markets: strict orders,
// priority sets, preference profiles, matchings and restrictions, plus
// canonical forms of priority sets under relabeling of both sides.
//
// Applicants and positions are 0-based indices everywhere inside the
// library. Names (a, b, c, ... / 1, 2, 3, ...) only appear at the I/O edge.

#include <algorithm>
#include <array>
#include <bit>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace osp {

/// Largest market size supported by the fixed-capacity order type.
inline constexpr int kMaxAgents = 8;

using Applicant = int;
using Position = int;
/// Lexicographic rank of a full preference order among all n! orders.
using TypeId = std::int32_t;

inline std::uint64_t factorial(int n) {
  std::uint64_t f = 1;
  for (int i = 2; i <= n; ++i) f *= static_cast<std::uint64_t>(i);
  return f;
}

inline char applicant_name(Applicant a) { return static_cast<char>('a' + a); }
inline std::string position_name(Position p) { return std::to_string(p + 1); }

/// A strict total order over {0..n-1}, stored as the ranking (best first)
/// together with its inverse permutation.
class Order {
 public:
  Order() = default;

  explicit Order(std::span<const int> ranking) {
    if (ranking.empty() || ranking.size() > static_cast<std::size_t>(kMaxAgents))
      throw std::invalid_argument("order size out of range");
    n_ = static_cast<std::uint8_t>(ranking.size());
    std::array<bool, kMaxAgents> seen{};
    for (int r = 0; r < n_; ++r) {
      const int item = ranking[static_cast<std::size_t>(r)];
      if (item < 0 || item >= n_ || seen[static_cast<std::size_t>(item)])
        throw std::invalid_argument("ranking is not a permutation");
      seen[static_cast<std::size_t>(item)] = true;
      items_[static_cast<std::size_t>(r)] = static_cast<std::uint8_t>(item);
      rank_[static_cast<std::size_t>(item)] = static_cast<std::uint8_t>(r);
    }
  }

  Order(std::initializer_list<int> ranking)
      : Order(std::span<const int>(ranking.begin(), ranking.size())) {}

  static Order identity(int n) {
    std::vector<int> r(static_cast<std::size_t>(n));
    std::iota(r.begin(), r.end(), 0);
    return Order(r);
  }

  int size() const { return n_; }
  /// Item ranked at place `r` (0 = most preferred).
  int at(int r) const { return items_[static_cast<std::size_t>(r)]; }
  int rank_of(int item) const { return rank_[static_cast<std::size_t>(item)]; }
  bool prefers(int x, int y) const { return rank_of(x) < rank_of(y); }
  int top() const { return items_[0]; }

  std::vector<int> ranking() const { return {items_.begin(), items_.begin() + n_}; }

  /// Most preferred item whose bit is set in `mask`; -1 if the mask is empty.
  int best_in(std::uint32_t mask) const {
    for (int r = 0; r < n_; ++r)
      if (mask >> items_[static_cast<std::size_t>(r)] & 1u) return items_[static_cast<std::size_t>(r)];
    return -1;
  }

  friend bool operator==(const Order&, const Order&) = default;
  friend auto operator<=>(const Order& x, const Order& y) {
    if (auto c = x.n_ <=> y.n_; c != 0) return c;
    for (int r = 0; r < x.n_; ++r)
      if (auto c = x.items_[static_cast<std::size_t>(r)] <=> y.items_[static_cast<std::size_t>(r)]; c != 0) return c;
    return std::strong_ordering::equal;
  }

 private:
  std::uint8_t n_ = 0;
  std::array<std::uint8_t, kMaxAgents> items_{};
  std::array<std::uint8_t, kMaxAgents> rank_{};
};

/// Lehmer rank of an order among all orders of its size, lexicographic.
inline TypeId order_index(const Order& o) {
  const int n = o.size();
  TypeId idx = 0;
  std::uint32_t used = 0;
  for (int r = 0; r < n; ++r) {
    const int item = o.at(r);
    const int smaller_unused = item - std::popcount(used & ((1u << item) - 1u));
    idx += static_cast<TypeId>(smaller_unused * factorial(n - 1 - r));
    used |= 1u << item;
  }
  return idx;
}

inline Order order_from_index(int n, TypeId idx) {
  std::vector<int> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<int> ranking;
  ranking.reserve(pool.size());
  auto rest = static_cast<std::uint64_t>(idx);
  for (int r = 0; r < n; ++r) {
    const std::uint64_t f = factorial(n - 1 - r);
    const auto k = static_cast<std::size_t>(rest / f);
    rest %= f;
    ranking.push_back(pool[k]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(k));
  }
  return Order(ranking);
}

/// All n! orders in lexicographic order (so element i has order_index i).
inline std::vector<Order> all_orders(int n) {
  std::vector<int> r(static_cast<std::size_t>(n));
  std::iota(r.begin(), r.end(), 0);
  std::vector<Order> out;
  out.reserve(factorial(n));
  do {
    out.emplace_back(r);
  } while (std::next_permutation(r.begin(), r.end()));
  return out;
}

namespace detail {

inline std::vector<Order> check_lists(std::vector<Order> lists, const char* what) {
  const auto n = lists.size();
  if (n == 0 || n > static_cast<std::size_t>(kMaxAgents))
    throw std::invalid_argument(std::string(what) + ": size out of range");
  for (const auto& l : lists)
    if (static_cast<std::size_t>(l.size()) != n)
      throw std::invalid_argument(std::string(what) + ": every list must rank all n items");
  return lists;
}

}  // namespace detail

/// Priorities of the n positions over the n applicants; lists()[x] is
/// position x's strict ranking of applicants.
class PrioritySet {
 public:
  PrioritySet() = default;
  explicit PrioritySet(std::vector<Order> lists)
      : lists_(detail::check_lists(std::move(lists), "priority set")) {}

  int size() const { return static_cast<int>(lists_.size()); }
  const Order& list(Position x) const { return lists_[static_cast<std::size_t>(x)]; }
  const std::vector<Order>& lists() const { return lists_; }
  bool prefers(Position x, Applicant a, Applicant b) const { return list(x).prefers(a, b); }

  friend bool operator==(const PrioritySet&, const PrioritySet&) = default;
  friend auto operator<=>(const PrioritySet&, const PrioritySet&) = default;

 private:
  std::vector<Order> lists_;
};

/// One applicant type per applicant: prefs()[a] ranks positions for a.
class PreferenceProfile {
 public:
  PreferenceProfile() = default;
  explicit PreferenceProfile(std::vector<Order> prefs)
      : prefs_(detail::check_lists(std::move(prefs), "preference profile")) {}

  int size() const { return static_cast<int>(prefs_.size()); }
  const Order& pref(Applicant a) const { return prefs_[static_cast<std::size_t>(a)]; }
  const std::vector<Order>& prefs() const { return prefs_; }

  PreferenceProfile with(Applicant a, const Order& o) const {
    auto copy = prefs_;
    copy[static_cast<std::size_t>(a)] = o;
    return PreferenceProfile(std::move(copy));
  }

  friend bool operator==(const PreferenceProfile&, const PreferenceProfile&) = default;
  friend auto operator<=>(const PreferenceProfile&, const PreferenceProfile&) = default;

 private:
  std::vector<Order> prefs_;
};

/// A perfect matching between applicants and positions.
class Matching {
 public:
  Matching() = default;
  explicit Matching(std::vector<Position> applicant_to_position)
      : to_position_(std::move(applicant_to_position)), to_applicant_(to_position_.size(), -1) {
    const int n = size();
    for (Applicant a = 0; a < n; ++a) {
      const Position x = to_position_[static_cast<std::size_t>(a)];
      if (x < 0 || x >= n || to_applicant_[static_cast<std::size_t>(x)] != -1)
        throw std::invalid_argument("matching is not a bijection");
      to_applicant_[static_cast<std::size_t>(x)] = a;
    }
  }

  int size() const { return static_cast<int>(to_position_.size()); }
  Position position_of(Applicant a) const { return to_position_[static_cast<std::size_t>(a)]; }
  Applicant applicant_at(Position x) const { return to_applicant_[static_cast<std::size_t>(x)]; }
  const std::vector<Position>& applicant_to_position() const { return to_position_; }
  const std::vector<Applicant>& position_to_applicant() const { return to_applicant_; }

  friend bool operator==(const Matching& x, const Matching& y) { return x.to_position_ == y.to_position_; }
  friend auto operator<=>(const Matching& x, const Matching& y) { return x.to_position_ <=> y.to_position_; }

 private:
  std::vector<Position> to_position_;
  std::vector<Applicant> to_applicant_;
};

/// Equal-size subsets of applicants and positions, both kept sorted.
struct Restriction {
  std::vector<Applicant> applicants;
  std::vector<Position> positions;

  friend bool operator==(const Restriction&, const Restriction&) = default;
};

namespace detail {

inline void check_subset(std::vector<int>& s, int n, const char* what) {
  std::sort(s.begin(), s.end());
  if (std::adjacent_find(s.begin(), s.end()) != s.end())
    throw std::invalid_argument(std::string(what) + " contains duplicates");
  if (!s.empty() && (s.front() < 0 || s.back() >= n))
    throw std::invalid_argument(std::string(what) + " out of range");
}

/// Filter `o` to the items of sorted `keep`, relabeling each kept item by
/// its index within `keep`.
inline Order filter_order(const Order& o, std::span<const int> keep) {
  std::array<int, kMaxAgents> new_label{};
  new_label.fill(-1);
  for (std::size_t i = 0; i < keep.size(); ++i) new_label[static_cast<std::size_t>(keep[i])] = static_cast<int>(i);
  std::vector<int> r;
  r.reserve(keep.size());
  for (int k = 0; k < o.size(); ++k)
    if (const int l = new_label[static_cast<std::size_t>(o.at(k))]; l >= 0) r.push_back(l);
  return Order(r);
}

}  // namespace detail

/// Priorities of the positions in r.positions over the applicants in
/// r.applicants, both relabeled to 0..m-1 in ascending order.
inline PrioritySet restrict(const PrioritySet& q, Restriction r) {
  const int n = q.size();
  detail::check_subset(r.applicants, n, "restriction applicants");
  detail::check_subset(r.positions, n, "restriction positions");
  if (r.applicants.size() != r.positions.size())
    throw std::invalid_argument("restriction must pick as many applicants as positions");
  if (r.applicants.empty()) throw std::invalid_argument("restriction must be nonempty");
  std::vector<Order> lists;
  lists.reserve(r.positions.size());
  for (Position x : r.positions) lists.push_back(detail::filter_order(q.list(x), r.applicants));
  return PrioritySet(std::move(lists));
}

/// Same as restrict() but over a profile: applicants in `r.applicants`
/// keep their orders filtered to `r.positions`.
inline PreferenceProfile restrict(const PreferenceProfile& p, Restriction r) {
  const int n = p.size();
  detail::check_subset(r.applicants, n, "restriction applicants");
  detail::check_subset(r.positions, n, "restriction positions");
  if (r.applicants.size() != r.positions.size() || r.applicants.empty())
    throw std::invalid_argument("restriction sizes must match and be nonempty");
  std::vector<Order> prefs;
  for (Applicant a : r.applicants) prefs.push_back(detail::filter_order(p.pref(a), r.positions));
  return PreferenceProfile(std::move(prefs));
}

/// Rename applicant a to applicant_perm[a] and move position x's list to
/// position_perm[x].
inline PrioritySet relabel(const PrioritySet& q, std::span<const int> applicant_perm,
                           std::span<const int> position_perm) {
  const auto n = static_cast<std::size_t>(q.size());
  if (applicant_perm.size() != n || position_perm.size() != n)
    throw std::invalid_argument("relabeling size mismatch");
  std::vector<Order> lists(n);
  std::vector<int> r(n);
  for (std::size_t x = 0; x < n; ++x) {
    const Order& o = q.list(static_cast<Position>(x));
    for (std::size_t k = 0; k < n; ++k) r[k] = applicant_perm[static_cast<std::size_t>(o.at(static_cast<int>(k)))];
    lists.at(static_cast<std::size_t>(position_perm[x])) = Order(r);
  }
  return PrioritySet(std::move(lists));
}

/// Canonical representative of q under all applicant relabelings and all
/// position permutations: the lexicographically least sorted list multiset.
inline PrioritySet canonical_form(const PrioritySet& q) {
  const int n = q.size();
  // a row packed big-endian into one word compares lexicographically
  using Row = std::uint64_t;
  std::array<Row, kMaxAgents> best{}, cur{};
  bool have_best = false;
  std::array<int, kMaxAgents> sigma{};
  std::iota(sigma.begin(), sigma.begin() + n, 0);
  const auto rows = static_cast<std::size_t>(n);
  do {
    for (int x = 0; x < n; ++x) {
      Row row = 0;
      const Order& o = q.list(x);
      for (int k = 0; k < n; ++k)
        row |= Row(sigma[static_cast<std::size_t>(o.at(k))]) << (8 * (kMaxAgents - 1 - k));
      cur[static_cast<std::size_t>(x)] = row;
    }
    std::sort(cur.begin(), cur.begin() + n);
    if (!have_best || std::lexicographical_compare(cur.begin(), cur.begin() + n, best.begin(), best.begin() + n)) {
      best = cur;
      have_best = true;
    }
  } while (std::next_permutation(sigma.begin(), sigma.begin() + n));
  std::vector<Order> lists;
  lists.reserve(rows);
  std::vector<int> r(rows);
  for (std::size_t x = 0; x < rows; ++x) {
    for (std::size_t k = 0; k < rows; ++k) r[k] = static_cast<int>((best[x] >> (8 * (kMaxAgents - 1 - k))) & 0xff);
    lists.emplace_back(r);
  }
  return PrioritySet(std::move(lists));
}

inline bool relabel_equivalent(const PrioritySet& x, const PrioritySet& y) {
  return x.size() == y.size() && canonical_form(x) == canonical_form(y);
}

/// The full space of n x n priority sets, addressable by index so that
/// sweeps can be sharded. Position 0's list is the most significant digit.
class PrioritySetSpace {
 public:
  explicit PrioritySetSpace(int n) : n_(n), orders_(all_orders(n)) {
    if (n < 1 || n > kMaxAgents) throw std::invalid_argument("n out of range");
    count_ = 1;
    for (int i = 0; i < n; ++i) count_ *= orders_.size();
  }

  int n() const { return n_; }
  std::uint64_t count() const { return count_; }

  PrioritySet at(std::uint64_t index) const {
    if (index >= count_) throw std::out_of_range("priority set index");
    std::vector<Order> lists(static_cast<std::size_t>(n_));
    for (int x = n_ - 1; x >= 0; --x) {
      lists[static_cast<std::size_t>(x)] = orders_[index % orders_.size()];
      index /= orders_.size();
    }
    return PrioritySet(std::move(lists));
  }

  template <class Fn>
  void for_each(std::uint64_t begin, std::uint64_t end, Fn&& fn) const {
    for (std::uint64_t i = begin; i < end && i < count_; ++i) fn(i, at(i));
  }

 private:
  int n_;
  std::vector<Order> orders_;
  std::uint64_t count_ = 0;
};

/// All (n!)^n priority sets in index order.
inline std::vector<PrioritySet> enumerate_priority_sets(int n) {
  PrioritySetSpace space(n);
  std::vector<PrioritySet> out;
  out.reserve(space.count());
  space.for_each(0, space.count(), [&](std::uint64_t, PrioritySet q) { out.push_back(std::move(q)); });
  return out;
}

/// All m-element subsets of {0..n-1} in lexicographic order.
inline std::vector<std::vector<int>> combinations(int n, int m) {
  std::vector<std::vector<int>> out;
  if (m < 0 || m > n) return out;
  std::vector<int> c(static_cast<std::size_t>(m));
  std::iota(c.begin(), c.end(), 0);
  while (true) {
    out.push_back(c);
    int i = m - 1;
    while (i >= 0 && c[static_cast<std::size_t>(i)] == n - m + i) --i;
    if (i < 0) break;
    ++c[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < m; ++j) c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
  }
  return out;
}

/// All C(n,m)^2 restrictions of size m, applicant subset major.
inline std::vector<Restriction> restrictions(int n, int m) {
  if (m < 1 || m > n) throw std::invalid_argument("restriction size must satisfy 1 <= m <= n");
  const auto subsets = combinations(n, m);
  std::vector<Restriction> out;
  out.reserve(subsets.size() * subsets.size());
  for (const auto& s : subsets)
    for (const auto& t : subsets) out.push_back({s, t});
  return out;
}

inline std::vector<Restriction> restrictions(const PrioritySet& q, int m) { return restrictions(q.size(), m); }

// Compact literal helpers, mainly for fixtures: priorities as rows of
// applicant letters ("abc"), preferences as rows of 1-based position digits
// ("312"). Short preference rows are completed by appending the missing
// positions in ascending order.

inline Order order_from_letters(std::string_view row) {
  std::vector<int> r;
  for (char ch : row) r.push_back(ch - 'a');
  return Order(r);
}

inline Order order_from_digits(std::string_view row, int n) {
  std::vector<int> r;
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (char ch : row) {
    const int x = ch - '1';
    if (x < 0 || x >= n || seen[static_cast<std::size_t>(x)]) throw std::invalid_argument("bad preference row");
    seen[static_cast<std::size_t>(x)] = true;
    r.push_back(x);
  }
  for (int x = 0; x < n; ++x)
    if (!seen[static_cast<std::size_t>(x)]) r.push_back(x);
  return Order(r);
}

inline PrioritySet priorities(std::initializer_list<std::string_view> rows) {
  std::vector<Order> lists;
  for (auto row : rows) lists.push_back(order_from_letters(row));
  return PrioritySet(std::move(lists));
}

inline PreferenceProfile preferences(std::initializer_list<std::string_view> rows) {
  const int n = static_cast<int>(rows.size());
  std::vector<Order> prefs;
  for (auto row : rows) prefs.push_back(order_from_digits(row, n));
  return PreferenceProfile(std::move(prefs));
}

inline std::string letters(const Order& o) {
  std::string s;
  for (int k = 0; k < o.size(); ++k) s += applicant_name(o.at(k));
  return s;
}

inline std::string digits(const Order& o) {
  std::string s;
  for (int k = 0; k < o.size(); ++k) s += position_name(o.at(k));
  return s;
}

/// "1:abc 2:acb 3:bac"
inline std::string to_string(const PrioritySet& q) {
  std::string s;
  for (int x = 0; x < q.size(); ++x) {
    if (x) s += ' ';
    s += position_name(x) + ":" + letters(q.list(x));
  }
  return s;
}

/// "a:312 b:123 c:132"
inline std::string to_string(const PreferenceProfile& p) {
  std::string s;
  for (int a = 0; a < p.size(); ++a) {
    if (a) s += ' ';
    s += std::string(1, applicant_name(a)) + ":" + digits(p.pref(a));
  }
  return s;
}

/// "{a-2, b-1, c-3}"
inline std::string to_string(const Matching& m) {
  std::string s = "{";
  for (int a = 0; a < m.size(); ++a) {
    if (a) s += ", ";
    s += std::string(1, applicant_name(a)) + "-" + position_name(m.position_of(a));
  }
  return s + "}";
}

inline std::string set_names(std::span<const Applicant> s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ',';
    out += applicant_name(s[i]);
  }
  return out + "}";
}

inline std::string position_set_names(std::span<const Position> s) {
  std::string out = "{";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ',';
    out += position_name(s[i]);
  }
  return out + "}";
}

}  // namespace osp
