#pragma once

// Non-implementability certificates. A subdomain gives each applicant one
// to three types; if every applicant with several types has, for the
// required truthful types, a misreport whose best DA outcome beats the
// truthful worst outcome, then no OSP mechanism implements DA on the full
// domain.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "osp/classify.hpp"
#include "osp/core.hpp"
#include "osp/da.hpp"
#include "osp/parallel.hpp"

namespace osp {

inline constexpr std::size_t kMaxSubdomainTypes = 3;

struct Subdomain {
  std::vector<std::vector<Order>> types;  // types[i] = T'_i

  int size() const { return static_cast<int>(types.size()); }
  friend bool operator==(const Subdomain&, const Subdomain&) = default;
};

/// Empty string when d is a well-formed subdomain for n applicants.
inline std::string subdomain_problem(const Subdomain& d, int n) {
  if (d.size() != n) return "subdomain has " + std::to_string(d.size()) + " applicants, expected " + std::to_string(n);
  bool some_choice = false;
  for (int i = 0; i < n; ++i) {
    const auto& t = d.types[static_cast<std::size_t>(i)];
    const std::string who = std::string("applicant ") + applicant_name(i);
    if (t.empty() || t.size() > kMaxSubdomainTypes) return who + " needs between 1 and 3 types";
    for (std::size_t k = 0; k < t.size(); ++k) {
      if (t[k].size() != n) return who + " has a type of the wrong length";
      for (std::size_t j = 0; j < k; ++j)
        if (t[j] == t[k]) return who + " lists the same type twice";
    }
    some_choice = some_choice || t.size() > 1;
  }
  if (!some_choice) return "every applicant has a single type";
  return {};
}

/// One realization of the impossibility condition for an applicant: reporting
/// `deviation` under some profile yields a position the truthful type
/// strictly prefers to what truth-telling yields under another profile.
struct WitnessEvidence {
  Applicant applicant = 0;
  std::size_t truthful = 0;   // index into T'_i
  std::size_t deviation = 0;  // index into T'_i
  std::vector<std::size_t> truthful_profile;   // type index per applicant
  std::vector<std::size_t> deviating_profile;  // type index per applicant
  Position truthful_position = 0;
  Position deviating_position = 0;
};

struct WitnessReport {
  bool ok = false;
  std::vector<WitnessEvidence> evidence;
  std::optional<Applicant> failed;  // first applicant whose condition fails
  std::optional<std::size_t> failed_type;
};

inline PreferenceProfile profile_of(const Subdomain& d, const std::vector<std::size_t>& idx) {
  std::vector<Order> prefs;
  prefs.reserve(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) prefs.push_back(d.types[i].at(idx[i]));
  return PreferenceProfile(std::move(prefs));
}

namespace detail {

// Mixed-radix decoding of a profile index.
inline std::vector<std::size_t> decode_profile(const Subdomain& d, std::size_t k) {
  std::vector<std::size_t> idx(d.types.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    idx[i] = k % d.types[i].size();
    k /= d.types[i].size();
  }
  return idx;
}

}  // namespace detail

/// Checks the impossibility conditions against deferred acceptance under q. With
/// two types the condition must hold for one of them; with three it must
/// hold for each. Throws std::invalid_argument on a malformed subdomain.
inline WitnessReport check_witness(const PrioritySet& q, const Subdomain& d) {
  const int n = q.size();
  if (auto problem = subdomain_problem(d, n); !problem.empty()) throw std::invalid_argument(problem);

  std::size_t total = 1;
  for (const auto& t : d.types) total *= t.size();
  std::vector<std::vector<Position>> outcome(total);
  for (std::size_t k = 0; k < total; ++k)
    outcome[k] = run_da(q, profile_of(d, detail::decode_profile(d, k))).applicant_to_position();

  WitnessReport report;
  report.ok = true;
  for (Applicant i = 0; i < n; ++i) {
    const auto& ti = d.types[static_cast<std::size_t>(i)];
    const std::size_t m = ti.size();
    if (m == 1) continue;
    // best[s][r]: profile giving i the best position under type s when i reports r.
    // worst[s]: profile giving i the worst position under type s when reporting s.
    std::vector<std::vector<std::size_t>> best(m, std::vector<std::size_t>(m, total));
    std::vector<std::size_t> worst(m, total);
    for (std::size_t k = 0; k < total; ++k) {
      const std::size_t r = detail::decode_profile(d, k)[static_cast<std::size_t>(i)];
      const Position got = outcome[k][static_cast<std::size_t>(i)];
      for (std::size_t s = 0; s < m; ++s) {
        auto& b = best[s][r];
        if (b == total || ti[s].prefers(got, outcome[b][static_cast<std::size_t>(i)])) b = k;
      }
      auto& w = worst[r];
      if (w == total || ti[r].prefers(outcome[w][static_cast<std::size_t>(i)], got)) w = k;
    }
    std::size_t satisfied = 0;
    std::optional<std::size_t> first_unsatisfied;
    for (std::size_t s = 0; s < m; ++s) {
      const Position low = outcome[worst[s]][static_cast<std::size_t>(i)];
      bool found = false;
      for (std::size_t r = 0; r < m && !found; ++r) {
        if (r == s) continue;
        const Position high = outcome[best[s][r]][static_cast<std::size_t>(i)];
        if (!ti[s].prefers(high, low)) continue;
        found = true;
        report.evidence.push_back({i, s, r, detail::decode_profile(d, worst[s]), detail::decode_profile(d, best[s][r]),
                                   low, high});
      }
      if (found) ++satisfied;
      else if (!first_unsatisfied) first_unsatisfied = s;
    }
    const bool holds = m == 2 ? satisfied >= 1 : satisfied == m;
    if (!holds && report.ok) {
      report.ok = false;
      report.failed = i;
      report.failed_type = first_unsatisfied;
    }
  }
  return report;
}

/// Re-runs deferred acceptance on an evidence pair and confirms the strict
/// improvement it claims.
inline bool replay_evidence(const PrioritySet& q, const Subdomain& d, const WitnessEvidence& e) {
  const auto i = static_cast<std::size_t>(e.applicant);
  if (e.truthful_profile.at(i) != e.truthful || e.deviating_profile.at(i) != e.deviation) return false;
  const Position low = run_da(q, profile_of(d, e.truthful_profile)).position_of(e.applicant);
  const Position high = run_da(q, profile_of(d, e.deviating_profile)).position_of(e.applicant);
  return low == e.truthful_position && high == e.deviating_position &&
         d.types[i].at(e.truthful).prefers(high, low);
}

namespace detail {

inline std::mt19937_64 iteration_rng(std::uint64_t seed, std::uint64_t j) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(j >> 32)};
  return std::mt19937_64(seq);
}

// Draws 1 to 3 types per applicant. Types for the same applicant get
// distinct top-two prefixes; the tail is ascending or shuffled.
inline Subdomain sample_subdomain(int n, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick_size(1, 5);
  std::uniform_int_distribution<int> pick_position(0, n - 1);
  std::bernoulli_distribution ascending_tail(0.5);
  const std::size_t max_types = std::min<std::size_t>(kMaxSubdomainTypes, static_cast<std::size_t>(n) * (n - 1));
  std::vector<std::size_t> sizes(static_cast<std::size_t>(n));
  bool some_choice = false;
  for (auto& s : sizes) {
    const int r = pick_size(rng);
    s = std::min<std::size_t>(r == 1 ? 1 : r <= 3 ? 2 : 3, max_types);
    some_choice = some_choice || s > 1;
  }
  if (!some_choice) sizes[static_cast<std::size_t>(pick_position(rng))] = 2;

  Subdomain d;
  d.types.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    std::vector<std::pair<int, int>> used;
    while (d.types[static_cast<std::size_t>(i)].size() < sizes[static_cast<std::size_t>(i)]) {
      const int first = pick_position(rng);
      int second = pick_position(rng);
      if (second == first) continue;
      if (std::find(used.begin(), used.end(), std::pair{first, second}) != used.end()) continue;
      used.emplace_back(first, second);
      std::vector<int> ranking{first, second};
      std::vector<int> rest;
      for (int x = 0; x < n; ++x)
        if (x != first && x != second) rest.push_back(x);
      if (!ascending_tail(rng)) std::shuffle(rest.begin(), rest.end(), rng);
      ranking.insert(ranking.end(), rest.begin(), rest.end());
      d.types[static_cast<std::size_t>(i)].emplace_back(ranking);
    }
  }
  return d;
}

}  // namespace detail

/// Randomized search for a witness subdomain. Iteration j draws from an
/// RNG seeded by (seed, j) and the smallest successful j wins, so the
/// result does not depend on the thread count.
inline std::optional<Subdomain> find_witness(const PrioritySet& q, std::uint64_t budget, std::uint64_t seed,
                                             unsigned threads = 1) {
  const int n = q.size();
  if (n < 2 || budget == 0) return std::nullopt;
  std::atomic<std::uint64_t> best{std::numeric_limits<std::uint64_t>::max()};
  parallel_shards(budget, threads, [&](unsigned, std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t j = begin; j < end && j < best.load(std::memory_order_relaxed); ++j) {
      auto rng = detail::iteration_rng(seed, j);
      if (!check_witness(q, detail::sample_subdomain(n, rng)).ok) continue;
      std::uint64_t cur = best.load();
      while (j < cur && !best.compare_exchange_weak(cur, j)) {
      }
      return;
    }
  });
  const std::uint64_t j = best.load();
  if (j == std::numeric_limits<std::uint64_t>::max()) return std::nullopt;
  auto rng = detail::iteration_rng(seed, j);
  return detail::sample_subdomain(n, rng);
}

struct Relabeling {
  std::vector<int> applicants;  // a -> applicants[a]
  std::vector<int> positions;   // x -> positions[x]
};

/// Some relabeling with relabel(from, r.applicants, r.positions) == to.
inline std::optional<Relabeling> find_relabeling(const PrioritySet& from, const PrioritySet& to) {
  const int n = from.size();
  if (to.size() != n) return std::nullopt;
  std::vector<int> sigma(static_cast<std::size_t>(n));
  std::iota(sigma.begin(), sigma.end(), 0);
  do {
    std::vector<int> pi(static_cast<std::size_t>(n), -1);
    std::vector<bool> taken(static_cast<std::size_t>(n), false);
    bool ok = true;
    std::vector<int> r(static_cast<std::size_t>(n));
    for (int x = 0; x < n && ok; ++x) {
      for (int k = 0; k < n; ++k) r[static_cast<std::size_t>(k)] = sigma[static_cast<std::size_t>(from.list(x).at(k))];
      const Order renamed(r);
      ok = false;
      for (int y = 0; y < n; ++y) {
        if (taken[static_cast<std::size_t>(y)] || !(to.list(y) == renamed)) continue;
        taken[static_cast<std::size_t>(y)] = true;
        pi[static_cast<std::size_t>(x)] = y;
        ok = true;
        break;
      }
    }
    if (ok) return Relabeling{sigma, pi};
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  return std::nullopt;
}

/// Carries a subdomain along a relabeling of the market.
inline Subdomain relabel(const Subdomain& d, const Relabeling& r) {
  Subdomain out;
  out.types.resize(d.types.size());
  for (std::size_t i = 0; i < d.types.size(); ++i) {
    auto& dst = out.types[static_cast<std::size_t>(r.applicants[i])];
    for (const Order& o : d.types[i]) {
      std::vector<int> ranking;
      for (int k = 0; k < o.size(); ++k) ranking.push_back(r.positions[static_cast<std::size_t>(o.at(k))]);
      dst.emplace_back(ranking);
    }
  }
  return out;
}

struct Fixture {
  std::string label;
  char pattern;  // forbidden pattern letter
  PrioritySet q;
  Subdomain d;
};

/// Types written as position digits, completed ascending.
inline Subdomain subdomain(int n, std::initializer_list<std::initializer_list<std::string_view>> rows) {
  Subdomain d;
  for (const auto& row : rows) {
    auto& t = d.types.emplace_back();
    for (std::string_view s : row) t.push_back(order_from_digits(s, n));
  }
  return d;
}

/// Bundled witnesses, one or more for every forbidden pattern.
inline const std::vector<Fixture>& fixtures() {
  static const std::vector<Fixture> all = [] {
    std::vector<Fixture> v;
    const Subdomain two_equal = subdomain(3, {{"312", "321"}, {"123", "213"}, {"123", "132", "231"}});
    v.push_back({"two equal lists, third c>a>b", 'b', priorities({"abc", "abc", "cab"}), two_equal});
    v.push_back({"two equal lists, third c>b>a", 'b', priorities({"abc", "abc", "cba"}), two_equal});
    v.push_back({"two equal lists, third b>c>a", 'b', priorities({"abc", "abc", "bca"}), two_equal});
    v.push_back({"abc acb cba", 'c', priorities({"abc", "acb", "cba"}),
                 subdomain(3, {{"312", "321"}, {"123", "213", "231"}, {"123", "132", "231"}})});

    const PrioritySet claim = priorities({"abc", "bac", "cab"});
    const Subdomain claim_d = subdomain(3, {{"213", "312", "321"}, {"321", "132"}, {"231", "123", "132"}});
    v.push_back({"abc bac cab", 'd', claim, claim_d});
    for (const PrioritySet& variant : {priorities({"abc", "bac", "cba"}), priorities({"abc", "cba", "bca"})}) {
      const auto r = find_relabeling(claim, variant);
      if (!r) throw std::logic_error("fixture variant is not a relabeling");
      v.push_back({to_string(variant), 'd', variant, relabel(claim_d, *r)});
    }

    v.push_back({"four positions", 'e', priorities({"abcd", "abdc", "acbd", "bacd"}),
                 subdomain(4, {{"4213", "4312"}, {"3124", "3412"}, {"2314", "3124"}, {"1234", "2134"}})});
    // found by find_witness(q, 100000, 1) and frozen
    v.push_back({"three-cycle", 'a', priorities({"abc", "bca", "cab"}),
                 subdomain(3, {{"321", "213", "231"}, {"132", "321"}, {"213", "123", "231"}})});
    return v;
  }();
  return all;
}

}  // namespace osp
