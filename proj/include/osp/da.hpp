#pragma once

// Applicant-proposing deferred acceptance and its brute-force oracles.

#include <algorithm>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "osp/core.hpp"

namespace osp {

/// Proposals made in one simultaneous round: proposers[x] lists the
/// applicants (ascending) who proposed to position x in that round.
struct ProposalRound {
  std::vector<std::vector<Applicant>> proposers;
};

using Transcript = std::vector<ProposalRound>;

/// Runs deferred acceptance in simultaneous rounds. Every unmatched
/// applicant proposes to its next position; each position keeps its best
/// proposer so far. The outcome is the applicant-optimal stable matching.
inline Matching run_da(const PrioritySet& q, const PreferenceProfile& p, Transcript* transcript = nullptr) {
  const int n = q.size();
  if (p.size() != n) throw std::invalid_argument("priority set and profile sizes differ");

  std::vector<int> next(static_cast<std::size_t>(n), 0);
  std::vector<Applicant> held(static_cast<std::size_t>(n), -1);
  std::vector<Position> at(static_cast<std::size_t>(n), -1);
  std::vector<Applicant> free_now;
  for (Applicant a = 0; a < n; ++a) free_now.push_back(a);

  int rounds = 0;
  while (!free_now.empty()) {
    if (++rounds > n * n) throw std::logic_error("deferred acceptance exceeded n^2 rounds");
    ProposalRound round;
    if (transcript) round.proposers.assign(static_cast<std::size_t>(n), {});
    std::vector<Applicant> rejected;
    for (Applicant a : free_now) {
      const Position x = p.pref(a).at(next[static_cast<std::size_t>(a)]++);
      if (transcript) round.proposers[static_cast<std::size_t>(x)].push_back(a);
      Applicant& h = held[static_cast<std::size_t>(x)];
      if (h == -1) {
        h = a;
        at[static_cast<std::size_t>(a)] = x;
      } else if (q.prefers(x, a, h)) {
        at[static_cast<std::size_t>(h)] = -1;
        rejected.push_back(h);
        h = a;
        at[static_cast<std::size_t>(a)] = x;
      } else {
        rejected.push_back(a);
      }
    }
    if (transcript) transcript->push_back(std::move(round));
    std::sort(rejected.begin(), rejected.end());
    free_now = std::move(rejected);
  }
  return Matching(std::move(at));
}

/// The proposal table used in hand-written runs: one row per position,
/// one column per round, e.g. "2 |     |   | a"; empty trailing cells are dropped.
inline std::string format_transcript(const Transcript& t, int n) {
  std::vector<std::vector<std::string>> cells(static_cast<std::size_t>(n));
  std::vector<std::size_t> width(t.size(), 1);
  for (std::size_t r = 0; r < t.size(); ++r) {
    for (int x = 0; x < n; ++x) {
      std::string c;
      for (Applicant a : t[r].proposers[static_cast<std::size_t>(x)]) {
        if (!c.empty()) c += ' ';
        c += applicant_name(a);
      }
      width[r] = std::max(width[r], c.size());
      cells[static_cast<std::size_t>(x)].push_back(std::move(c));
    }
  }
  std::ostringstream os;
  for (int x = 0; x < n; ++x) {
    std::string line = position_name(x);
    const auto& row = cells[static_cast<std::size_t>(x)];
    std::size_t used = row.size();
    while (used > 0 && row[used - 1].empty()) --used;
    for (std::size_t r = 0; r < used; ++r) {
      const auto& c = cells[static_cast<std::size_t>(x)][r];
      line += " | " + c + std::string(width[r] - c.size(), ' ');
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    os << line << '\n';
  }
  return os.str();
}

inline bool is_stable(const PrioritySet& q, const PreferenceProfile& p, const Matching& mu) {
  const int n = q.size();
  for (Applicant a = 0; a < n; ++a) {
    const Position mine = mu.position_of(a);
    for (Position x = 0; x < n; ++x) {
      if (x == mine) continue;
      if (p.pref(a).prefers(x, mine) && q.prefers(x, a, mu.applicant_at(x))) return false;
    }
  }
  return true;
}

/// Largest market handled by the brute-force stable matching oracle.
inline constexpr int kMaxBruteForceN = 6;

inline std::vector<Matching> all_stable_matchings(const PrioritySet& q, const PreferenceProfile& p) {
  const int n = q.size();
  if (p.size() != n) throw std::invalid_argument("priority set and profile sizes differ");
  if (n > kMaxBruteForceN) throw std::invalid_argument("brute-force stable matching limited to n <= 6");
  std::vector<Position> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<Matching> out;
  do {
    Matching mu(perm);
    if (is_stable(q, p, mu)) out.push_back(std::move(mu));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

}  // namespace osp
