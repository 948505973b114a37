#pragma once

// Exhaustive enumeration of all n x n priority sets grouped into
// relabeling classes.

#include <algorithm>
#include <cstdint>
#include <map>
#include <mutex>
#include <vector>

#include "osp/classify.hpp"
#include "osp/core.hpp"
#include "osp/parallel.hpp"

namespace osp {

struct ClassRow {
  PrioritySet canonical;
  std::uint64_t members = 0;
  Classification classification;  // of the canonical representative
};

/// One row per relabeling class of n x n priority sets, sorted by
/// canonical form.
inline std::vector<ClassRow> census(int n, unsigned threads = 1) {
  const PrioritySetSpace space(n);
  std::map<PrioritySet, std::uint64_t> counts;
  std::mutex mu;
  parallel_shards(space.count(), threads, [&](unsigned, std::uint64_t begin, std::uint64_t end) {
    std::map<PrioritySet, std::uint64_t> local;
    space.for_each(begin, end, [&](std::uint64_t, const PrioritySet& q) { ++local[canonical_form(q)]; });
    std::lock_guard lock(mu);
    for (auto& [k, v] : local) counts[k] += v;
  });
  std::vector<ClassRow> rows;
  rows.reserve(counts.size());
  for (auto& [k, v] : counts) rows.push_back({k, v, classify(k)});
  return rows;
}

}  // namespace osp
