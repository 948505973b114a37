#include <gtest/gtest.h>

#include <random>
#include <set>

#include "oracles.hpp"
#include "osp/classify.hpp"

using namespace osp;

namespace {

const PrioritySet kCycle = priorities({"abc", "bca", "cab"});
const PrioritySet kLurker = priorities({"abc", "acb", "bac"});
const PrioritySet kStar = priorities({"abcdef", "abcdef", "abcdef", "abcdef", "acbedf", "badcfe"});

}  // namespace

TEST(Cyclic, Examples) {
  EXPECT_TRUE(is_cyclic(kCycle));
  EXPECT_FALSE(is_cyclic(priorities({"abc", "abc", "abc"})));
  EXPECT_TRUE(is_cyclic(kLurker));
}

TEST(Cyclic, AgreesWithDefinitionAtN3And4) {
  for (const auto& q : enumerate_priority_sets(3)) EXPECT_EQ(is_cyclic(q), oracle::cyclic(q)) << to_string(q);
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 3000; ++trial) {
    const auto q = oracle::random_priorities(4, rng);
    EXPECT_EQ(is_cyclic(q), oracle::cyclic(q)) << to_string(q);
  }
}

TEST(AcyclicPartition, Examples) {
  EXPECT_EQ(acyclic_partition(priorities({"abc", "abc", "bac"})), (BlockPartition{{0, 1}, {2}}));
  EXPECT_EQ(acyclic_partition(priorities({"abc", "abc", "abc"})), (BlockPartition{{0}, {1}, {2}}));
  EXPECT_FALSE(acyclic_partition(kCycle).has_value());
}

TEST(AcyclicPartition, ExistsIffAcyclicAndIsValid) {
  auto check = [](const PrioritySet& q) {
    const auto part = acyclic_partition(q);
    ASSERT_EQ(part.has_value(), !is_cyclic(q)) << to_string(q);
    if (!part) return;
    std::vector<int> block_of(q.size(), -1);
    for (std::size_t b = 0; b < part->size(); ++b) {
      EXPECT_LE((*part)[b].size(), 2u);
      for (Applicant a : (*part)[b]) block_of[a] = static_cast<int>(b);
    }
    for (int x = 0; x < q.size(); ++x)
      for (int a = 0; a < q.size(); ++a)
        for (int b = 0; b < q.size(); ++b)
          if (block_of[a] < block_of[b]) {
            EXPECT_TRUE(q.prefers(x, a, b));
          }
    EXPECT_TRUE(classify(q).limited_cyclic());
  };
  for (const auto& q : enumerate_priority_sets(3)) check(q);
  const PrioritySetSpace space(4);
  for (std::uint64_t i = 0; i < space.count(); i += 37) check(space.at(i));
}

TEST(Taa, Examples) {
  const auto star = is_two_adjacent_alternating(kStar);
  ASSERT_TRUE(star);
  EXPECT_EQ(star->order, (std::vector<int>{0, 1, 2, 3, 4, 5}));
  EXPECT_EQ(star->u_list, 4);
  EXPECT_EQ(star->v_list, 5);
  const auto small = is_two_adjacent_alternating(kLurker);
  ASSERT_TRUE(small);
  EXPECT_EQ(small->u_list, 1);
  EXPECT_EQ(small->v_list, 2);
  EXPECT_FALSE(is_two_adjacent_alternating(priorities({"abc", "abc", "abc"})));
}

TEST(Taa, SevenApplicantExample) {
  const auto q = priorities({"abcdefg", "abcdefg", "abcdefg", "abcdefg", "abcdefg", "acbedgf", "badcfeg"});
  const auto hit = is_two_adjacent_alternating(q);
  ASSERT_TRUE(hit);
  EXPECT_EQ(hit->u_list, 5);
  EXPECT_EQ(hit->v_list, 6);
}

TEST(Taa, TooSmallRejected) {
  const std::vector<Order> two_lists{order_from_letters("abc"), order_from_letters("acb")};
  EXPECT_THROW(is_two_adjacent_alternating(std::span<const Order>(two_lists)), std::invalid_argument);
  EXPECT_THROW(is_two_adjacent_alternating(priorities({"ab", "ba"})), std::invalid_argument);
}

TEST(Taa, SearchAndFingerprintAgree) {
  std::mt19937_64 rng(4);
  for (int k = 3; k <= 7; ++k) {
    for (int trial = 0; trial < 200; ++trial) {
      // half the trials start from a genuine TAA set, then maybe perturb
      std::vector<Order> lists;
      const int ell = k + trial % 3;
      if (trial % 2 == 0) {
        const auto lab = oracle::random_permutation(k, rng);
        const auto shapes = taa_shapes(lab);
        for (int i = 0; i < ell - 2; ++i) lists.push_back(shapes.x);
        lists.push_back(shapes.u);
        lists.push_back(shapes.v);
        std::shuffle(lists.begin(), lists.end(), rng);
        if (trial % 4 == 0) lists[0] = Order(oracle::random_permutation(k, rng));
      } else {
        for (int i = 0; i < ell; ++i) lists.emplace_back(oracle::random_permutation(k, rng));
      }
      const auto a = taa_by_search(lists);
      const auto b = taa_by_fingerprint(lists);
      EXPECT_EQ(a.has_value(), b.has_value());
      std::vector<std::vector<int>> raw;
      for (const auto& l : lists) raw.push_back(l.ranking());
      std::vector<int> all(k);
      std::iota(all.begin(), all.end(), 0);
      EXPECT_EQ(a.has_value(), oracle::two_adjacent_alternating(raw, all));
    }
  }
}

TEST(Taa, InvariantUnderRelabeling) {
  std::mt19937_64 rng(9);
  const PrioritySetSpace space(4);
  for (int trial = 0; trial < 2000; ++trial) {
    auto q = space.at(rng() % space.count());
    if (trial % 3 == 0) q = priorities({"abcd", "abcd", "acbd", "badc"});
    const auto moved = relabel(q, oracle::random_permutation(4, rng), oracle::random_permutation(4, rng));
    EXPECT_EQ(is_two_adjacent_alternating(q).has_value(), is_two_adjacent_alternating(moved).has_value());
  }
}

TEST(Patterns, FiveLettersSevenCanonicalForms) {
  const auto& pats = forbidden_patterns();
  ASSERT_EQ(pats.size(), 5u);
  std::set<PrioritySet> forms;
  std::size_t members = 0;
  for (const auto& p : pats) {
    members += p.members.size();
    for (const auto& c : p.canonical) forms.insert(c);
  }
  EXPECT_EQ(members, 7u);
  EXPECT_EQ(forms.size(), 7u);
}

TEST(Scan, Examples) {
  const auto d = scan_forbidden(priorities({"abc", "bac", "cba"}));
  ASSERT_TRUE(d);
  EXPECT_EQ(d->letter(), 'd');
  EXPECT_FALSE(scan_forbidden(kStar));
  // the 4x4 pattern on a..d and 1..4, with e last everywhere
  const auto embedded = priorities({"abcde", "abdce", "acbde", "bacde", "abcde"});
  const auto e = scan_forbidden(embedded);
  ASSERT_TRUE(e);
  EXPECT_EQ(e->letter(), 'e');
  EXPECT_EQ(e->restriction.applicants, (std::vector<int>{0, 1, 2, 3}));
}

TEST(Scan, WitnessRestrictsToNamedPattern) {
  for (const auto& q : enumerate_priority_sets(3)) {
    const auto w = scan_forbidden(q);
    if (!w) continue;
    const auto& pat = forbidden_patterns()[w->pattern];
    EXPECT_TRUE(oracle::isomorphic(restrict(q, w->restriction), pat.members[w->member]));
  }
}

TEST(Classify, Examples) {
  const auto star = classify(kStar);
  ASSERT_TRUE(star.limited_cyclic());
  ASSERT_EQ(star.partition.size(), 1u);
  EXPECT_EQ(star.partition[0].size(), 6u);
  ASSERT_EQ(star.labelings.size(), 1u);
  EXPECT_EQ(star.labelings[0].x_positions, (std::vector<int>{0, 1, 2, 3}));
  EXPECT_EQ(star.labelings[0].u, 4);
  EXPECT_EQ(star.labelings[0].v, 5);

  const auto cyc = classify(kCycle);
  EXPECT_FALSE(cyc.limited_cyclic());
  ASSERT_TRUE(cyc.witness);
  EXPECT_EQ(describe(*cyc.witness), "forbidden pattern (a) on applicants {a,b,c} positions {1,2,3}");

  const auto acyclic = classify(priorities({"abcd", "bacd", "abdc", "abcd"}));
  ASSERT_TRUE(acyclic.limited_cyclic());
  for (const auto& b : acyclic.partition) EXPECT_LE(b.size(), 2u);
}

TEST(Classify, LimitedCyclicInvariants) {
  auto check = [](const PrioritySet& q) {
    const auto c = classify(q);
    ASSERT_EQ(c.limited_cyclic(), oracle::limited_cyclic(q)) << to_string(q);
    if (!c.limited_cyclic()) {
      ASSERT_TRUE(c.witness) << to_string(q);
      return;
    }
    std::vector<int> block_of(q.size(), -1);
    for (std::size_t b = 0; b < c.partition.size(); ++b)
      for (Applicant a : c.partition[b]) {
        EXPECT_EQ(block_of[a], -1);
        block_of[a] = static_cast<int>(b);
      }
    for (int x = 0; x < q.size(); ++x)
      for (int a = 0; a < q.size(); ++a)
        for (int b = 0; b < q.size(); ++b)
          if (block_of[a] < block_of[b]) {
            EXPECT_TRUE(q.prefers(x, a, b));
          }
    std::size_t big = 0;
    for (const auto& b : c.partition) big += b.size() >= 3;
    EXPECT_EQ(c.labelings.size(), big);
  };
  for (const auto& q : enumerate_priority_sets(3)) check(q);
  const PrioritySetSpace space(4);
  for (std::uint64_t i = 0; i < space.count(); i += 53) check(space.at(i));
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 300; ++trial) check(oracle::random_priorities(5, rng));
}

TEST(Classify, NonLimitedCyclicThreeByThreeClassesAreThePatterns) {
  std::set<PrioritySet> bad;
  for (const auto& q : enumerate_priority_sets(3))
    if (!classify(q).limited_cyclic()) bad.insert(canonical_form(q));
  std::set<PrioritySet> expected;
  for (const auto& p : forbidden_patterns())
    if (p.members.front().size() == 3)
      for (const auto& c : p.canonical) expected.insert(c);
  EXPECT_EQ(bad, expected);
}
