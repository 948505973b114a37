#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

#include "osp/io.hpp"
#include "osp/synth.hpp"

using namespace osp;

namespace {

std::string pointer_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const FormatError& e) {
    return e.pointer();
  }
  return "<no error>";
}

}  // namespace

TEST(Io, PrioritiesRoundTrip) {
  const auto q = priorities({"abc", "bca", "cab"});
  const json j = to_json(q);
  EXPECT_EQ(j["priorities"][1], json({"b", "c", "a"}));
  EXPECT_EQ(priorities_from_json(j), q);
}

TEST(Io, ProfileAcceptsNumbersAndDigitStrings) {
  const auto p = preferences({"312", "123", "231"});
  EXPECT_EQ(profile_from_json(to_json(p)), p);
  EXPECT_EQ(profile_from_json(json::parse(R"({"n":3,"preferences":[["3","1","2"],[1,2,3],[2,3,1]]})")), p);
}

TEST(Io, MatchingRoundTrip) {
  const Matching m({1, 0, 2});
  const json j = to_json(m);
  EXPECT_EQ(j["matching"]["a"], 2);
  EXPECT_EQ(matching_from_json(j), m);
}

TEST(Io, SubdomainRoundTrip) {
  const auto& f = fixtures().front();
  EXPECT_EQ(subdomain_from_json(to_json(f.d)), f.d);
}

TEST(Io, TreeRoundTrip) {
  const auto t = synthesize(priorities({"abc", "acb", "bac"}));
  const auto back = tree_from_json(json::parse(to_json(t).dump()));
  ASSERT_EQ(back.nodes.size(), t.nodes.size());
  EXPECT_EQ(back.universe, t.universe);
  for (std::size_t h = 0; h < t.nodes.size(); ++h) {
    EXPECT_EQ(back.nodes[h].player, t.nodes[h].player);
    EXPECT_EQ(back.nodes[h].children, t.nodes[h].children);
    EXPECT_EQ(back.nodes[h].child_types, t.nodes[h].child_types);
    EXPECT_EQ(back.nodes[h].outcome, t.nodes[h].outcome);
  }
  EXPECT_TRUE(validate(back).ok);
}

TEST(Io, FilesRoundTrip) {
  const auto path = (std::filesystem::temp_directory_path() / "osp_io_test.json").string();
  const auto q = priorities({"abcd", "abdc", "acbd", "bacd"});
  write_json_file(path, to_json(q));
  EXPECT_EQ(priorities_from_json(read_json_file(path)), q);
  std::remove(path.c_str());
  EXPECT_THROW(read_json_file(path), std::runtime_error);
}

TEST(Io, ErrorsCarryJsonPointers) {
  EXPECT_EQ(pointer_of([] { priorities_from_json(json::parse(R"({"n":3,"priorities":[["a","b"],["a","b","c"],["a","b","c"]]})")); }),
            "/priorities/0");
  EXPECT_EQ(pointer_of([] { priorities_from_json(json::parse(R"({"n":3,"priorities":[["a","b","c"],["a","a","c"],["a","b","c"]]})")); }),
            "/priorities/1/1");
  EXPECT_EQ(pointer_of([] { priorities_from_json(json::parse(R"({"priorities":[]})")); }), "/n");
  EXPECT_EQ(pointer_of([] { profile_from_json(json::parse(R"({"n":2,"preferences":[[1,2],[1,7]]})")); }),
            "/preferences/1/1");
  EXPECT_EQ(pointer_of([] { matching_from_json(json::parse(R"({"n":2,"matching":{"a":1,"b":1}})")); }), "/matching");
  EXPECT_EQ(pointer_of([] { subdomain_from_json(json::parse(R"({"n":2,"types":[[[1,2]],[[2,1]]]})")); }), "/types");
  EXPECT_EQ(pointer_of([] { tree_from_json(json::parse(R"({"n":1,"universes":[[0]],"nodes":[{"player":"a","children":[5],"types":[[0]]}]})")); }),
            "/nodes/0/children/0");
}

TEST(Io, ReportsSerialize) {
  const auto q = priorities({"abc", "bca", "cab"});
  const json c = to_json(classify(q));
  EXPECT_EQ(c["verdict"], "not limited cyclic");
  const auto& f = fixtures().back();
  const json w = to_json(check_witness(f.q, f.d), f.d);
  EXPECT_EQ(w["ok"], true);
}
