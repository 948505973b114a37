#pragma once

// JSON documents for priorities, profiles, matchings, subdomains, mechanism
// trees and analysis reports. Applicants are lowercase letters; positions
// are 1-based numbers (an integer or a string of digits). Malformed input
// raises FormatError naming the offending JSON pointer.

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "osp/classify.hpp"
#include "osp/core.hpp"
#include "osp/mechanism.hpp"
#include "osp/witness.hpp"

namespace osp {

using json = nlohmann::json;

class FormatError : public std::runtime_error {
 public:
  FormatError(std::string pointer, const std::string& what)
      : std::runtime_error((pointer.empty() ? std::string("/") : pointer) + ": " + what), pointer_(std::move(pointer)) {}
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("", "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError("", path + ": " + e.what());
  }
}

inline void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump() << '\n';
}

namespace io_detail {

inline std::string at(const std::string& ptr, std::size_t k) { return ptr + "/" + std::to_string(k); }
inline std::string at(const std::string& ptr, const char* key) { return ptr + "/" + key; }

inline const json& field(const json& j, const char* key, const std::string& ptr) {
  if (!j.is_object()) throw FormatError(ptr, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw FormatError(at(ptr, key), "missing field");
  return *it;
}

inline const json& array(const json& j, const std::string& ptr) {
  if (!j.is_array()) throw FormatError(ptr, "expected an array");
  return j;
}

inline int size_field(const json& j, const std::string& ptr) {
  const json& v = field(j, "n", ptr);
  if (!v.is_number_integer() || v.get<long long>() < 1 || v.get<long long>() > kMaxAgents)
    throw FormatError(at(ptr, "n"), "expected an integer between 1 and " + std::to_string(kMaxAgents));
  return v.get<int>();
}

inline Applicant applicant(const json& j, int n, const std::string& ptr) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s.size() == 1 && s[0] >= 'a' && s[0] < 'a' + n) return s[0] - 'a';
  }
  throw FormatError(ptr, "expected an applicant name between \"a\" and \"" + std::string(1, applicant_name(n - 1)) + "\"");
}

inline Position position(const json& j, int n, const std::string& ptr) {
  long long v = 0;
  bool ok = false;
  if (j.is_number_integer()) {
    v = j.get<long long>();
    ok = true;
  } else if (j.is_string()) {
    const auto s = j.get<std::string>();
    ok = !s.empty() && s.size() <= 2 && s.find_first_not_of("0123456789") == std::string::npos;
    if (ok) v = std::stoll(s);
  }
  if (!ok || v < 1 || v > n) throw FormatError(ptr, "expected a position between 1 and " + std::to_string(n));
  return static_cast<Position>(v - 1);
}

template <class Item>
Order order(const json& j, int n, const std::string& ptr, Item item) {
  array(j, ptr);
  if (j.size() != static_cast<std::size_t>(n))
    throw FormatError(ptr, "expected " + std::to_string(n) + " entries, got " + std::to_string(j.size()));
  std::vector<int> r;
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (std::size_t k = 0; k < j.size(); ++k) {
    const int v = item(j[k], n, at(ptr, k));
    if (seen[static_cast<std::size_t>(v)]) throw FormatError(at(ptr, k), "repeated entry; lists must be permutations");
    seen[static_cast<std::size_t>(v)] = true;
    r.push_back(v);
  }
  return Order(r);
}

inline json applicant_list(const Order& o) {
  json a = json::array();
  for (int k = 0; k < o.size(); ++k) a.push_back(std::string(1, applicant_name(o.at(k))));
  return a;
}

inline json position_list(const Order& o) {
  json a = json::array();
  for (int k = 0; k < o.size(); ++k) a.push_back(o.at(k) + 1);
  return a;
}

inline json names(std::span<const Applicant> s) {
  json a = json::array();
  for (Applicant x : s) a.push_back(std::string(1, applicant_name(x)));
  return a;
}

inline json numbers(std::span<const Position> s) {
  json a = json::array();
  for (Position x : s) a.push_back(x + 1);
  return a;
}

inline TypeSet type_set(const json& j, int n, const std::string& ptr) {
  array(j, ptr);
  const auto count = static_cast<long long>(factorial(n));
  TypeSet out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    if (!j[k].is_number_integer() || j[k].get<long long>() < 0 || j[k].get<long long>() >= count)
      throw FormatError(at(ptr, k), "expected a type id below " + std::to_string(count));
    out.push_back(j[k].get<TypeId>());
  }
  for (std::size_t k = 1; k < out.size(); ++k)
    if (out[k - 1] >= out[k]) throw FormatError(at(ptr, k), "type ids must be strictly increasing");
  return out;
}

}  // namespace io_detail

// Priorities: {"n": 3, "priorities": [["a","b","c"], ...]}, one list per position.

inline json to_json(const PrioritySet& q) {
  json lists = json::array();
  for (const Order& o : q.lists()) lists.push_back(io_detail::applicant_list(o));
  return {{"n", q.size()}, {"priorities", lists}};
}

inline PrioritySet priorities_from_json(const json& j) {
  const int n = io_detail::size_field(j, "");
  const json& lists = io_detail::array(io_detail::field(j, "priorities", ""), "/priorities");
  if (lists.size() != static_cast<std::size_t>(n))
    throw FormatError("/priorities", "expected " + std::to_string(n) + " lists, got " + std::to_string(lists.size()));
  std::vector<Order> out;
  for (std::size_t x = 0; x < lists.size(); ++x)
    out.push_back(io_detail::order(lists[x], n, io_detail::at("/priorities", x), io_detail::applicant));
  return PrioritySet(std::move(out));
}

// Profiles: {"n": 3, "preferences": [[3,1,2], ...]}, one list per applicant.

inline json to_json(const PreferenceProfile& p) {
  json lists = json::array();
  for (const Order& o : p.prefs()) lists.push_back(io_detail::position_list(o));
  return {{"n", p.size()}, {"preferences", lists}};
}

inline PreferenceProfile profile_from_json(const json& j) {
  const int n = io_detail::size_field(j, "");
  const json& lists = io_detail::array(io_detail::field(j, "preferences", ""), "/preferences");
  if (lists.size() != static_cast<std::size_t>(n))
    throw FormatError("/preferences", "expected " + std::to_string(n) + " lists, got " + std::to_string(lists.size()));
  std::vector<Order> out;
  for (std::size_t a = 0; a < lists.size(); ++a)
    out.push_back(io_detail::order(lists[a], n, io_detail::at("/preferences", a), io_detail::position));
  return PreferenceProfile(std::move(out));
}

// Matchings: {"n": 3, "matching": {"a": 2, "b": 1, "c": 3}}.

inline json to_json(const Matching& m) {
  json pairs = json::object();
  for (Applicant a = 0; a < m.size(); ++a) pairs[std::string(1, applicant_name(a))] = m.position_of(a) + 1;
  return {{"n", m.size()}, {"matching", pairs}};
}

inline Matching matching_from_json(const json& j) {
  const int n = io_detail::size_field(j, "");
  const json& pairs = io_detail::field(j, "matching", "");
  if (!pairs.is_object() || pairs.size() != static_cast<std::size_t>(n))
    throw FormatError("/matching", "expected an object with one entry per applicant");
  std::vector<Position> to(static_cast<std::size_t>(n), -1);
  for (auto it = pairs.begin(); it != pairs.end(); ++it) {
    const std::string ptr = "/matching/" + it.key();
    const Applicant a = io_detail::applicant(json(it.key()), n, ptr);
    to[static_cast<std::size_t>(a)] = io_detail::position(it.value(), n, ptr);
  }
  try {
    return Matching(std::move(to));
  } catch (const std::invalid_argument& e) {
    throw FormatError("/matching", e.what());
  }
}

// Subdomains: {"n": 3, "types": [[[3,1,2],[3,2,1]], ...]}, type lists per applicant.

inline json to_json(const Subdomain& d) {
  json types = json::array();
  for (const auto& t : d.types) {
    json lists = json::array();
    for (const Order& o : t) lists.push_back(io_detail::position_list(o));
    types.push_back(lists);
  }
  return {{"n", d.size()}, {"types", types}};
}

inline Subdomain subdomain_from_json(const json& j) {
  const int n = io_detail::size_field(j, "");
  const json& types = io_detail::array(io_detail::field(j, "types", ""), "/types");
  Subdomain d;
  for (std::size_t i = 0; i < types.size(); ++i) {
    const std::string ptr = io_detail::at("/types", i);
    auto& t = d.types.emplace_back();
    for (std::size_t k = 0; k < io_detail::array(types[i], ptr).size(); ++k)
      t.push_back(io_detail::order(types[i][k], n, io_detail::at(ptr, k), io_detail::position));
  }
  if (auto problem = subdomain_problem(d, n); !problem.empty()) throw FormatError("/types", problem);
  return d;
}

// Trees: {"n": 3, "universes": [[type ids], ...], "nodes": [...]} in preorder.
// Internal node: {"player": "a", "children": [ids], "types": [[type ids], ...]};
// leaf: {"matching": [position of a, position of b, ...]}. A type id is the
// rank of a preference order among all n! orders in lexicographic order.

inline json to_json(const MechanismTree& t) {
  json nodes = json::array();
  for (const auto& node : t.nodes) {
    if (node.is_leaf()) {
      json m = json::array();
      for (Position x : node.outcome) m.push_back(x + 1);
      nodes.push_back({{"matching", m}});
    } else {
      nodes.push_back({{"player", std::string(1, applicant_name(node.player))},
                       {"children", node.children},
                       {"types", node.child_types}});
    }
  }
  return {{"n", t.n}, {"universes", t.universe}, {"nodes", nodes}};
}

inline MechanismTree tree_from_json(const json& j) {
  MechanismTree t;
  t.n = io_detail::size_field(j, "");
  const json& universes = io_detail::array(io_detail::field(j, "universes", ""), "/universes");
  if (universes.size() != static_cast<std::size_t>(t.n)) throw FormatError("/universes", "expected one set per applicant");
  for (std::size_t i = 0; i < universes.size(); ++i)
    t.universe.push_back(io_detail::type_set(universes[i], t.n, io_detail::at("/universes", i)));
  const json& nodes = io_detail::array(io_detail::field(j, "nodes", ""), "/nodes");
  if (nodes.empty()) throw FormatError("/nodes", "a tree needs at least one node");
  for (std::size_t h = 0; h < nodes.size(); ++h) {
    const std::string ptr = io_detail::at("/nodes", h);
    const json& nj = nodes[h];
    MechanismNode node;
    if (nj.is_object() && nj.contains("matching")) {
      const json& m = io_detail::array(nj["matching"], ptr + "/matching");
      if (m.size() != static_cast<std::size_t>(t.n)) throw FormatError(ptr + "/matching", "expected one position per applicant");
      for (std::size_t a = 0; a < m.size(); ++a) node.outcome.push_back(io_detail::position(m[a], t.n, io_detail::at(ptr + "/matching", a)));
    } else {
      node.player = io_detail::applicant(io_detail::field(nj, "player", ptr), t.n, ptr + "/player");
      const json& children = io_detail::array(io_detail::field(nj, "children", ptr), ptr + "/children");
      const json& types = io_detail::array(io_detail::field(nj, "types", ptr), ptr + "/types");
      if (children.size() != types.size()) throw FormatError(ptr + "/types", "expected one type set per child");
      for (std::size_t k = 0; k < children.size(); ++k) {
        const json& c = children[k];
        if (!c.is_number_integer() || c.get<long long>() < 0 || c.get<long long>() >= static_cast<long long>(nodes.size()))
          throw FormatError(io_detail::at(ptr + "/children", k), "expected a node index");
        node.children.push_back(c.get<NodeId>());
        node.child_types.push_back(io_detail::type_set(types[k], t.n, io_detail::at(ptr + "/types", k)));
      }
    }
    t.nodes.push_back(std::move(node));
  }
  return t;
}

// Reports.

inline json to_json(const Classification& c) {
  json out = {{"verdict", to_string(c.verdict)}};
  if (c.limited_cyclic()) {
    json blocks = json::array();
    for (const auto& b : c.partition) blocks.push_back(io_detail::names(b));
    out["partition"] = blocks;
    json labelings = json::array();
    for (const auto& l : c.labelings) {
      labelings.push_back({{"block", l.block},
                           {"order", io_detail::names(l.order)},
                           {"x", io_detail::numbers(l.x_positions)},
                           {"u", l.u + 1},
                           {"v", l.v + 1}});
    }
    out["labelings"] = labelings;
  }
  if (c.witness) {
    out["witness"] = {{"pattern", std::string(1, c.witness->letter())},
                      {"applicants", io_detail::names(c.witness->restriction.applicants)},
                      {"positions", io_detail::numbers(c.witness->restriction.positions)}};
  }
  return out;
}

inline json to_json(const ValidationReport& r) {
  json out = {{"ok", r.ok}};
  if (!r.ok) out.update({{"node", r.node}, {"message", r.message}});
  return out;
}

inline json to_json(const ImplementsReport& r) {
  json out = {{"ok", r.ok}, {"checked", r.checked}};
  if (r.counterexample) {
    out["counterexample"] = to_json(*r.counterexample)["preferences"];
    out["expected"] = to_json(*r.expected)["matching"];
    out["got"] = to_json(*r.got)["matching"];
  }
  return out;
}

inline json to_json(const OspReport& r, int n) {
  json v = json::array();
  for (const auto& x : r.violations) {
    v.push_back({{"node", x.node},
                 {"player", std::string(1, applicant_name(x.player))},
                 {"type", io_detail::position_list(order_from_index(n, x.type))},
                 {"truthful_leaf", x.truthful_leaf},
                 {"deviating_leaf", x.deviating_leaf},
                 {"truthful_position", x.truthful_position + 1},
                 {"deviating_position", x.deviating_position + 1}});
  }
  return {{"ok", r.ok}, {"violations", v}};
}

inline json to_json(const WitnessReport& r, const Subdomain& d) {
  json ev = json::array();
  for (const auto& e : r.evidence) {
    auto profile = [&](const std::vector<std::size_t>& idx) { return to_json(profile_of(d, idx))["preferences"]; };
    ev.push_back({{"applicant", std::string(1, applicant_name(e.applicant))},
                  {"truthful", io_detail::position_list(d.types[static_cast<std::size_t>(e.applicant)][e.truthful])},
                  {"deviation", io_detail::position_list(d.types[static_cast<std::size_t>(e.applicant)][e.deviation])},
                  {"truthful_profile", profile(e.truthful_profile)},
                  {"deviating_profile", profile(e.deviating_profile)},
                  {"truthful_position", e.truthful_position + 1},
                  {"deviating_position", e.deviating_position + 1}});
  }
  json out = {{"ok", r.ok}, {"evidence", ev}};
  if (r.failed) out["failed_applicant"] = std::string(1, applicant_name(*r.failed));
  return out;
}

}  // namespace osp
