// osp: classify priority structures, synthesize OSP mechanisms for deferred
// acceptance, verify mechanism trees and search for non-OSP witnesses.
//
// Exit codes: 0 success, 1 negative verdict, 2 usage or format error,
// 3 (witness only) input is limited cyclic so no witness exists.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "osp/census.hpp"
#include "osp/classify.hpp"
#include "osp/da.hpp"
#include "osp/io.hpp"
#include "osp/mechanism.hpp"
#include "osp/synth.hpp"
#include "osp/witness.hpp"

namespace {

using namespace osp;

constexpr int kOk = 0;
constexpr int kNegative = 1;
constexpr int kUsage = 2;
constexpr int kLimitedCyclic = 3;

struct Globals {
  unsigned threads = 1;
  bool json = false;
};

void check_sizes(int a, int b, const std::string& what) {
  if (a != b) throw FormatError("/n", what + " sizes differ (" + std::to_string(a) + " vs " + std::to_string(b) + ")");
}

std::string block_names(const std::vector<int>& b) { return set_names(b); }

int cmd_da(const Globals& g, const std::string& qf, const std::string& pf, bool transcript) {
  const PrioritySet q = priorities_from_json(read_json_file(qf));
  const PreferenceProfile p = profile_from_json(read_json_file(pf));
  check_sizes(q.size(), p.size(), "priority set and profile");
  Transcript t;
  const Matching m = run_da(q, p, transcript ? &t : nullptr);
  if (g.json) {
    json out = to_json(m);
    if (transcript) out["transcript"] = format_transcript(t, q.size());
    std::cout << out.dump(2) << '\n';
  } else {
    if (transcript) std::cout << format_transcript(t, q.size());
    std::cout << to_json(m).dump() << '\n';
  }
  return kOk;
}

int cmd_classify(const Globals& g, const std::string& qf) {
  const PrioritySet q = priorities_from_json(read_json_file(qf));
  const Classification c = classify(q);
  if (g.json) {
    std::cout << to_json(c).dump(2) << '\n';
  } else if (c.limited_cyclic()) {
    std::cout << "limited cyclic\npartition:";
    for (const auto& b : c.partition) std::cout << ' ' << block_names(b);
    std::cout << '\n';
    for (const auto& l : c.labelings) {
      std::cout << "block " << l.block + 1 << ": order";
      for (Applicant a : l.order) std::cout << ' ' << applicant_name(a);
      std::cout << "; x = " << position_set_names(l.x_positions) << ", u = " << position_name(l.u)
                << ", v = " << position_name(l.v) << '\n';
    }
  } else {
    std::cout << "not limited cyclic";
    if (c.witness) std::cout << "; " << describe(*c.witness);
    std::cout << '\n';
  }
  return c.limited_cyclic() ? kOk : kNegative;
}

int cmd_synthesize(const Globals& g, const std::string& qf, const std::string& out) {
  const PrioritySet q = priorities_from_json(read_json_file(qf));
  MechanismTree t;
  try {
    t = synthesize(q);
  } catch (const NotLimitedCyclicError& e) {
    std::cout << "not limited cyclic";
    if (e.witness) std::cout << "; " << describe(*e.witness);
    std::cout << '\n';
    return kNegative;
  }
  const json j = to_json(t);
  if (out.empty() || out == "-") {
    std::cout << j.dump(g.json ? 2 : -1) << '\n';
  } else {
    write_json_file(out, j);
    const TreeShape s = tree_shape(t);
    std::cerr << "wrote " << out << ": " << s.nodes << " nodes, " << s.leaves << " leaves, depth " << s.depth << '\n';
  }
  return kOk;
}

void print_osp(const OspReport& r, int n) {
  if (r.ok) {
    std::cout << "obviously strategyproof\n";
    return;
  }
  std::cout << r.violations.size() << " OSP violation(s)\n";
  for (const auto& v : r.violations) std::cout << "  " << describe(v, n) << '\n';
}

int cmd_verify(const Globals& g, const std::string& tf, const std::string& qf, bool exhaustive,
               std::optional<std::uint64_t> samples, std::uint64_t seed) {
  const MechanismTree t = tree_from_json(read_json_file(tf));
  const PrioritySet q = priorities_from_json(read_json_file(qf));
  check_sizes(t.n, q.size(), "tree and priority set");
  if (!exhaustive && !samples) exhaustive = q.size() <= 4;
  const ValidationReport v = validate(t);
  std::optional<ImplementsReport> impl;
  std::optional<OspReport> osp;
  if (v.ok) {
    impl = exhaustive ? check_implements(t, q, Exhaustive{}, g.threads)
                      : check_implements(t, q, Sampled{samples.value_or(100000), seed}, g.threads);
    osp = check_osp(t, g.threads);
  }
  const bool ok = v.ok && impl->ok && osp->ok;
  if (g.json) {
    json out = {{"ok", ok}, {"validate", to_json(v)}};
    if (impl) out["implements"] = to_json(*impl);
    if (osp) out["osp"] = to_json(*osp, t.n);
    std::cout << out.dump(2) << '\n';
    return ok ? kOk : kNegative;
  }
  std::cout << "validate: " << (v.ok ? "ok" : "node " + std::to_string(v.node) + ": " + v.message) << '\n';
  if (impl) {
    std::cout << "implements DA: " << (impl->ok ? "ok" : "FAILED") << " (" << impl->checked << " profiles, "
              << (exhaustive ? "exhaustive" : "sampled") << ")\n";
    if (!impl->ok)
      std::cout << "  profile " << to_string(*impl->counterexample) << ": expected " << to_string(*impl->expected)
                << ", tree gives " << to_string(*impl->got) << '\n';
    std::cout << "osp: ";
    print_osp(*osp, t.n);
  }
  return ok ? kOk : kNegative;
}

int cmd_check_osp(const Globals& g, const std::string& tf) {
  const MechanismTree t = tree_from_json(read_json_file(tf));
  const ValidationReport v = validate(t);
  if (!v.ok) throw FormatError("/nodes/" + std::to_string(v.node), v.message);
  const OspReport r = check_osp(t, g.threads);
  if (g.json) std::cout << to_json(r, t.n).dump(2) << '\n';
  else print_osp(r, t.n);
  return r.ok ? kOk : kNegative;
}

void print_witness(const Globals& g, const PrioritySet& q, const Subdomain& d, const WitnessReport& r,
                   const std::string& source) {
  if (g.json) {
    std::cout << json{{"source", source}, {"subdomain", to_json(d)}, {"report", to_json(r, d)}}.dump(2) << '\n';
    return;
  }
  std::cout << "witness (" << source << ") for " << to_string(q) << '\n';
  for (int i = 0; i < d.size(); ++i) {
    std::cout << "  " << applicant_name(i) << ":";
    for (const Order& o : d.types[static_cast<std::size_t>(i)]) std::cout << ' ' << digits(o);
    std::cout << '\n';
  }
  for (const auto& e : r.evidence) {
    const auto& ti = d.types[static_cast<std::size_t>(e.applicant)];
    std::cout << "  " << applicant_name(e.applicant) << " with type " << digits(ti[e.truthful]) << ": gets "
              << position_name(e.truthful_position) << " at " << to_string(profile_of(d, e.truthful_profile))
              << ", but reporting " << digits(ti[e.deviation]) << " gets " << position_name(e.deviating_position)
              << " at " << to_string(profile_of(d, e.deviating_profile)) << '\n';
  }
}

int cmd_witness(const Globals& g, const std::string& qf, bool use_fixtures, bool search, std::uint64_t budget,
                std::uint64_t seed) {
  const PrioritySet q = priorities_from_json(read_json_file(qf));
  if (classify(q).limited_cyclic()) {
    std::cout << "limited cyclic; no witness exists\n";
    return kLimitedCyclic;
  }
  if (!use_fixtures && !search) use_fixtures = search = true;
  if (use_fixtures) {
    for (const Fixture& f : fixtures()) {
      const auto r = find_relabeling(f.q, q);
      if (!r) continue;
      const Subdomain d = relabel(f.d, *r);
      const WitnessReport rep = check_witness(q, d);
      if (!rep.ok) continue;
      print_witness(g, q, d, rep, "fixture: " + f.label);
      return kOk;
    }
  }
  if (search) {
    if (auto d = find_witness(q, budget, seed, g.threads)) {
      print_witness(g, q, *d, check_witness(q, *d), "search");
      return kOk;
    }
  }
  std::cout << "no witness found\n";
  return kNegative;
}

int cmd_enumerate(const Globals& g, int n, const std::string& report) {
  const auto rows = census(n, g.threads);
  std::ofstream out;
  if (!report.empty()) {
    out.open(report);
    if (!out) throw std::runtime_error("cannot write " + report);
    out << "canonical\tmembers\tverdict\tpattern\n";
  }
  std::uint64_t total = 0, lc_classes = 0, lc_sets = 0;
  for (const auto& r : rows) {
    total += r.members;
    if (r.classification.limited_cyclic()) {
      ++lc_classes;
      lc_sets += r.members;
    }
    if (out.is_open()) {
      std::string canon;
      for (const Order& o : r.canonical.lists()) canon += (canon.empty() ? "" : " ") + letters(o);
      out << canon << '\t' << r.members << '\t' << to_string(r.classification.verdict) << '\t'
          << (r.classification.witness ? std::string(1, r.classification.witness->letter()) : "") << '\n';
    }
  }
  if (g.json) {
    std::cout << json{{"n", n}, {"sets", total}, {"classes", rows.size()}, {"limited_cyclic_classes", lc_classes},
                      {"limited_cyclic_sets", lc_sets}}
                     .dump(2)
              << '\n';
  } else {
    std::cout << total << " priority sets in " << rows.size() << " classes; " << lc_classes
              << " limited-cyclic classes covering " << lc_sets << " sets\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Obviously strategyproof deferred acceptance: classify, synthesize, verify, witness"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--threads", g.threads, "Worker threads (0 = hardware concurrency)")->capture_default_str();
  app.add_flag("--json", g.json, "Machine-readable output");

  std::string qf, pf, tf, out, report;
  bool transcript = false, exhaustive = false, use_fixtures = false, search = false;
  std::optional<std::uint64_t> samples;
  std::uint64_t seed = 0, budget = 100000;
  int n = 3;

  auto* da = app.add_subcommand("da", "Run deferred acceptance");
  da->add_option("priorities", qf)->required();
  da->add_option("profile", pf)->required();
  da->add_flag("--transcript", transcript, "Print the round-by-round proposal table");

  auto* cl = app.add_subcommand("classify", "Decide whether priorities are limited cyclic");
  cl->add_option("priorities", qf)->required();

  auto* sy = app.add_subcommand("synthesize", "Build an OSP mechanism tree");
  sy->add_option("priorities", qf)->required();
  sy->add_option("-o,--output", out, "Tree file (stdout if omitted)");

  auto* vt = app.add_subcommand("verify-tree", "Validate a tree, check it implements DA and is OSP");
  vt->add_option("tree", tf)->required();
  vt->add_option("priorities", qf)->required();
  auto* ex = vt->add_flag("--exhaustive", exhaustive, "Check every preference profile");
  vt->add_option("--samples", samples, "Check this many random profiles")->excludes(ex);
  vt->add_option("--seed", seed, "Sampling seed");

  auto* co = app.add_subcommand("check-osp", "Check a tree for OSP violations");
  co->add_option("tree", tf)->required();

  auto* wi = app.add_subcommand("witness", "Certify that priorities admit no OSP mechanism");
  wi->add_option("priorities", qf)->required();
  auto* fx = wi->add_flag("--fixtures", use_fixtures, "Use bundled witnesses only");
  wi->add_flag("--search", search, "Randomized search")->excludes(fx);
  wi->add_option("--budget", budget, "Search iterations")->capture_default_str();
  wi->add_option("--seed", seed, "Search seed");

  auto* en = app.add_subcommand("enumerate", "Classify every n x n priority set up to relabeling");
  en->add_option("--n", n, "Market size")->check(CLI::Range(1, 4))->capture_default_str();
  en->add_option("--report", report, "TSV file with one row per class");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*da) return cmd_da(g, qf, pf, transcript);
    if (*cl) return cmd_classify(g, qf);
    if (*sy) return cmd_synthesize(g, qf, out);
    if (*vt) return cmd_verify(g, tf, qf, exhaustive, samples, seed);
    if (*co) return cmd_check_osp(g, tf);
    if (*wi) return cmd_witness(g, qf, use_fixtures, search, budget, seed);
    if (*en) return cmd_enumerate(g, n, report);
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
