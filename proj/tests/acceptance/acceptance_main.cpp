// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <random>
#include <sstream>

#include "ppgpt/check/spec_checker.hpp"
#include "ppgpt/common/error.hpp"
#include "ppgpt/frontend/parser.hpp"
#include "ppgpt/frontend/printer.hpp"
#include "ppgpt/gen/loop.hpp"
#include "ppgpt/knowledge/store.hpp"
#include "ppgpt/pipeline/harness.hpp"
#include "ppgpt/ranking/ranking.hpp"
#include "ppgpt/verifier/verifier.hpp"
#include "test_support.hpp"
#include "tiny_oracle.hpp"

using namespace ppgpt;
using namespace ppgpt::frontend;
using ppgpt::testing::fixture_path;
using ppgpt::testing::read_fixture;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::shared_ptr<const ResolvedSpec> spec_of(const ResolvedProgram& p, const std::string& text, size_t k = 0) {
  auto file = ppgpt::testing::must_parse_spec("spec.psl", text);
  auto rs = resolve_spec(p, file, k);
  if (!rs->ok()) throw Error("spec does not resolve:\n" + render_diagnostics(rs->diagnostics));
  return rs;
}

std::shared_ptr<const ResolvedSpec> named(const ResolvedProgram& p, const std::string& text, const std::string& name) {
  auto file = ppgpt::testing::must_parse_spec("spec.psl", text);
  for (size_t k = 0; k < file->units.size(); ++k)
    if (file->units[k].name == name) {
      auto rs = resolve_spec(p, file, k);
      if (!rs->ok()) throw Error(render_diagnostics(rs->diagnostics));
      return rs;
    }
  throw Error("no unit " + name);
}

// 1. grammar coverage
Outcome grammar() {
  auto t0 = std::chrono::steady_clock::now();
  size_t files = 0, kinds[3] = {0, 0, 0};
  bool saw_old = false, saw_assume = false, saw_call = false, saw_assert = false, saw_ghost = false;
  for (const auto& e : fs::directory_iterator(fixture_path("psl_corpus"))) {
    if (e.path().extension() != ".psl") continue;
    std::ifstream in(e.path());
    std::stringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    auto a = parse_spec(e.path().filename().string(), text);
    if (!a.ok()) return {false, e.path().filename().string() + " does not parse: " + render_diagnostics(a.diagnostics)};
    auto b = parse_spec("printed.psl", print_specs(*a.value));
    if (!b.ok() || dump_specs(*a.value) != dump_specs(*b.value))
      return {false, e.path().filename().string() + " does not round-trip"};
    ++files;
    for (const auto& u : a.value->units) ++kinds[int(u.kind)];
    saw_old |= text.find("old(") != std::string::npos;
    saw_assume |= text.find("assume(") != std::string::npos;
    saw_assert |= text.find("assert(") != std::string::npos;
    saw_ghost |= text.find("$") != std::string::npos;
    for (const auto& u : a.value->units)
      if (u.kind == SpecKind::Rule) {
        saw_call |= print_spec(u).find(");\n") != std::string::npos;
      }
  }
  auto neg = parse_spec("neg.psl", read_fixture("psl_corpus/negative/statement_in_precondition.psl"));
  bool rejected = !neg.ok() && !neg.diagnostics.empty() && neg.diagnostics[0].code == std::string(codes::kStatementForm);
  double s = seconds_since(t0);
  bool all_kinds = kinds[0] && kinds[1] && kinds[2] && saw_old && saw_assume && saw_call && saw_assert && saw_ghost;
  std::string d = std::to_string(files) + " files (" + std::to_string(kinds[0]) + " invariants, " +
                  std::to_string(kinds[1]) + " pre/post, " + std::to_string(kinds[2]) + " rules) round-trip; " +
                  "negative case " + (rejected ? "rejected with " + neg.diagnostics[0].code : "NOT rejected") + ", " +
                  fmt("%.2fs", s);
  return {files >= 20 && all_kinds && rejected && s < 5, d};
}

// 2. prover vs exhaustive oracle
Outcome oracle() {
  auto t0 = std::chrono::steady_clock::now();
  auto cases = tiny::generate_cases(60, 20261016);
  verify::VerifyOptions o;
  o.exec.domain_bound = tiny::kDomain;
  size_t total = 0, agree = 0, violated = 0;
  std::string first_bad;
  for (const auto& c : cases) {
    auto prog = ppgpt::testing::must_resolve(c.contract_text);
    for (const auto& p : c.properties) {
      ++total;
      violated += p.violated;
      auto v = verify::verify_property(*prog, *spec_of(*prog, p.text), o);
      bool proven = v.kind == verify::VerdictKind::Proven || v.kind == verify::VerdictKind::VacuouslyProven;
      bool ok = proven ? !p.violated : (v.modular_violation && p.violated);
      if (ok)
        ++agree;
      else if (first_bad.empty())
        first_bad = "; first disagreement in " + c.contract.name + ": " + verify::to_string(v.kind) + " " + v.reason;
    }
  }
  double s = seconds_since(t0);
  std::string d = std::to_string(cases.size()) + " contracts, " + std::to_string(agree) + "/" + std::to_string(total) +
                  " verdicts agree (" + std::to_string(violated) + " violated, " + std::to_string(total - violated) +
                  " hold), " + fmt("%.1fs", s) + first_bad;
  return {cases.size() >= 50 && agree == total && violated > 0 && violated < total && s < 600, d};
}

// 3. case studies
Outcome case_studies() {
  auto t0 = std::chrono::steady_clock::now();
  verify::VerifyOptions o;
  std::string d;
  bool pass = true;

  auto env = ppgpt::testing::must_resolve(read_fixture("cases/envelope.msol"));
  auto es = spec_of(*env, read_fixture("cases/envelope.psl"));
  auto ev = verify::verify_property(*env, *es, o);
  size_t adds = 0;
  bool replays = false;
  if (ev.trace) {
    for (const auto& c : ev.trace->calls) adds += c.function == "addEnvelope";
    verify::Trace t = *ev.trace;
    replays = verify::replay(*env, *es, t);
    for (const auto& c : t.rule_calls) adds += c.function == "addEnvelope";
  }
  bool env_ok = ev.kind == verify::VerdictKind::Violated && ev.trace && ev.trace->length() <= 3 && adds == 2 && replays;
  d += std::string("envelope ") + verify::to_string(ev.kind) +
       (ev.trace ? " trace " + std::to_string(ev.trace->length()) + " calls (" + std::to_string(adds) + " addEnvelope)" : "") +
       (replays ? ", replays" : ", no replay");
  pass &= env_ok;

  auto zk = ppgpt::testing::must_resolve(read_fixture("cases/zklink.msol"));
  auto zfile = ppgpt::testing::must_parse_spec("zk.psl", read_fixture("cases/zklink.psl"));
  auto zrs = resolve_spec(*zk, zfile, 0);
  auto zcheck = check::check_spec(*zk, *zrs);
  bool pres_ok = zrs->ok() && zcheck.ok && zfile->units[0].pre.size() == 3;
  auto first = spec_of(*zk, read_fixture("cases/zklink_first_post.psl"));
  auto zv = verify::verify_property(*zk, *first, o);
  auto zm = ppgpt::testing::must_resolve(read_fixture("cases/zklink_mutated.msol"));
  auto mv = verify::verify_property(*zm, *spec_of(*zm, read_fixture("cases/zklink_first_post.psl")), o);
  d += std::string("; zklink preconditions ") + (pres_ok ? "accepted" : "REJECTED") + ", first post " +
       verify::to_string(zv.kind) + ", mutated " + verify::to_string(mv.kind);
  pass &= pres_ok && zv.kind == verify::VerdictKind::Proven && mv.kind == verify::VerdictKind::Violated;
  double s = seconds_since(t0);
  d += fmt(", %.1fs", s);
  return {pass && s < 60, d};
}

// 4. over-approximations
Outcome overapprox() {
  verify::VerifyOptions o;
  auto p = ppgpt::testing::must_resolve(read_fixture("cases/hashing.msol"));
  std::string text = read_fixture("cases/hashing.psl");
  auto inj = verify::verify_property(*p, *named(*p, text, "sha3Injective"), o);
  auto indep = verify::verify_property(*p, *named(*p, text, "refreshCountsUpdates"), o);
  auto dep = verify::verify_property(*p, *named(*p, text, "refreshPriceIsPositive"), o);
  std::string d = std::string("sha3 injectivity ") + verify::to_string(inj.kind) + ", return-independent " +
                  verify::to_string(indep.kind) + ", return-dependent " + verify::to_string(dep.kind);
  return {inj.kind == verify::VerdictKind::Proven && indep.kind == verify::VerdictKind::Proven &&
              dep.kind != verify::VerdictKind::Proven && dep.kind != verify::VerdictKind::VacuouslyProven,
          d};
}

// 5. ranking arithmetic
Outcome ranking_arith() {
  using namespace ranking;
  double s = score({0.8, 0.7, 0.6, 0.5}, Weights::reference());
  bool score_ok = std::abs(s - 0.6650) <= 1e-9;

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  size_t same = 0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<std::pair<std::string, FeatureVector>> cs;
    int n = 2 + int(rng() % 9);
    for (int i = 0; i < n; ++i) cs.push_back({"c" + std::to_string(i), {u(rng), u(rng), u(rng), u(rng)}});
    same += rank_topk(cs, Weights::reference(), 1)[0].id == rank_topk(cs, Weights::reference().normalized(), 1)[0].id;
  }

  size_t recovered = 0;
  double worst = 0;
  bool metrics_ok = true;
  std::uniform_real_distribution<double> w(-1, 1), f(0, 1);
  for (int t = 0; t < 100; ++t) {
    Weights planted{w(rng), w(rng), w(rng), w(rng)};
    std::vector<TrainingRecord> rs;
    for (int i = 0; i < 12; ++i) {
      FeatureVector fv{f(rng), f(rng), f(rng), f(rng)};
      rs.push_back({fv, score(fv, planted)});
    }
    Fit fit = fit_weights(rs);
    double err = std::max({std::abs(fit.raw.alpha - planted.alpha), std::abs(fit.raw.beta - planted.beta),
                           std::abs(fit.raw.gamma - planted.gamma), std::abs(fit.raw.eta - planted.eta)});
    worst = std::max(worst, err);
    recovered += err <= 1e-6;
    const Metrics& m = fit.metrics;
    for (double x : {m.mae, m.mse, m.rmse, m.r2, m.mape, m.mde}) metrics_ok &= std::isfinite(x);
  }
  std::string d = "score " + fmt("%.10f", s) + ", argmax invariant " + std::to_string(same) + "/1000, planted weights recovered " +
                  std::to_string(recovered) + "/100 (max error " + fmt("%.1e", worst) + "), metrics MAE MSE RMSE R2 MAPE MDE " +
                  (metrics_ok ? "reported" : "MISSING");
  return {score_ok && same == 1000 && recovered == 100 && metrics_ok, d};
}

// 6. revise loop
const char* kBank = R"(contract Bank {
  mapping(address => uint256) balances;
  uint256 total;
  function deposit(uint256 amount) public { balances[msg.sender] += amount; total += amount; }
  function withdraw(uint256 amount) public {
    require(balances[msg.sender] >= amount);
    balances[msg.sender] -= amount;
    total -= amount;
  }
})";

Outcome revise_loop() {
  gen::GenTarget t;
  t.program = ppgpt::testing::must_resolve(kBank);
  t.contract_code = kBank;
  t.func_code = "function deposit(uint256 amount) public { balances[msg.sender] += amount; total += amount; }";
  t.function_name = "deposit";
  knowledge::KnowledgeEntry ref{"ref", "function add(uint v) { s += v; }", "", "rule addAdds() { uint256 $v; add($v); assert(true); }",
                                "", knowledge::EntryKind::Rule, ""};
  const std::string good = "rule depositAdds() {\n  uint256 $a;\n  uint256 $t = total;\n  deposit($a);\n  assert(total == $t + $a);\n}";
  const std::string broken = "rule depositAdds() {\n  deposit(x);\n  assert(total >= 0);\n}";
  const std::string uncovered = "rule depositAdds() {\n  uint256 $a;\n  withdraw($a);\n  assert(total >= 0);\n}";

  struct Scenario {
    std::vector<std::string> script;
    int attempts;
    gen::CandidateStatus status;
  };
  std::vector<Scenario> scenarios = {
      {{good}, 0, gen::CandidateStatus::Compilable},
      {{broken, uncovered, good}, 2, gen::CandidateStatus::Compilable},
      {std::vector<std::string>(15, broken), 9, gen::CandidateStatus::Failed},
  };
  std::vector<int> got;
  bool special_exact = true, capped = true, as_expected = true;
  pipeline::RunReport rep;
  for (const auto& sc : scenarios) {
    gen::ScriptedProvider p(sc.script);
    auto c = gen::generate_candidate(p, ref, t);
    c.id = "s" + std::to_string(got.size());
    gen::revise_until_compilable(p, c, t, 9, {}, ref.property);
    got.push_back(c.attempts);
    as_expected &= c.attempts == sc.attempts && c.status == sc.status;
    capped &= p.calls() <= 10;
    // each revision prompt is special exactly when the previous response compiled without covering
    for (size_t k = 1; k < c.transcript.size(); ++k) {
      auto cr = gen::compile_candidate(*t.program, gen::clean_response(c.transcript[k - 1].response), c.kind, t.function_name);
      bool coverage_failed = cr.ok && !cr.covered;
      special_exact &= (c.transcript[k].kind == gen::PromptKind::SpecialRevise) == coverage_failed;
      if (c.transcript[k].kind == gen::PromptKind::CommonRevise)
        special_exact &= c.transcript[k].prompt.find(cr.rendered) != std::string::npos;
    }
    pipeline::CandidateRecord r;
    r.candidate = c;
    rep.records.push_back(r);
  }
  auto stats = pipeline::compile_stats(rep, t);
  std::string d = "attempts {" + std::to_string(got[0]) + ", " + std::to_string(got[1]) + ", " + std::to_string(got[2]) +
                  (rep.records[2].candidate.status == gen::CandidateStatus::Failed ? "-then-failed}" : "}") +
                  ", special prompt " + (special_exact ? "exactly on coverage failure" : "MISFIRED") + ", " +
                  (capped ? "at most 9 revisions" : "CAP EXCEEDED") + ", recomputed compile rate " +
                  fmt("%.3f", stats.rate()) + " with " + std::to_string(stats.disagreements) + " disagreements";
  return {as_expected && special_exact && capped && stats.disagreements == 0 && std::abs(stats.rate() - 2.0 / 3) < 1e-12, d};
}

// 7. retrieval
Outcome retrieval() {
  auto t0 = std::chrono::steady_clock::now();
  knowledge::LocalEmbedder e;
  auto entries = knowledge::load_entries(fixture_path("pipeline/knowledge.jsonl"));
  knowledge::KnowledgeStore s(e.dimension(), e.name());
  s.ingest(entries, e);
  double worst = 0;
  bool self_ok = true;
  for (const auto& en : entries) {
    auto r = s.retrieve(en.code, e, 0.8);
    // entries sharing code tie at 1.0, so look for this one among the hits
    bool found = false;
    for (const auto& h : r)
      if (h.entry == en) {
        found = true;
        worst = std::max(worst, std::abs(h.similarity - 1.0));
        self_ok &= std::abs(h.similarity - 1.0) <= 1e-6;
      }
    self_ok &= found;
  }

  // a hand-built entry at cosine 0.7 from the query
  knowledge::KnowledgeStore h(2);
  knowledge::KnowledgeEntry hi{"near", "x", "", "p", "", knowledge::EntryKind::Rule, ""};
  knowledge::KnowledgeEntry lo{"far", "y", "", "p", "", knowledge::EntryKind::Rule, ""};
  h.add(hi, {1, 0});
  h.add(lo, {0.7, std::sqrt(1 - 0.49)});
  auto hr = h.retrieve_vector({1, 0}, 0.8);
  bool filter_ok = hr.size() == 1 && hr[0].entry.id == "near";

  auto p1 = fs::temp_directory_path() / "ppgpt_accept_store1.jsonl";
  auto p2 = fs::temp_directory_path() / "ppgpt_accept_store2.jsonl";
  s.persist(p1.string());
  auto loaded = knowledge::KnowledgeStore::load(p1.string());
  loaded.persist(p2.string());
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  bool bytes_ok = slurp(p1) == slurp(p2);
  bool results_ok = true;
  knowledge::LocalEmbedder probe;
  for (const auto& en : entries)
    for (double th : {0.0, 0.5, 0.8}) {
      auto a = s.retrieve(en.code, probe, th), b = loaded.retrieve(en.code, probe, th);
      results_ok &= a.size() == b.size();
      for (size_t k = 0; results_ok && k < a.size(); ++k)
        results_ok &= a[k].entry == b[k].entry && a[k].similarity == b[k].similarity;
    }
  fs::remove(p1);
  fs::remove(p2);
  double secs = seconds_since(t0);
  std::string d = "self-retrieval " + std::string(self_ok ? "1.0" : "WRONG") + " (max deviation " + fmt("%.1e", worst) +
                  "), 0.7 entry " + (filter_ok ? "filtered" : "NOT filtered") + ", persist/load " +
                  (bytes_ok && results_ok ? "byte-identical with identical results" : "DIFFERS") + fmt(", %.2fs", secs);
  return {self_ok && filter_ok && bytes_ok && results_ok && secs < 5, d};
}

// 8. end-to-end replay determinism through the CLI
std::string strip_timings(const std::string& path) {
  std::ifstream in(path);
  std::string out, line;
  while (std::getline(in, line)) {
    auto j = nlohmann::ordered_json::parse(line);
    j.erase("timings");
    out += j.dump() + "\n";
  }
  return out;
}

Outcome end_to_end() {
  std::string dir = fixture_path("pipeline");
  std::vector<int> codes;
  std::vector<std::string> reports;
  for (int run = 0; run < 2; ++run) {
    std::string out = (fs::temp_directory_path() / ("ppgpt_accept_run" + std::to_string(run) + ".jsonl")).string();
    std::string cmd = std::string("\"") + PPGPT_CLI + "\" pipeline --config \"" + dir + "/pipeline.conf\" --contract \"" +
                      dir + "/envelope.msol\" --function addEnvelope --out \"" + out + "\" > /dev/null";
    int st = std::system(cmd.c_str());
    codes.push_back(WIFEXITED(st) ? WEXITSTATUS(st) : -1);
    reports.push_back(strip_timings(out));
    fs::remove(out);
  }
  auto rep = pipeline::parse_report(reports[0]);
  size_t violated = 0, two_call = 0;
  for (const auto& r : rep.records) {
    violated += r.verdict == "Violated";
    two_call += r.verdict == "Violated" && r.trace_length && *r.trace_length == 2;
  }
  std::ifstream lf(dir + "/labels.jsonl");
  std::stringstream ls;
  ls << lf.rdbuf();
  auto m = pipeline::match_stats(ls.str());
  bool identical = reports[0] == reports[1] && !reports[0].empty();
  std::string d = std::string("two replay runs ") + (identical ? "byte-identical" : "DIFFER") + " (timings excluded), exit codes " +
                  std::to_string(codes[0]) + "/" + std::to_string(codes[1]) + ", " + std::to_string(violated) +
                  " Violated rule with a 2-call trace; labeled-match harness precision " + fmt("%.2f", m.precision()) +
                  " recall " + fmt("%.2f", m.recall());
  return {identical && codes[0] == 2 && codes[1] == 2 && violated == 1 && two_call == 1 && std::isfinite(m.recall()), d};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  std::vector<Criterion> cs = {
      {"grammar coverage", grammar},
      {"prover-oracle equivalence", oracle},
      {"case studies", case_studies},
      {"over-approximation semantics", overapprox},
      {"ranking arithmetic", ranking_arith},
      {"revise-loop contract", revise_loop},
      {"retrieval", retrieval},
      {"end-to-end determinism", end_to_end},
  };
  int failed = 0;
  for (size_t k = 0; k < cs.size(); ++k) {
    Outcome o;
    try {
      o = cs[k].run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << k + 1 << " (" << cs[k].name << "): " << o.detail << std::endl;
  }
  return failed ? 1 : 0;
}
