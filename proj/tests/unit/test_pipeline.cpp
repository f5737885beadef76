#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "ppgpt/common/error.hpp"
#include "ppgpt/pipeline/harness.hpp"
#include "ppgpt/pipeline/pipeline.hpp"
#include "test_support.hpp"

using namespace ppgpt;
using namespace ppgpt::pipeline;
namespace fs = std::filesystem;

namespace {

std::string dir() { return ppgpt::testing::fixture_path("pipeline"); }

std::string strip_timings(const std::string& jsonl) {
  std::string out;
  std::istringstream in(jsonl);
  for (std::string line; std::getline(in, line);) out += line.substr(0, line.find(",\"timings\"")) + "\n";
  return out;
}

}  // namespace

TEST(Config, DefaultsAndParsing) {
  Config d;
  EXPECT_EQ(d.retrieve_threshold, 0.8);
  EXPECT_EQ(d.gen_max_attempts, 9);
  EXPECT_EQ(d.rank_k, 2u);
  EXPECT_EQ(d.bmc_depth, 3);
  EXPECT_EQ(d.loop_bound, 5);
  EXPECT_EQ(d.solver_timeout_ms, 10000);
  EXPECT_FALSE(d.retrieve_max);

  Config c = parse_config("# comment\nknowledgePath = kb.jsonl\nretrieve.max=3 # trailing\nsolver.cmd = z3 -in -smt2\n",
                          "/base");
  EXPECT_EQ(c.knowledge_path, "/base/kb.jsonl");
  EXPECT_EQ(*c.retrieve_max, 3u);
  EXPECT_EQ(c.solver_cmd, "z3 -in -smt2");
}

TEST(Config, Rejections) {
  EXPECT_THROW(parse_config("nope = 1\n"), ConfigError);
  EXPECT_THROW(parse_config("rank.k = 0\n"), ConfigError);
  EXPECT_THROW(parse_config("retrieve.threshold = 1.5\n"), ConfigError);
  EXPECT_THROW(parse_config("provider.mode = live\n"), ConfigError);
  EXPECT_THROW(parse_config("bmc.depth = three\n"), ConfigError);
  EXPECT_THROW(parse_config("just a line\n"), ConfigError);
}

TEST(Pipeline, LoadTargetCutsFunction) {
  auto t = load_target(dir() + "/envelope.msol", "addEnvelope");
  EXPECT_EQ(t.func_code.rfind("function addEnvelope(", 0), 0u);
  EXPECT_EQ(t.func_code.back(), '}');
  EXPECT_THROW(load_target(dir() + "/envelope.msol", "nothing"), Error);
}

TEST(Pipeline, EmptyKnowledgeBase) {
  auto kb = fs::temp_directory_path() / "ppgpt_empty_kb.jsonl";
  std::ofstream(kb) << "";
  Config c = load_config(dir() + "/pipeline.conf");
  c.knowledge_path = kb.string();
  Providers pv;
  try {
    run_pipeline(c, dir() + "/envelope.msol", "addEnvelope", pv);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("no reference properties"), std::string::npos) << e.what();
  }
  fs::remove(kb);
}

TEST(Pipeline, ReplayRunIsDeterministic) {
  Config c = load_config(dir() + "/pipeline.conf");
  Providers a, b;
  auto r1 = run_pipeline(c, dir() + "/envelope.msol", "addEnvelope", a);
  auto r2 = run_pipeline(c, dir() + "/envelope.msol", "addEnvelope", b);
  EXPECT_EQ(strip_timings(report_jsonl(r1)), strip_timings(report_jsonl(r2)));
  EXPECT_TRUE(r1.any_violated());
  ASSERT_EQ(r1.records.size(), 2u);
  size_t violated = 0;
  for (const auto& r : r1.records) {
    EXPECT_EQ(r.candidate.status, gen::CandidateStatus::Compilable);
    if (r.verdict == "Violated") {
      ++violated;
      ASSERT_TRUE(r.trace_length);
      EXPECT_EQ(*r.trace_length, 2u);
      EXPECT_EQ(r.candidate.kind, knowledge::EntryKind::Rule);
      EXPECT_EQ(r.candidate.attempts, 2);
    }
  }
  EXPECT_EQ(violated, 1u);
  EXPECT_GE(*r1.records[0].score, *r1.records[1].score);
}

TEST(Pipeline, ReportRoundTrip) {
  Config c = load_config(dir() + "/pipeline.conf");
  Providers pv;
  RunOptions o;
  o.verify = false;
  auto r = run_pipeline(c, dir() + "/envelope.msol", "addEnvelope", pv, o);
  std::string text = report_jsonl(r, true);
  EXPECT_EQ(report_jsonl(parse_report(text), true), text);
  for (const auto& rec : r.records) EXPECT_EQ(rec.verdict, "not-verified");
}

TEST(Pipeline, RankOnlyVerifiesTopK) {
  Config c = load_config(dir() + "/pipeline.conf");
  c.rank_k = 1;
  Providers pv;
  auto r = run_pipeline(c, dir() + "/envelope.msol", "addEnvelope", pv);
  EXPECT_NE(r.records[0].verdict, "not-verified");
  EXPECT_EQ(r.records[1].verdict, "not-verified");
  EXPECT_EQ(*r.records[1].rank, 2u);
}

TEST(Pipeline, HighThresholdRetrievesNothing) {
  Config c = load_config(dir() + "/pipeline.conf");
  c.retrieve_threshold = 0.999;
  Providers pv;
  auto r = run_pipeline(c, dir() + "/envelope.msol", "addEnvelope", pv);
  EXPECT_EQ(r.retrieved, 0u);
  EXPECT_TRUE(r.records.empty());
}

TEST(Pipeline, VerifySpecFile) {
  Config c;
  auto v = verify_spec_file(c, ppgpt::testing::fixture_path("cases/envelope.msol"),
                            ppgpt::testing::fixture_path("cases/envelope.psl"));
  ASSERT_EQ(v.results.size(), 1u);
  EXPECT_TRUE(v.any_violated());
  EXPECT_NE(verification_jsonl(v).find("\"verdict\":\"Violated\""), std::string::npos);
  EXPECT_NE(verification_summary(v).find("addEnvelope(\"uniqueID\""), std::string::npos);
}

TEST(Harness, MatchStats) {
  auto s = match_stats(
      "{\"id\":\"g1\",\"role\":\"generated\",\"matched\":true}\n"
      "{\"id\":\"g2\",\"role\":\"generated\",\"matched\":false}\n"
      "{\"id\":\"t1\",\"role\":\"truth\",\"matched\":true}\n"
      "{\"id\":\"t2\",\"role\":\"truth\",\"matched\":true}\n"
      "{\"id\":\"t3\",\"role\":\"truth\",\"matched\":false}\n");
  EXPECT_DOUBLE_EQ(s.precision(), 0.5);
  EXPECT_DOUBLE_EQ(s.recall(), 2.0 / 3);
  EXPECT_THROW(match_stats("{\"id\":\"g\",\"role\":\"other\",\"matched\":true}\n"), Error);
  EXPECT_THROW(match_stats("{\"id\":\"g\",\"role\":\"truth\",\"matched\":true}\n{\"id\":\"g\",\"role\":\"truth\",\"matched\":true}\n"),
               Error);
}

TEST(Harness, CompileRateFromTranscripts) {
  Config c = load_config(dir() + "/pipeline.conf");
  Providers pv;
  RunOptions o;
  o.verify = false;
  auto r = parse_report(report_jsonl(run_pipeline(c, dir() + "/envelope.msol", "addEnvelope", pv, o), true));
  auto s = compile_stats(r, load_target(dir() + "/envelope.msol", "addEnvelope"));
  EXPECT_EQ(s.total, 2u);
  EXPECT_EQ(s.compiled, 2u);
  EXPECT_EQ(s.disagreements, 0u);
  EXPECT_EQ(s.attempts.at(0), 1u);
  EXPECT_EQ(s.attempts.at(2), 1u);
}
