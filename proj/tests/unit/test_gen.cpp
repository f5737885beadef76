#include <gtest/gtest.h>

#include <filesystem>

#include "ppgpt/common/error.hpp"
#include "ppgpt/gen/loop.hpp"
#include "test_support.hpp"

using namespace ppgpt;
using namespace ppgpt::gen;
using knowledge::EntryKind;
using knowledge::KnowledgeEntry;

namespace {

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

const char* kGood = "```\nrule depositAdds() {\n  uint256 $a;\n  uint256 $before = total;\n  deposit($a);\n"
                    "  assert(total == $before + $a);\n}\n```";
const char* kBroken = "rule depositAdds() {\n  deposit(x);\n  assert(total >= 0);\n}";  // x undeclared
const char* kUncovered = "rule depositAdds() {\n  uint256 $a;\n  withdraw($a);\n  assert(total >= 0);\n}";

GenTarget target() {
  GenTarget t;
  t.program = ppgpt::testing::must_resolve(kBank);
  t.contract_code = kBank;
  t.func_code = "function deposit(uint256 amount) public { balances[msg.sender] += amount; total += amount; }";
  t.function_name = "deposit";
  return t;
}

KnowledgeEntry ref_rule() {
  return {"ref1", "function add(uint v) { s += v; }", "adds", "rule addAdds() { uint $v; add($v); assert(true); }",
          "adding", EntryKind::Rule, "test"};
}

}  // namespace

TEST(Prompts, PlaceholdersAndEscapes) {
  auto ph = placeholders(PromptKind::RuleGen);
  EXPECT_EQ(ph, (std::vector<std::string>{"func_code", "contract_code", "rule_property", "spec_grammar"}));
  std::string p = build_prompt(PromptKind::RuleGen,
                               {{"func_code", "F"}, {"contract_code", "C"}, {"rule_property", "R"}, {"spec_grammar", "G"}});
  EXPECT_NE(p.find("rule [name of rule]() {logic of rule}"), std::string::npos);
  EXPECT_EQ(p.find("{func_code}"), std::string::npos);
}

TEST(Prompts, MissingPlaceholderThrows) {
  try {
    build_prompt(PromptKind::CommonRevise, {{"spec_res", "x"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("missing placeholder {"), std::string::npos);
  }
}

TEST(Prompts, SpecialReviseNamesTheTarget) {
  std::string p = build_prompt(PromptKind::SpecialRevise, {{"knowledge_rule", "K"},
                                                           {"spec_res", "S"},
                                                           {"function_name", "deposit"},
                                                           {"contract_code", "C"},
                                                           {"func_code", "F"}});
  EXPECT_NE(p.find("never executes the target function deposit"), std::string::npos);
}

TEST(CleanResponse, FencesAndChatter) {
  EXPECT_EQ(clean_response("Sure!\n```solidity\nrule a() {}\n```\nbye"), "rule a() {}\n");
  EXPECT_EQ(clean_response("Here you go:\nrule a() {\n}\n"), "rule a() {\n}\n");
}

TEST(Compile, KindAndTargetChecks) {
  auto t = target();
  auto ok = compile_candidate(*t.program, clean_response(kGood), EntryKind::Rule, "deposit");
  EXPECT_TRUE(ok.ok) << ok.rendered;
  EXPECT_TRUE(ok.covered);
  auto unc = compile_candidate(*t.program, kUncovered, EntryKind::Rule, "deposit");
  EXPECT_TRUE(unc.ok);
  EXPECT_FALSE(unc.covered);
  auto bad = compile_candidate(*t.program, kBroken, EntryKind::Rule, "deposit");
  EXPECT_FALSE(bad.ok);
  EXPECT_FALSE(bad.rendered.empty());
  auto kind = compile_candidate(*t.program, "function deposit(uint256 amount) precondition { true; } postcondition { true; }",
                                EntryKind::Rule, "deposit");
  EXPECT_FALSE(kind.ok);
  EXPECT_NE(kind.rendered.find("E4004"), std::string::npos);
  auto wrong = compile_candidate(*t.program, "function withdraw(uint256 amount) precondition { true; } postcondition { true; }",
                                 EntryKind::Condition, "deposit");
  EXPECT_FALSE(wrong.ok);
  EXPECT_NE(wrong.rendered.find("E4005"), std::string::npos);
}

TEST(Loop, CompilesFirstTry) {
  auto t = target();
  ScriptedProvider p({kGood});
  auto c = generate_candidate(p, ref_rule(), t);
  revise_until_compilable(p, c, t, 9, {}, ref_rule().property);
  EXPECT_EQ(c.status, CandidateStatus::Compilable);
  EXPECT_EQ(c.attempts, 0);
  EXPECT_EQ(p.calls(), 1u);
}

TEST(Loop, TwoRevisionsWithSpecialPromptOnCoverage) {
  auto t = target();
  ScriptedProvider p({kBroken, kUncovered, kGood});
  auto c = generate_candidate(p, ref_rule(), t);
  revise_until_compilable(p, c, t, 9, {}, ref_rule().property);
  EXPECT_EQ(c.status, CandidateStatus::Compilable);
  EXPECT_EQ(c.attempts, 2);
  ASSERT_EQ(c.transcript.size(), 3u);
  EXPECT_EQ(c.transcript[0].kind, PromptKind::RuleGen);
  EXPECT_EQ(c.transcript[1].kind, PromptKind::CommonRevise);
  EXPECT_EQ(c.transcript[2].kind, PromptKind::SpecialRevise);
  EXPECT_NE(c.transcript[1].prompt.find("Compiler output:\n" + compile_candidate(*t.program, kBroken, EntryKind::Rule, "deposit").rendered), std::string::npos) << c.transcript[1].prompt;
}

TEST(Loop, GivesUpAfterNineRevisions) {
  auto t = target();
  std::vector<std::string> script(20, kBroken);
  ScriptedProvider p(script);
  auto c = generate_candidate(p, ref_rule(), t);
  revise_until_compilable(p, c, t, 9, {}, ref_rule().property);
  EXPECT_EQ(c.status, CandidateStatus::Failed);
  EXPECT_EQ(c.attempts, 9);
  EXPECT_EQ(p.calls(), 10u);
  for (size_t i = 1; i < c.transcript.size(); ++i) EXPECT_EQ(c.transcript[i].kind, PromptKind::CommonRevise);
}

TEST(Loop, ProviderFailureMarksFailed) {
  auto t = target();
  ScriptedProvider p({kBroken});
  auto c = generate_candidate(p, ref_rule(), t);
  revise_until_compilable(p, c, t);
  EXPECT_EQ(c.status, CandidateStatus::Failed);
  EXPECT_NE(c.reason.find("provider"), std::string::npos);
}

TEST(Loop, ConditionCandidatesUseConditionRevise) {
  auto t = target();
  KnowledgeEntry ref{"c1", "function f() {}", "", "function f() precondition { true; } postcondition { true; }", "",
                     EntryKind::Condition, ""};
  ScriptedProvider p({"function deposit(uint256 amount) precondition { nope; } postcondition { true; }",
                      "function deposit(uint256 amount) precondition { true; } postcondition { total == old(total) + amount; }"});
  auto c = generate_candidate(p, ref, t);
  EXPECT_EQ(c.transcript[0].kind, PromptKind::ConditionGen);
  revise_until_compilable(p, c, t);
  EXPECT_EQ(c.status, CandidateStatus::Compilable);
  EXPECT_EQ(c.attempts, 1);
  EXPECT_EQ(c.transcript[1].kind, PromptKind::ConditionRevise);
}

TEST(Providers, RecordThenReplay) {
  auto path = (std::filesystem::temp_directory_path() / "ppgpt_fixture_test.jsonl").string();
  std::filesystem::remove(path);
  auto inner = std::make_shared<ScriptedProvider>(std::vector<std::string>{"one", "two", "three"});
  RecordingProvider rec(inner, path);
  rec.complete("p", {});
  rec.complete("p", {});
  rec.complete("q", {});
  auto rp = ReplayProvider::from_file(path);
  EXPECT_EQ(rp->complete("p", {}), "one");
  EXPECT_EQ(rp->complete("p", {}), "two");
  EXPECT_EQ(rp->complete("p", {}), "two");
  EXPECT_EQ(rp->complete("q", {}), "three");
  EXPECT_THROW(rp->complete("unseen", {}), ProviderError);
  std::filesystem::remove(path);
}

TEST(Providers, HashIsSha256) {
  EXPECT_EQ(prompt_hash(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}
