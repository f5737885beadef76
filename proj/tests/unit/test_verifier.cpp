#include <gtest/gtest.h>

#include "ppgpt/verifier/verifier.hpp"
#include "test_support.hpp"

using namespace ppgpt::frontend;
using namespace ppgpt::verify;
using ppgpt::testing::must_parse_spec;
using ppgpt::testing::must_resolve;
using ppgpt::testing::read_fixture;

namespace {

struct Fixture {
  std::shared_ptr<const ResolvedProgram> program;
  std::vector<std::shared_ptr<const ResolvedSpec>> specs;
};

Fixture load(const std::string& contract, const std::string& spec) {
  Fixture f;
  f.program = must_resolve(contract);
  auto file = must_parse_spec("t.psl", spec);
  for (size_t k = 0; k < file->units.size(); ++k) {
    auto rs = resolve_spec(*f.program, file, k);
    EXPECT_TRUE(rs->ok()) << render_diagnostics(rs->diagnostics);
    f.specs.push_back(rs);
  }
  return f;
}

Verdict run(const Fixture& f, size_t k = 0, VerifyOptions o = {}) {
  return verify_property(*f.program, *f.specs.at(k), o);
}

}  // namespace

TEST(Verifier, IncrementProven) {
  auto f = load("contract C { uint8 c; function inc() public { c = c + 1; } }",
                "function inc() precondition { true; } postcondition { c == old(c) + 1; }");
  EXPECT_EQ(run(f).kind, VerdictKind::Proven);
}

TEST(Verifier, ResetViolatedWithReplayableTrace) {
  auto f = load("contract C { uint8 x; function setX(uint8 v) public { x = v; } function reset() public { x = 0; } }",
                "function reset() precondition { true; } postcondition { x == old(x); }");
  Verdict v = run(f);
  ASSERT_EQ(v.kind, VerdictKind::Violated) << v.reason;
  ASSERT_TRUE(v.trace);
  EXPECT_TRUE(v.modular_violation);
  EXPECT_EQ(v.trace->calls.size(), 2u);  // setX(nonzero), reset()
  EXPECT_EQ(v.trace->calls.back().function, "reset");
  EXPECT_NE(v.trace->calls[0].args[0].i, 0);
  EXPECT_TRUE(replay(*f.program, *f.specs[0], *v.trace));
}

TEST(Verifier, UnreachableViolationIsUnknown) {
  auto f = load(
      "contract C { uint8 s; uint8 t; function both(uint8 a) public { require(a < 10); s = s + a; t = t + a; }"
      " function zero() public { s = s - s; t = 0; } }",
      "function zero() precondition { s != t; } postcondition { s == t + 1; }");
  Verdict v = run(f);
  EXPECT_EQ(v.kind, VerdictKind::Unknown);
  EXPECT_EQ(v.reason, "no reachable counterexample within depth");
  EXPECT_TRUE(v.modular_violation);
}

TEST(Verifier, BmcDisabledGivesUnconfirmed) {
  auto f = load("contract C { uint8 x; function reset() public { x = 0; } }",
                "function reset() precondition { true; } postcondition { x == old(x); }");
  VerifyOptions o;
  o.bmc = false;
  Verdict v = run(f, 0, o);
  EXPECT_EQ(v.kind, VerdictKind::Unknown);
  EXPECT_EQ(v.reason, "unconfirmed");
}

TEST(Verifier, DepthZeroIsUnknown) {
  auto f = load("contract C { uint8 x; function setX(uint8 v) public { x = v; } function reset() public { x = 0; } }",
                "function reset() precondition { true; } postcondition { x == old(x); }");
  VerifyOptions o;
  o.bmc_depth = 0;
  EXPECT_EQ(run(f, 0, o).kind, VerdictKind::Unknown);
  o.bmc_depth = 1;
  EXPECT_EQ(run(f, 0, o).kind, VerdictKind::Unknown);  // x is 0 right after deployment
  o.bmc_depth = 2;
  EXPECT_EQ(run(f, 0, o).kind, VerdictKind::Violated);
}

TEST(Verifier, ContradictoryPreconditionIsVacuous) {
  auto f = load("contract C { uint8 x; function reset() public { x = 0; } }",
                "function reset() precondition { x > 3; x < 2; } postcondition { x == 7; }");
  EXPECT_EQ(run(f).kind, VerdictKind::VacuouslyProven);
}

TEST(Verifier, RuleBasics) {
  auto f = load("contract C { uint8 x; function f() public { x = 1; } }",
                "rule r1() { uint256 $y; assume($y > 0); assert($y >= 1); }\n"
                "rule r2() { assume(false); assert(false); }\n");
  EXPECT_EQ(run(f, 0).kind, VerdictKind::Proven);
  EXPECT_EQ(run(f, 1).kind, VerdictKind::VacuouslyProven);
}

TEST(Verifier, InvariantPerFunction) {
  auto f = load(
      "contract C { uint8 s; uint8 t; function deposit(uint8 a) public { t = t + a; s = s + a; }"
      " function skew(uint8 a) public { s = s + a; } }",
      "invariant same() { s == t; }");
  auto m = verify_invariant(*f.program, *f.specs[0]);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m.at("deposit").kind, VerdictKind::Proven);
  EXPECT_EQ(m.at("skew").kind, VerdictKind::Violated) << m.at("skew").reason;
  EXPECT_EQ(combine(m).kind, VerdictKind::Violated);
}

TEST(Verifier, TrueInvariantProvenEverywhere) {
  auto f = load("contract C { uint8 s; function a() public { s = 1; } function b() public view returns (uint8) { return s; } }",
                "invariant t() { true; }");
  for (const auto& [name, v] : verify_invariant(*f.program, *f.specs[0])) EXPECT_EQ(v.kind, VerdictKind::Proven) << name;
}

TEST(Verifier, LoopBeyondBoundIsUnknown) {
  auto f = load("contract C { uint256 n; function spin(uint256 k) public { for (uint256 i = 0; i < k; i++) { n = n + 1; } } }",
                "function spin(uint256 k) precondition { true; } postcondition { n >= old(n); }");
  Verdict v = run(f);
  EXPECT_EQ(v.kind, VerdictKind::Unknown);
  EXPECT_EQ(v.reason, "loop bound");
}

TEST(Verifier, ZkLinkFirstPostconditionProven) {
  auto f = load(read_fixture("cases/zklink.msol"), read_fixture("cases/zklink_first_post.psl"));
  EXPECT_EQ(run(f).kind, VerdictKind::Proven);
}

TEST(Verifier, ZkLinkMutatedViolated) {
  auto f = load(read_fixture("cases/zklink_mutated.msol"), read_fixture("cases/zklink_first_post.psl"));
  Verdict v = run(f);
  ASSERT_EQ(v.kind, VerdictKind::Violated) << v.reason;
  ASSERT_TRUE(v.trace);
  EXPECT_LE(v.trace->length(), 3u);
}

TEST(Verifier, EnvelopeOverwriteFound) {
  auto f = load(read_fixture("cases/envelope.msol"), read_fixture("cases/envelope.psl"));
  Verdict v = run(f);
  ASSERT_EQ(v.kind, VerdictKind::Violated) << v.reason;
  ASSERT_TRUE(v.trace);
  EXPECT_EQ(v.trace->length(), 2u);
  ASSERT_EQ(v.trace->calls.size(), 1u);
  EXPECT_EQ(v.trace->calls[0].function, "addEnvelope");
  ASSERT_EQ(v.trace->rule_calls.size(), 1u);
  EXPECT_EQ(v.trace->rule_calls[0].function, "addEnvelope");
  EXPECT_EQ(v.trace->calls[0].args[0], v.trace->rule_calls[0].args[0]);  // same envelope id
  EXPECT_NE(render_trace(*v.trace).find("addEnvelope"), std::string::npos);
}

TEST(Verifier, HashingAndExternalCalls) {
  auto f = load(read_fixture("cases/hashing.msol"), read_fixture("cases/hashing.psl"));
  EXPECT_EQ(run(f, 0).kind, VerdictKind::Proven);  // sha3 injectivity
  EXPECT_EQ(run(f, 1).kind, VerdictKind::Proven);  // independent of the feed's answer
  Verdict v = run(f, 2);                           // depends on it
  EXPECT_TRUE(v.modular_violation);
  EXPECT_NE(v.kind, VerdictKind::Proven);
}

TEST(Verifier, VerifyAllSortsById) {
  auto f = load("contract C { uint8 x; function f() public { x = 1; } }",
                "rule a() { assert(true); }\nrule b() { f(); assert(x == 1); }\n");
  std::vector<Job> jobs = {{"p2", f.specs[1]}, {"p1", f.specs[0]}};
  auto rs = verify_all(*f.program, jobs, {}, 2);
  ASSERT_EQ(rs.size(), 2u);
  EXPECT_EQ(rs[0].id, "p1");
  EXPECT_EQ(rs[1].id, "p2");
  EXPECT_EQ(rs[1].verdict.kind, VerdictKind::Proven);
}

TEST(Interpreter, RunsConstructorAndCalls) {
  auto p = must_resolve(
      "contract C { uint256 x = 3; uint256 y; constructor(uint256 a) { y = a * 2; }"
      " function add(uint256 v) public { x = x + v; } function boom() public { uint8 z = 255; z = z + 1; } }");
  Interpreter in(*p, nullptr);
  in.deploy({CValue::of(5)}, {});
  EXPECT_EQ(in.state_scalar("x"), 3);
  EXPECT_EQ(in.state_scalar("y"), 10);
  in.call("add", {CValue::of(4)}, {});
  EXPECT_EQ(in.state_scalar("x"), 7);
  EXPECT_THROW(in.call("boom", {}, {}), Reverted);
  EXPECT_EQ(in.state_scalar("x"), 7);
}

TEST(Interpreter, ConcreteHashIsStable) {
  EXPECT_EQ(concrete_hash("sha3", {1}), concrete_hash("sha3", {1}));
  EXPECT_NE(concrete_hash("sha3", {1}), concrete_hash("sha3", {256}));
  EXPECT_NE(concrete_hash("sha3", {1, 2}), concrete_hash("sha3", {258}));
}
