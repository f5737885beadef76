#include <gtest/gtest.h>

#include "ppgpt/check/spec_checker.hpp"
#include "ppgpt/common/error.hpp"
#include "test_support.hpp"

using namespace ppgpt::frontend;
using ppgpt::check::check_spec;
using ppgpt::check::check_target_coverage;
using ppgpt::testing::must_parse_spec;
using ppgpt::testing::must_resolve;
using ppgpt::testing::read_fixture;

namespace {

std::shared_ptr<const ResolvedSpec> spec_of(const ResolvedProgram& p, const std::string& text) {
  return resolve_spec(p, must_parse_spec("s.psl", text), 0);
}

}  // namespace

TEST(SpecChecker, ZkLinkSpecIsOk) {
  auto p = must_resolve(read_fixture("cases/zklink.msol"));
  auto rs = spec_of(*p, read_fixture("cases/zklink.psl"));
  auto r = check_spec(*p, *rs);
  EXPECT_TRUE(r.ok) << render_diagnostics(r.issues);
  EXPECT_TRUE(r.issues.empty());
}

TEST(SpecChecker, UndeclaredHelperInPrecondition) {
  auto p = must_resolve("contract C { uint256 x; function f() public { x = 1; } }");
  auto rs = spec_of(*p, "function f { precondition { isReady(x); } postcondition { x == 1; } }");
  auto r = check_spec(*p, *rs);
  ASSERT_FALSE(r.ok);
  EXPECT_EQ(r.issues[0].code, codes::kUndeclared);
  EXPECT_NE(r.issues[0].message.find("undeclared identifier"), std::string::npos);
}

TEST(SpecChecker, SymbolicAliasAccepted) {
  auto p = must_resolve("contract C { uint256 varA; function f() public { varA = varA + 1; } }");
  auto rs = spec_of(*p, "rule r() { uint256 $varA; f(); assert(varA == $varA + 1); }");
  auto r = check_spec(*p, *rs);
  EXPECT_TRUE(r.ok) << render_diagnostics(r.issues);
}

TEST(SpecChecker, SymbolicOutsideRule) {
  auto p = must_resolve("contract C { uint256 varA; function f() public { varA = 1; } }");
  auto rs = spec_of(*p, "invariant i { $varA == varA; }");
  auto r = check_spec(*p, *rs);
  ASSERT_FALSE(r.ok);
  EXPECT_EQ(r.issues[0].code, codes::kSymbolicOutsideRule);
}

TEST(SpecChecker, NonBooleanCondition) {
  auto p = must_resolve("contract C { uint256 x; function f() public { x = 1; } }");
  auto r1 = check_spec(*p, *spec_of(*p, "invariant i { x + 1; }"));
  ASSERT_FALSE(r1.ok);
  EXPECT_EQ(r1.issues[0].code, codes::kNotBoolean);
  auto r2 = check_spec(*p, *spec_of(*p, "rule r() { f(); assert(x); }"));
  ASSERT_FALSE(r2.ok);
  EXPECT_EQ(r2.issues[0].code, codes::kNotBoolean);
}

TEST(SpecChecker, Idempotent) {
  auto p = must_resolve("contract C { uint256 x; function f() public { x = 1; } }");
  auto rs = spec_of(*p, "invariant i { y > 0; x + 1; }");
  auto a = check_spec(*p, *rs);
  auto b = check_spec(*p, *rs);
  EXPECT_EQ(render_diagnostics(a.issues), render_diagnostics(b.issues));
}

TEST(Coverage, Fig11RuleCoversAddEnvelope) {
  auto p = must_resolve(read_fixture("cases/envelope.msol"));
  auto rs = spec_of(*p, read_fixture("cases/envelope.psl"));
  ASSERT_TRUE(rs->ok()) << render_diagnostics(rs->diagnostics);
  EXPECT_TRUE(check_target_coverage(*p, *rs, "addEnvelope"));
}

TEST(Coverage, AssertOnlyRule) {
  auto p = must_resolve("contract C { uint256 x; function f() public { x = 1; } function g() public { } }");
  EXPECT_FALSE(check_target_coverage(*p, *spec_of(*p, "rule r() { assert(true); }"), "f"));
  EXPECT_FALSE(check_target_coverage(*p, *spec_of(*p, "rule r() { g(); assert(true); }"), "f"));
  EXPECT_TRUE(check_target_coverage(*p, *spec_of(*p, "rule r() { if (x > 0) { f(); } assert(true); }"), "f"));
  EXPECT_THROW(check_target_coverage(*p, *spec_of(*p, "rule r() { f(); }"), "nope"), ppgpt::Error);
}

TEST(Coverage, SameNamedLocalIsNotACall) {
  auto p = must_resolve("contract C { uint256 x; function f() public { x = 1; } }");
  auto rs = spec_of(*p, "rule r() { uint256 f = 1; assert(f == 1); }");
  EXPECT_FALSE(check_target_coverage(*p, *rs, "f"));
}

TEST(Coverage, ReportedByCheckSpec) {
  auto p = must_resolve("contract C { uint256 x; function f() public { x = 1; } function g() public { } }");
  auto r = check_spec(*p, *spec_of(*p, "rule r() { g(); assert(true); }"), std::string("f"));
  EXPECT_TRUE(r.ok);
  EXPECT_EQ(r.coverage.at("r"), false);
}
