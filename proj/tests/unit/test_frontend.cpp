#include <gtest/gtest.h>

#include "ppgpt/frontend/parser.hpp"
#include "ppgpt/frontend/printer.hpp"
#include "ppgpt/frontend/resolver.hpp"
#include "test_support.hpp"

using namespace ppgpt::frontend;
using ppgpt::testing::read_fixture;

namespace {

void expect_spans_nested(const Expr& e, Span outer) {
  EXPECT_TRUE(outer.contains(e.span)) << dump_expr(e);
  for (const auto& o : e.operands)
    if (o) expect_spans_nested(*o, e.span);
}

void expect_spans_nested(const Stmt& s, Span outer) {
  EXPECT_TRUE(outer.contains(s.span));
  if (s.expr) expect_spans_nested(*s.expr, s.span);
  if (s.expr2) expect_spans_nested(*s.expr2, s.span);
  for (const auto& c : s.children)
    if (c) expect_spans_nested(*c, s.span);
}

}  // namespace

TEST(Parser, MinimalContract) {
  auto r = parse_contract("a.msol", "contract C { uint256 x; }");
  ASSERT_TRUE(r.ok());
  ASSERT_EQ(r.value->contracts.size(), 1u);
  EXPECT_EQ(r.value->contracts[0].state_vars.size(), 1u);
  EXPECT_EQ(r.value->contracts[0].functions.size(), 0u);
}

TEST(Parser, ZkLinkFixture) {
  auto r = parse_contract("zklink.msol", read_fixture("cases/zklink.msol"));
  ASSERT_TRUE(r.ok()) << render_diagnostics(r.diagnostics);
  const auto& c = r.value->contracts[0];
  EXPECT_EQ(c.state_vars.size(), 4u);
  const FunctionDef* w = nullptr;
  for (const auto& f : c.functions)
    if (f.name == "withdrawForwardFee") w = &f;
  ASSERT_NE(w, nullptr);
  EXPECT_EQ(w->modifiers.size(), 2u);
}

TEST(Parser, MissingContractName) {
  auto r = parse_contract("bad.msol", "contract {");
  ASSERT_FALSE(r.ok());
  ASSERT_FALSE(r.diagnostics.empty());
  EXPECT_EQ(r.diagnostics[0].span.begin, 9u);
  EXPECT_EQ(r.diagnostics[0].code, codes::kSyntax);
}

TEST(Parser, LexicalError) {
  auto r = parse_contract("bad.msol", "contract C { uint256 x = 1 # 2; }");
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.diagnostics[0].code, codes::kUnexpectedChar);
}

TEST(Parser, UnsupportedConstruct) {
  auto r = parse_contract("bad.msol", "library L { }");
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.diagnostics[0].code, codes::kUnsupported);
}

TEST(SpecParser, ZkLinkSpec) {
  auto r = parse_spec("zklink.psl", read_fixture("cases/zklink.psl"));
  ASSERT_TRUE(r.ok()) << render_diagnostics(r.diagnostics);
  ASSERT_EQ(r.value->units.size(), 1u);
  const auto& u = r.value->units[0];
  EXPECT_EQ(u.kind, SpecKind::FunctionSpec);
  EXPECT_EQ(u.name, "withdrawForwardFee");
  EXPECT_EQ(u.pre.size(), 3u);
  EXPECT_EQ(u.post.size(), 2u);
}

TEST(SpecParser, TrivialRule) {
  auto r = parse_spec("r.psl", "rule r() { assert(1 == 1); }");
  ASSERT_TRUE(r.ok());
  ASSERT_EQ(r.value->units.size(), 1u);
  EXPECT_EQ(r.value->units[0].kind, SpecKind::Rule);
  EXPECT_EQ(r.value->units[0].body.size(), 1u);
}

TEST(SpecParser, StatementInPrecondition) {
  auto r = parse_spec("s.psl", "function f { precondition { x = 1; } postcondition {} }");
  ASSERT_FALSE(r.ok());
  ASSERT_FALSE(r.diagnostics.empty());
  EXPECT_EQ(r.diagnostics[0].code, codes::kStatementForm);
  EXPECT_NE(r.diagnostics[0].message.find("only expression statements"), std::string::npos);
}

TEST(SpecParser, OldSpellingsNormalize) {
  auto a = parse_spec("a.psl", "function f { postcondition { x == old(x) + 1; } }");
  auto b = parse_spec("b.psl", "function f { postcondition { x == __old__(x) + 1; } }");
  ASSERT_TRUE(a.ok() && b.ok());
  EXPECT_EQ(dump_specs(*a.value), dump_specs(*b.value));
  EXPECT_NE(print_specs(*b.value).find("old(x)"), std::string::npos);
  EXPECT_EQ(print_specs(*b.value).find("__old__"), std::string::npos);
}

TEST(SpecParser, InvariantSurfaceSyntax) {
  auto r = parse_spec("i.psl", "invariant solvency { total >= 0; a == b; }");
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.value->units[0].kind, SpecKind::Invariant);
  EXPECT_EQ(r.value->units[0].exprs.size(), 2u);
}

TEST(Printer, RoundTripFixtures) {
  for (const char* f : {"cases/zklink.msol", "cases/envelope.msol", "cases/hashing.msol"}) {
    auto a = parse_contract(f, read_fixture(f));
    ASSERT_TRUE(a.ok()) << f << "\n" << render_diagnostics(a.diagnostics);
    std::string printed = print_unit(*a.value);
    auto b = parse_contract("printed", printed);
    ASSERT_TRUE(b.ok()) << printed << render_diagnostics(b.diagnostics);
    EXPECT_EQ(dump_unit(*a.value), dump_unit(*b.value)) << printed;
  }
  for (const char* f : {"cases/zklink.psl", "cases/envelope.psl", "cases/hashing.psl"}) {
    auto a = parse_spec(f, read_fixture(f));
    ASSERT_TRUE(a.ok()) << f << "\n" << render_diagnostics(a.diagnostics);
    std::string printed = print_specs(*a.value);
    auto b = parse_spec("printed", printed);
    ASSERT_TRUE(b.ok()) << printed << render_diagnostics(b.diagnostics);
    EXPECT_EQ(dump_specs(*a.value), dump_specs(*b.value)) << printed;
  }
}

TEST(Printer, ParenthesizationPreservesStructure) {
  const char* src = "rule r() { uint256 a = (1 + 2) * 3; uint256 b = 2 ** 3 ** 2; uint256 c = 10 - (4 - 3);"
                    " bool d = !(a > b) && (c == 1 || a == 2); int256 e = -(-5); assert(d); }";
  auto a = parse_spec("p.psl", src);
  ASSERT_TRUE(a.ok()) << render_diagnostics(a.diagnostics);
  auto b = parse_spec("q.psl", print_specs(*a.value));
  ASSERT_TRUE(b.ok()) << print_specs(*a.value);
  EXPECT_EQ(dump_specs(*a.value), dump_specs(*b.value));
}

TEST(Parser, SpansNested) {
  auto r = parse_contract("zklink.msol", read_fixture("cases/zklink.msol"));
  ASSERT_TRUE(r.ok());
  const auto& text = r.value->source->text();
  Span whole{0, static_cast<uint32_t>(text.size())};
  for (const auto& c : r.value->contracts) {
    EXPECT_TRUE(whole.contains(c.span));
    for (const auto& f : c.functions) {
      EXPECT_TRUE(c.span.contains(f.span));
      if (f.body) expect_spans_nested(*f.body, f.span);
    }
  }
}

TEST(Parser, Deterministic) {
  auto text = read_fixture("cases/envelope.msol");
  auto a = parse_contract("e", text);
  auto b = parse_contract("e", text);
  EXPECT_EQ(dump_unit(*a.value), dump_unit(*b.value));
  auto bad1 = parse_contract("x", "contract C { function f( { } }");
  auto bad2 = parse_contract("x", "contract C { function f( { } }");
  EXPECT_EQ(render_diagnostics(bad1.diagnostics), render_diagnostics(bad2.diagnostics));
}

TEST(Diagnostics, RenderFormat) {
  EXPECT_EQ(render_diagnostics({}), "");
  auto r = parse_contract("bad.msol", "contract {");
  std::string text = render_diagnostics(r.diagnostics);
  EXPECT_EQ(text, "E2001 bad.msol:1:10: " + r.diagnostics[0].message + "\n");
  auto src = make_source("two.psl", "ab\ncd\n");
  auto d1 = make_diagnostic(*src, {4, 5}, codes::kSyntax, "second");
  auto d2 = make_diagnostic(*src, {0, 1}, codes::kSyntax, "first");
  EXPECT_EQ(render_diagnostics({d1, d2}), "E2001 two.psl:1:1: first\nE2001 two.psl:2:2: second\n");
}

// ---- resolver ----

TEST(Resolver, SuperResolvesAlongChain) {
  const char* src = R"(
contract A { uint256 x; function f() public virtual { x = 1; } }
contract B is A { function f() public override { super.f(); x = x + 1; } }
)";
  auto p = ppgpt::testing::must_resolve(src);
  const auto& b = *p->contract("B");
  const FunctionInfo* bf = p->dispatch(b, "f", 0);
  ASSERT_NE(bf, nullptr);
  EXPECT_EQ(bf->owner->name, "B");
  const FunctionInfo* sup = p->super_dispatch(b, b, "f", 0);
  ASSERT_NE(sup, nullptr);
  EXPECT_EQ(sup->owner->name, "A");
}

TEST(Resolver, DiamondLinearization) {
  const char* src = R"(
contract A { }
contract B is A { }
contract C is A { }
contract D is B, C { }
)";
  auto p = ppgpt::testing::must_resolve(src);
  std::vector<std::string> names;
  for (const auto* c : p->contract("D")->linearization) names.push_back(c->name);
  EXPECT_EQ(names, (std::vector<std::string>{"D", "C", "B", "A"}));
}

TEST(Resolver, AmbiguousOverride) {
  const char* src = R"(
contract B { function f() public virtual { } }
contract C { function f() public virtual { } }
contract D is B, C { }
)";
  auto r = resolve({ppgpt::testing::must_parse_contract("d.msol", src)});
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.diagnostics[0].code, codes::kAmbiguousOverride);
}

TEST(Resolver, UndeclaredResultInSpec) {
  auto program = ppgpt::testing::must_resolve("contract C { uint256 x; function f() public { x = 1; } }");
  auto spec = ppgpt::testing::must_parse_spec("s.psl", "function f { postcondition { __result__ == 1; } }");
  auto rs = resolve_spec(*program, spec, 0);
  ASSERT_FALSE(rs->ok());
  EXPECT_EQ(rs->diagnostics[0].code, codes::kUndeclared);
  EXPECT_NE(rs->diagnostics[0].message.find("__result__"), std::string::npos);
}

TEST(Resolver, TypeMismatch) {
  auto r = resolve({ppgpt::testing::must_parse_contract("t.msol",
                                                        "contract C { bool b; function f() public { b = 1 + 2; } }")});
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.diagnostics[0].code, codes::kTypeMismatch);
}

TEST(Resolver, OldMustWrapStateVariable) {
  auto program = ppgpt::testing::must_resolve("contract C { uint256 x; function f(uint256 a) public { x = a; } }");
  auto spec = ppgpt::testing::must_parse_spec("s.psl", "function f { postcondition { x == old(a); } }");
  auto rs = resolve_spec(*program, spec, 0);
  ASSERT_FALSE(rs->ok());
  EXPECT_EQ(rs->diagnostics[0].code, codes::kInvalidOld);
}

TEST(Resolver, CaseStudiesResolve) {
  ppgpt::testing::must_resolve(read_fixture("cases/zklink.msol"), read_fixture("cases/zklink.psl"));
  ppgpt::testing::must_resolve(read_fixture("cases/envelope.msol"), read_fixture("cases/envelope.psl"));
  ppgpt::testing::must_resolve(read_fixture("cases/hashing.msol"), read_fixture("cases/hashing.psl"));
}

TEST(Resolver, SymbolicAliasOfStateVar) {
  auto p = ppgpt::testing::must_resolve("contract C { uint256 varA; function f() public { varA = 1; } }",
                                        "rule r() { f(); assert($varA == varA); }");
  ASSERT_EQ(p->specs().size(), 1u);
  EXPECT_TRUE(p->specs()[0]->ok());
}
