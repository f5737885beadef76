#include <gtest/gtest.h>

#include "ppgpt/common/error.hpp"
#include "ppgpt/smt/solver.hpp"
#include "ppgpt/symexec/executor.hpp"
#include "test_support.hpp"

using namespace ppgpt;
using namespace ppgpt::sym;
using ppgpt::testing::must_resolve;

namespace {

smt::Status status(const std::vector<Term>& ts) { return smt::Solver().check(ts, false).status; }

const FunctionInfo& fn(const frontend::ResolvedProgram& p, const std::string& name) {
  for (const auto* f : p.public_functions(p.main()))
    if (f->name() == name) return *f;
  throw std::runtime_error("no function " + name);
}

}  // namespace

TEST(Term, ConstantFolding) {
  EXPECT_TRUE(is_const(add(int_const(2), int_const(3))));
  EXPECT_EQ(to_string(add(int_const(2), int_const(3))), "5");
  Term x = var("x", int_sort());
  EXPECT_TRUE(equal(add(x, int_const(0)), x));
  Term a = var("a", array_sort(int_sort()));
  EXPECT_TRUE(equal(select(store(a, int_const(1), x), int_const(1)), x));
  EXPECT_TRUE(is_true(land(bool_const(true), bool_const(true))));
  EXPECT_TRUE(is_nonlinear(mul(x, var("y", int_sort()))));
  EXPECT_FALSE(is_nonlinear(mul(x, int_const(3))));
}

TEST(Smt, SatUnsatAndModels) {
  Term x = var("x", int_sort());
  smt::Solver s;
  auto r = s.check({lt(int_const(3), x), lt(x, int_const(5))});
  ASSERT_EQ(r.status, smt::Status::Sat);
  EXPECT_EQ(r.model.eval_int(x), 4);
  EXPECT_EQ(status({lt(x, int_const(0)), lt(int_const(0), x)}), smt::Status::Unsat);
}

TEST(Smt, UninterpretedFunctionsAreInjective) {
  Term a = var("a", int_sort()), b = var("b", int_sort());
  EXPECT_EQ(status({eq(apply("sha3", {a}), apply("sha3", {b})), lnot(eq(a, b))}), smt::Status::Unsat);
}

TEST(Smt, TruncatingDivision) {
  Term x = var("x", int_sort());
  EXPECT_EQ(status({eq(x, int_const(-7)), lnot(eq(tdiv(x, int_const(2)), int_const(-3)))}), smt::Status::Unsat);
  EXPECT_EQ(status({eq(x, int_const(-7)), lnot(eq(div(x, int_const(2)), int_const(-4)))}), smt::Status::Unsat);
}

TEST(Smt, BadCommandIsAnError) {
  smt::SolverOptions o;
  o.command = "/nonexistent/solver -in";
  EXPECT_THROW(smt::Solver(o).check({bool_const(true)}), Error);
}

TEST(SExpr, ParsesQuotedSymbols) {
  auto es = smt::parse_sexprs("((|a b| 1) (c (- 2))) ; comment\nsat");
  ASSERT_EQ(es.size(), 2u);
  EXPECT_EQ(es[0]->at(0).at(0).text, "a b");
  EXPECT_TRUE(es[1]->is("sat"));
}

TEST(Executor, OverflowPartitionsPaths) {
  auto p = must_resolve("contract C { uint8 x; function inc() public { x = x + 1; } }");
  Executor ex(*p, nullptr);
  SymState st = ex.init_state();
  st.env = ex.fresh_env(st, false);
  auto outs = ex.call(st, fn(*p, "inc"), {});
  int normal = 0, reverted = 0;
  for (const auto& o : outs) {
    if (o.kind == OutcomeKind::Normal) {
      ++normal;
      // normal path: x < 255
      EXPECT_EQ(status({o.state.path_condition(), eq(var("x", int_sort()), int_const(255))}), smt::Status::Unsat);
    } else {
      ++reverted;
      EXPECT_EQ(o.reason, "arithmetic overflow");
    }
  }
  EXPECT_EQ(normal, 1);
  EXPECT_EQ(reverted, 1);
}

TEST(Executor, RequireAndFrame) {
  auto p = must_resolve("contract C { uint256 a; uint256 b; function f(uint256 v) public { require(v > 2); a = v; } }");
  Executor ex(*p, nullptr);
  SymState st = ex.init_state();
  st.env = ex.fresh_env(st, false);
  Value v = ex.fresh_value(st, frontend::types::uint_t(), "v");
  auto outs = ex.call(st, fn(*p, "f"), {v});
  for (const auto& o : outs) {
    if (o.kind != OutcomeKind::Normal) continue;
    Term pc = o.state.path_condition();
    EXPECT_EQ(status({pc, lnot(lt(int_const(2), v.term))}), smt::Status::Unsat);
    EXPECT_TRUE(equal(o.state.store.at("b"), st.store.at("b")));  // untouched
    EXPECT_TRUE(equal(o.state.store.at("a"), v.term));
  }
}

TEST(Executor, LowLevelCallResultIsOracle) {
  auto p = must_resolve(
      "contract C { uint256 n; function pay(address to) public { (bool ok, ) = to.call{value: 1}(\"\"); require(ok); n = n + 1; } }");
  Executor ex(*p, nullptr);
  SymState st = ex.init_state();
  st.env = ex.fresh_env(st, false);
  Value to = ex.fresh_value(st, frontend::types::address_t(), "to");
  auto outs = ex.call(st, fn(*p, "pay"), {to});
  bool saw = false;
  for (const auto& o : outs)
    if (o.kind == OutcomeKind::Normal) {
      ASSERT_GE(o.state.oracles.size(), 1u);
      EXPECT_EQ(o.state.oracles[0].kind, "success");
      saw = true;
    }
  EXPECT_TRUE(saw);
}

TEST(Executor, DomainBoundRestrictsInputs) {
  auto p = must_resolve("contract C { uint8 x; function f() public { x = x + 1; } }");
  ExecOptions o;
  o.domain_bound = 7;
  Executor ex(*p, nullptr, o);
  SymState st = ex.init_state();
  st.env = ex.fresh_env(st, false);
  for (const auto& out : ex.call(st, fn(*p, "f"), {})) {
    if (out.kind == OutcomeKind::Reverted) {
      EXPECT_EQ(status({out.state.path_condition()}), smt::Status::Unsat);  // 255 is out of the domain
    } else {
      // x + 1 == 8 is still reachable: only inputs are bounded
      EXPECT_EQ(status({out.state.path_condition(), eq(out.state.store.at("x"), int_const(8))}), smt::Status::Sat);
    }
  }
}
