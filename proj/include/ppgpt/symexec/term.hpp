#pragma once

#include <functional>
#include <memory>
#include <string>
#include <unordered_set>
#include <vector>

#include "ppgpt/common/bigint.hpp"

namespace ppgpt::sym {

enum class SortKind { Int, Bool, Array };

struct Sort;
using SortPtr = std::shared_ptr<const Sort>;

// Arrays are always indexed by Int.
struct Sort {
  SortKind kind = SortKind::Int;
  SortPtr element;
};

SortPtr int_sort();
SortPtr bool_sort();
SortPtr array_sort(SortPtr element);
bool same_sort(const Sort& a, const Sort& b);
std::string sort_string(const Sort& s);  // SMT-LIB spelling

enum class Op {
  Var,
  IntConst,
  BoolConst,
  Add,
  Sub,
  Mul,
  Div,   // Euclidean (SMT-LIB div); used where operands are non-negative
  Mod,   // Euclidean (SMT-LIB mod)
  TDiv,  // truncating division (signed Solidity semantics)
  TMod,  // truncating remainder
  Neg,
  Eq,
  Lt,
  Le,
  Not,
  And,
  Or,
  Implies,
  Ite,
  Select,
  Store,
  ConstArray,
  Apply,  // uninterpreted function Int^n -> Int; name carries the arity suffix
};

struct TermNode;
using Term = std::shared_ptr<const TermNode>;

struct TermNode {
  Op op = Op::Var;
  SortPtr sort;
  std::string name;  // Var / Apply
  BigInt value;      // IntConst
  bool bval = false; // BoolConst
  std::vector<Term> args;
  size_t hash = 0;
};

// Structural equality and hashing (for dedup sets and folding).
bool equal(const Term& a, const Term& b);
struct TermHash {
  size_t operator()(const Term& t) const { return t->hash; }
};
struct TermEq {
  bool operator()(const Term& a, const Term& b) const { return equal(a, b); }
};
using TermSet = std::unordered_set<Term, TermHash, TermEq>;

// ---- constructors (with light constant folding) ----
Term var(const std::string& name, SortPtr sort);
Term int_const(const BigInt& v);
Term bool_const(bool v);
Term add(Term a, Term b);
Term sub(Term a, Term b);
Term mul(Term a, Term b);
Term div(Term a, Term b);
Term mod(Term a, Term b);
Term tdiv(Term a, Term b);
Term tmod(Term a, Term b);
Term neg(Term a);
Term eq(Term a, Term b);
Term lt(Term a, Term b);
Term le(Term a, Term b);
Term gt(Term a, Term b);
Term ge(Term a, Term b);
Term lnot(Term a);
Term land(Term a, Term b);
Term lor(Term a, Term b);
Term implies(Term a, Term b);
Term land(const std::vector<Term>& ts);
Term ite(Term c, Term a, Term b);
Term select(Term arr, Term idx);
Term store(Term arr, Term idx, Term val);
Term const_array(SortPtr array_sort, Term value);
Term apply(const std::string& fn, std::vector<Term> args);

bool is_true(const Term& t);
bool is_false(const Term& t);
bool is_const(const Term& t);
// Nonlinear if any Mul/Div/Mod/TDiv/TMod has two non-constant operands.
bool is_nonlinear(const Term& t);

// Free variables and uninterpreted applications reachable from t.
void collect_vars(const Term& t, std::vector<Term>& out, TermSet& seen);
void collect_applies(const Term& t, std::vector<Term>& out, TermSet& seen);

// Substitutes variables by name.
Term substitute(const Term& t, const std::function<Term(const TermNode&)>& fn);

std::string to_string(const Term& t);  // SMT-LIB-like rendering

}  // namespace ppgpt::sym
