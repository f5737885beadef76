#include "ppgpt/symexec/term.hpp"

#include <functional>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace ppgpt::sym {

SortPtr int_sort() {
  static const SortPtr s = std::make_shared<Sort>(Sort{SortKind::Int, nullptr});
  return s;
}

SortPtr bool_sort() {
  static const SortPtr s = std::make_shared<Sort>(Sort{SortKind::Bool, nullptr});
  return s;
}

SortPtr array_sort(SortPtr element) { return std::make_shared<Sort>(Sort{SortKind::Array, std::move(element)}); }

bool same_sort(const Sort& a, const Sort& b) {
  if (a.kind != b.kind) return false;
  if (a.kind != SortKind::Array) return true;
  return same_sort(*a.element, *b.element);
}

std::string sort_string(const Sort& s) {
  switch (s.kind) {
    case SortKind::Int: return "Int";
    case SortKind::Bool: return "Bool";
    case SortKind::Array: return "(Array Int " + sort_string(*s.element) + ")";
  }
  return "?";
}

namespace {

void sort_error(const char* what) { throw std::logic_error(std::string("sort error: ") + what); }

size_t mix(size_t h, size_t v) { return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2)); }

Term make(Op op, SortPtr sort, std::vector<Term> args, std::string name = {}, BigInt value = 0, bool bval = false) {
  auto n = std::make_shared<TermNode>();
  n->op = op;
  n->sort = std::move(sort);
  n->args = std::move(args);
  n->name = std::move(name);
  n->value = std::move(value);
  n->bval = bval;
  size_t h = std::hash<int>()(static_cast<int>(op));
  h = mix(h, std::hash<std::string>()(n->name));
  if (op == Op::IntConst) h = mix(h, std::hash<std::string>()(n->value.str()));
  if (op == Op::BoolConst) h = mix(h, bval);
  if (op == Op::ConstArray || op == Op::Var) h = mix(h, std::hash<std::string>()(sort_string(*n->sort)));
  for (const auto& a : n->args) h = mix(h, a->hash);
  n->hash = h;
  return n;
}

void need_int(const Term& t, const char* what) {
  if (t->sort->kind != SortKind::Int) sort_error(what);
}

void need_bool(const Term& t, const char* what) {
  if (t->sort->kind != SortKind::Bool) sort_error(what);
}

bool both_const(const Term& a, const Term& b) { return a->op == Op::IntConst && b->op == Op::IntConst; }

BigInt euclid_div(const BigInt& a, const BigInt& b) {
  BigInt q = a / b;
  BigInt r = a - q * b;
  if (r < 0) q += b > 0 ? -1 : 1;
  return q;
}

BigInt euclid_mod(const BigInt& a, const BigInt& b) {
  BigInt r = a % b;
  if (r < 0) r += b > 0 ? b : -b;
  return r;
}

}  // namespace

bool equal(const Term& a, const Term& b) {
  if (a == b) return true;
  if (a->hash != b->hash || a->op != b->op || a->args.size() != b->args.size()) return false;
  if (a->name != b->name || a->value != b->value || a->bval != b->bval) return false;
  if (!same_sort(*a->sort, *b->sort)) return false;
  for (size_t i = 0; i < a->args.size(); ++i)
    if (!equal(a->args[i], b->args[i])) return false;
  return true;
}

Term var(const std::string& name, SortPtr sort) { return make(Op::Var, std::move(sort), {}, name); }

Term int_const(const BigInt& v) { return make(Op::IntConst, int_sort(), {}, {}, v); }

Term bool_const(bool v) {
  static const Term t = make(Op::BoolConst, bool_sort(), {}, {}, 0, true);
  static const Term f = make(Op::BoolConst, bool_sort(), {}, {}, 0, false);
  return v ? t : f;
}

bool is_true(const Term& t) { return t->op == Op::BoolConst && t->bval; }
bool is_false(const Term& t) { return t->op == Op::BoolConst && !t->bval; }
bool is_const(const Term& t) { return t->op == Op::IntConst || t->op == Op::BoolConst; }

Term add(Term a, Term b) {
  need_int(a, "add");
  need_int(b, "add");
  if (both_const(a, b)) return int_const(a->value + b->value);
  if (a->op == Op::IntConst && a->value == 0) return b;
  if (b->op == Op::IntConst && b->value == 0) return a;
  return make(Op::Add, int_sort(), {std::move(a), std::move(b)});
}

Term sub(Term a, Term b) {
  need_int(a, "sub");
  need_int(b, "sub");
  if (both_const(a, b)) return int_const(a->value - b->value);
  if (b->op == Op::IntConst && b->value == 0) return a;
  if (equal(a, b)) return int_const(0);
  return make(Op::Sub, int_sort(), {std::move(a), std::move(b)});
}

Term mul(Term a, Term b) {
  need_int(a, "mul");
  need_int(b, "mul");
  if (both_const(a, b)) return int_const(a->value * b->value);
  for (const Term* c : {&a, &b}) {
    if ((*c)->op == Op::IntConst && (*c)->value == 0) return int_const(0);
  }
  if (a->op == Op::IntConst && a->value == 1) return b;
  if (b->op == Op::IntConst && b->value == 1) return a;
  return make(Op::Mul, int_sort(), {std::move(a), std::move(b)});
}

Term div(Term a, Term b) {
  need_int(a, "div");
  need_int(b, "div");
  if (both_const(a, b) && b->value != 0) return int_const(euclid_div(a->value, b->value));
  if (b->op == Op::IntConst && b->value == 1) return a;
  return make(Op::Div, int_sort(), {std::move(a), std::move(b)});
}

Term mod(Term a, Term b) {
  need_int(a, "mod");
  need_int(b, "mod");
  if (both_const(a, b) && b->value != 0) return int_const(euclid_mod(a->value, b->value));
  return make(Op::Mod, int_sort(), {std::move(a), std::move(b)});
}

Term tdiv(Term a, Term b) {
  need_int(a, "tdiv");
  need_int(b, "tdiv");
  if (both_const(a, b) && b->value != 0) return int_const(a->value / b->value);
  return make(Op::TDiv, int_sort(), {std::move(a), std::move(b)});
}

Term tmod(Term a, Term b) {
  need_int(a, "tmod");
  need_int(b, "tmod");
  if (both_const(a, b) && b->value != 0) return int_const(a->value % b->value);
  return make(Op::TMod, int_sort(), {std::move(a), std::move(b)});
}

Term neg(Term a) {
  need_int(a, "neg");
  if (a->op == Op::IntConst) return int_const(-a->value);
  if (a->op == Op::Neg) return a->args[0];
  return make(Op::Neg, int_sort(), {std::move(a)});
}

Term eq(Term a, Term b) {
  if (!same_sort(*a->sort, *b->sort)) sort_error("eq");
  if (equal(a, b)) return bool_const(true);
  if (both_const(a, b)) return bool_const(a->value == b->value);
  if (a->op == Op::BoolConst && b->op == Op::BoolConst) return bool_const(a->bval == b->bval);
  if (a->sort->kind == SortKind::Bool) {
    if (is_true(a)) return b;
    if (is_true(b)) return a;
    if (is_false(a)) return lnot(b);
    if (is_false(b)) return lnot(a);
  }
  return make(Op::Eq, bool_sort(), {std::move(a), std::move(b)});
}

Term lt(Term a, Term b) {
  need_int(a, "lt");
  need_int(b, "lt");
  if (both_const(a, b)) return bool_const(a->value < b->value);
  if (equal(a, b)) return bool_const(false);
  return make(Op::Lt, bool_sort(), {std::move(a), std::move(b)});
}

Term le(Term a, Term b) {
  need_int(a, "le");
  need_int(b, "le");
  if (both_const(a, b)) return bool_const(a->value <= b->value);
  if (equal(a, b)) return bool_const(true);
  return make(Op::Le, bool_sort(), {std::move(a), std::move(b)});
}

Term gt(Term a, Term b) { return lt(std::move(b), std::move(a)); }
Term ge(Term a, Term b) { return le(std::move(b), std::move(a)); }

Term lnot(Term a) {
  need_bool(a, "not");
  if (a->op == Op::BoolConst) return bool_const(!a->bval);
  if (a->op == Op::Not) return a->args[0];
  return make(Op::Not, bool_sort(), {std::move(a)});
}

Term land(Term a, Term b) {
  need_bool(a, "and");
  need_bool(b, "and");
  if (is_false(a) || is_false(b)) return bool_const(false);
  if (is_true(a)) return b;
  if (is_true(b)) return a;
  if (equal(a, b)) return a;
  return make(Op::And, bool_sort(), {std::move(a), std::move(b)});
}

Term lor(Term a, Term b) {
  need_bool(a, "or");
  need_bool(b, "or");
  if (is_true(a) || is_true(b)) return bool_const(true);
  if (is_false(a)) return b;
  if (is_false(b)) return a;
  if (equal(a, b)) return a;
  return make(Op::Or, bool_sort(), {std::move(a), std::move(b)});
}

Term implies(Term a, Term b) {
  need_bool(a, "=>");
  need_bool(b, "=>");
  if (is_false(a) || is_true(b)) return bool_const(true);
  if (is_true(a)) return b;
  return make(Op::Implies, bool_sort(), {std::move(a), std::move(b)});
}

Term land(const std::vector<Term>& ts) {
  Term acc = bool_const(true);
  for (const auto& t : ts) acc = land(acc, t);
  return acc;
}

Term ite(Term c, Term a, Term b) {
  need_bool(c, "ite");
  if (!same_sort(*a->sort, *b->sort)) sort_error("ite branches");
  if (is_true(c)) return a;
  if (is_false(c)) return b;
  if (equal(a, b)) return a;
  if (a->sort->kind == SortKind::Bool) {
    if (is_true(a) && is_false(b)) return c;
    if (is_false(a) && is_true(b)) return lnot(c);
  }
  SortPtr s = a->sort;
  return make(Op::Ite, s, {std::move(c), std::move(a), std::move(b)});
}

Term select(Term arr, Term idx) {
  if (arr->sort->kind != SortKind::Array) sort_error("select on non-array");
  need_int(idx, "select index");
  // read-over-write with constant indices
  Term cur = arr;
  while (cur->op == Op::Store) {
    const Term& i = cur->args[1];
    if (equal(i, idx)) return cur->args[2];
    if (both_const(i, idx)) {
      cur = cur->args[0];
      continue;
    }
    break;
  }
  if (cur->op == Op::ConstArray) return cur->args[0];
  return make(Op::Select, arr->sort->element, {cur, std::move(idx)});
}

Term store(Term arr, Term idx, Term val) {
  if (arr->sort->kind != SortKind::Array) sort_error("store on non-array");
  need_int(idx, "store index");
  if (!same_sort(*arr->sort->element, *val->sort)) sort_error("store value");
  SortPtr s = arr->sort;
  return make(Op::Store, s, {std::move(arr), std::move(idx), std::move(val)});
}

Term const_array(SortPtr sort, Term value) {
  if (sort->kind != SortKind::Array || !same_sort(*sort->element, *value->sort)) sort_error("const array");
  return make(Op::ConstArray, std::move(sort), {std::move(value)});
}

Term apply(const std::string& fn, std::vector<Term> args) {
  for (const auto& a : args) need_int(a, "apply argument");
  std::string name = fn + "_" + std::to_string(args.size());
  return make(Op::Apply, int_sort(), std::move(args), name);
}

bool is_nonlinear(const Term& t) {
  std::vector<const TermNode*> stack{t.get()};
  std::unordered_set<const TermNode*> seen;
  while (!stack.empty()) {
    const TermNode* n = stack.back();
    stack.pop_back();
    if (!seen.insert(n).second) continue;
    switch (n->op) {
      case Op::Mul:
        if (n->args[0]->op != Op::IntConst && n->args[1]->op != Op::IntConst) return true;
        break;
      case Op::Div: case Op::Mod: case Op::TDiv: case Op::TMod:
        if (n->args[1]->op != Op::IntConst) return true;
        break;
      default:
        break;
    }
    for (const auto& a : n->args) stack.push_back(a.get());
  }
  return false;
}

void collect_vars(const Term& t, std::vector<Term>& out, TermSet& seen) {
  if (t->op == Op::Var) {
    if (seen.insert(t).second) out.push_back(t);
    return;
  }
  for (const auto& a : t->args) collect_vars(a, out, seen);
}

void collect_applies(const Term& t, std::vector<Term>& out, TermSet& seen) {
  for (const auto& a : t->args) collect_applies(a, out, seen);
  if (t->op == Op::Apply && seen.insert(t).second) out.push_back(t);
}

Term substitute(const Term& t, const std::function<Term(const TermNode&)>& fn) {
  if (t->op == Op::Var) {
    Term r = fn(*t);
    return r ? r : t;
  }
  if (t->args.empty()) return t;
  std::vector<Term> args;
  bool changed = false;
  for (const auto& a : t->args) {
    args.push_back(substitute(a, fn));
    changed = changed || args.back() != a;
  }
  if (!changed) return t;
  switch (t->op) {
    case Op::Add: return add(args[0], args[1]);
    case Op::Sub: return sub(args[0], args[1]);
    case Op::Mul: return mul(args[0], args[1]);
    case Op::Div: return div(args[0], args[1]);
    case Op::Mod: return mod(args[0], args[1]);
    case Op::TDiv: return tdiv(args[0], args[1]);
    case Op::TMod: return tmod(args[0], args[1]);
    case Op::Neg: return neg(args[0]);
    case Op::Eq: return eq(args[0], args[1]);
    case Op::Lt: return lt(args[0], args[1]);
    case Op::Le: return le(args[0], args[1]);
    case Op::Not: return lnot(args[0]);
    case Op::And: return land(args[0], args[1]);
    case Op::Or: return lor(args[0], args[1]);
    case Op::Implies: return implies(args[0], args[1]);
    case Op::Ite: return ite(args[0], args[1], args[2]);
    case Op::Select: return select(args[0], args[1]);
    case Op::Store: return store(args[0], args[1], args[2]);
    case Op::ConstArray: return const_array(t->sort, args[0]);
    case Op::Apply: {
      auto n = std::make_shared<TermNode>(*t);
      n->args = args;
      size_t h = std::hash<int>()(static_cast<int>(Op::Apply));
      h = mix(h, std::hash<std::string>()(n->name));
      for (const auto& a : n->args) h = mix(h, a->hash);
      n->hash = h;
      return n;
    }
    default: return t;
  }
}

namespace {

void render(std::ostream& os, const Term& t) {
  auto nary = [&](const char* op) {
    os << "(" << op;
    for (const auto& a : t->args) {
      os << " ";
      render(os, a);
    }
    os << ")";
  };
  switch (t->op) {
    case Op::Var: os << t->name; break;
    case Op::IntConst:
      if (t->value < 0)
        os << "(- " << BigInt(-t->value).str() << ")";
      else
        os << t->value.str();
      break;
    case Op::BoolConst: os << (t->bval ? "true" : "false"); break;
    case Op::Add: nary("+"); break;
    case Op::Sub: nary("-"); break;
    case Op::Mul: nary("*"); break;
    case Op::Div: nary("div"); break;
    case Op::Mod: nary("mod"); break;
    case Op::TDiv: nary("tdiv"); break;
    case Op::TMod: nary("tmod"); break;
    case Op::Neg: nary("-"); break;
    case Op::Eq: nary("="); break;
    case Op::Lt: nary("<"); break;
    case Op::Le: nary("<="); break;
    case Op::Not: nary("not"); break;
    case Op::And: nary("and"); break;
    case Op::Or: nary("or"); break;
    case Op::Implies: nary("=>"); break;
    case Op::Ite: nary("ite"); break;
    case Op::Select: nary("select"); break;
    case Op::Store: nary("store"); break;
    case Op::ConstArray:
      os << "((as const " << sort_string(*t->sort) << ") ";
      render(os, t->args[0]);
      os << ")";
      break;
    case Op::Apply: nary(t->name.c_str()); break;
  }
}

}  // namespace

std::string to_string(const Term& t) {
  std::ostringstream os;
  render(os, t);
  return os.str();
}

}  // namespace ppgpt::sym
