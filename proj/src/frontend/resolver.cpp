#include "ppgpt/frontend/resolver.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "ppgpt/frontend/parser.hpp"

namespace ppgpt::frontend {

std::string FunctionInfo::signature() const {
  std::string s = def->name + "(";
  for (size_t i = 0; i < param_types.size(); ++i) {
    if (i) s += ",";
    s += param_types[i] ? type_string(*param_types[i]) : "?";
  }
  return s + ")";
}

bool ContractInfo::derives_from(const ContractInfo* other) const {
  return std::find(linearization.begin(), linearization.end(), other) != linearization.end();
}

const FunctionInfo* ContractInfo::constructor() const {
  for (const auto& f : own_functions)
    if (f->def->kind == FunctionKind::Constructor) return f.get();
  return nullptr;
}

const StateVarInfo* ContractInfo::state_var(const std::string& n) const {
  for (const auto* v : state_vars)
    if (v->name == n) return v;
  return nullptr;
}

// ---- ResolvedProgram -------------------------------------------------------

const ContractInfo* ResolvedProgram::contract(const std::string& name) const {
  auto it = core_->by_name.find(name);
  return it == core_->by_name.end() ? nullptr : it->second;
}

const StructInfo* ResolvedProgram::struct_info(const std::string& name) const {
  auto it = core_->structs.find(name);
  return it == core_->structs.end() ? nullptr : &it->second;
}

const ExprInfo* ResolvedProgram::info(const Expr& e) const {
  auto it = core_->exprs.find(&e);
  return it == core_->exprs.end() ? nullptr : &it->second;
}

TypePtr ResolvedProgram::type_of(const TypeName& t) const {
  auto it = core_->type_names.find(&t);
  return it == core_->type_names.end() ? nullptr : it->second;
}

namespace {

const FunctionInfo* find_in(const ContractInfo& c, const std::string& name, size_t arity, bool need_body) {
  for (const auto& f : c.own_functions) {
    if (f->def->kind != FunctionKind::Function || f->def->name != name || f->arity() != arity) continue;
    if (need_body && !f->def->body) continue;
    return f.get();
  }
  return nullptr;
}

}  // namespace

const FunctionInfo* ResolvedProgram::dispatch(const ContractInfo& c, const std::string& name, size_t arity) const {
  for (const auto* base : c.linearization)
    if (const auto* f = find_in(*base, name, arity, true)) return f;
  for (const auto* base : c.linearization)
    if (const auto* f = find_in(*base, name, arity, false)) return f;
  return nullptr;
}

const FunctionInfo* ResolvedProgram::super_dispatch(const ContractInfo& c, const ContractInfo& from,
                                                    const std::string& name, size_t arity) const {
  auto it = std::find(c.linearization.begin(), c.linearization.end(), &from);
  if (it == c.linearization.end()) return nullptr;
  for (++it; it != c.linearization.end(); ++it)
    if (const auto* f = find_in(**it, name, arity, true)) return f;
  return nullptr;
}

const FunctionInfo* ResolvedProgram::modifier(const ContractInfo& c, const std::string& name) const {
  for (const auto* base : c.linearization)
    for (const auto& m : base->own_modifiers)
      if (m->def->name == name && m->def->body) return m.get();
  return nullptr;
}

std::vector<const FunctionInfo*> ResolvedProgram::public_functions(const ContractInfo& c) const {
  std::vector<const FunctionInfo*> out;
  std::set<std::pair<std::string, size_t>> seen;
  for (auto it = c.linearization.rbegin(); it != c.linearization.rend(); ++it) {
    for (const auto& f : (*it)->own_functions) {
      if (!f->def->is_public_entry()) continue;
      if (!seen.insert({f->def->name, f->arity()}).second) continue;
      const auto* impl = dispatch(c, f->def->name, f->arity());
      if (impl && impl->def->body && impl->def->is_public_entry()) out.push_back(impl);
    }
  }
  return out;
}

std::vector<const FunctionInfo*> ResolvedProgram::functions_named(const ContractInfo& c, const std::string& name) const {
  std::vector<const FunctionInfo*> out;
  std::set<size_t> arities;
  for (auto it = c.linearization.rbegin(); it != c.linearization.rend(); ++it)
    for (const auto& f : (*it)->own_functions)
      if (f->def->kind == FunctionKind::Function && f->def->name == name && arities.insert(f->arity()).second)
        out.push_back(dispatch(c, name, f->arity()));
  return out;
}

const ExprInfo* ResolvedSpec::info(const Expr& e) const {
  auto it = exprs.find(&e);
  if (it != exprs.end()) return &it->second;
  auto jt = core->exprs.find(&e);
  return jt == core->exprs.end() ? nullptr : &jt->second;
}

TypePtr ResolvedSpec::type_of(const TypeName& t) const {
  auto it = type_names.find(&t);
  if (it != type_names.end()) return it->second;
  auto jt = core->type_names.find(&t);
  return jt == core->type_names.end() ? nullptr : jt->second;
}

// ---- resolution ------------------------------------------------------------

namespace {

enum class Mode { Code, Invariant, Pre, Post, Rule };

bool is_condition(Mode m) { return m == Mode::Invariant || m == Mode::Pre || m == Mode::Post; }

struct Local {
  TypePtr type;
  DataLocation location = DataLocation::Default;
};

struct Ctx {
  Mode mode = Mode::Code;
  const SourceFile* src = nullptr;
  const ContractInfo* contract = nullptr;
  const FunctionInfo* function = nullptr;  // enclosing function or modifier
  bool in_old = false;
  bool in_emit = false;
  int loops = 0;
  std::vector<std::map<std::string, Local>> frames;

  const Local* lookup(const std::string& n) const {
    for (auto it = frames.rbegin(); it != frames.rend(); ++it) {
      auto f = it->find(n);
      if (f != it->end()) return &f->second;
    }
    return nullptr;
  }
};

class Resolver {
 public:
  Resolver(const ProgramCore& core, ExprTable& exprs, std::unordered_map<const TypeName*, TypePtr>& type_names,
           std::vector<Diagnostic>& diags)
      : core_(core), exprs_(exprs), type_names_(type_names), diags_(diags) {}

  void error(const Ctx& c, Span span, const char* code, std::string msg) {
    diags_.push_back(make_diagnostic(*c.src, span, code, std::move(msg)));
  }

  // ---- types ----

  TypePtr resolve_type(const TypeName& t, Ctx& c) {
    TypePtr out;
    switch (t.kind) {
      case TypeNameKind::Elementary: out = elementary(t.name, t.payable); break;
      case TypeNameKind::UserDefined:
        if (core_.structs.count(t.name)) {
          out = types::struct_t(t.name);
        } else if (core_.by_name.count(t.name)) {
          out = types::contract_t(t.name);
        } else {
          error(c, t.span, codes::kUndeclared, "undeclared type '" + t.name + "'");
          return nullptr;
        }
        break;
      case TypeNameKind::Mapping: {
        auto k = resolve_type(*t.key, c);
        auto v = resolve_type(*t.element, c);
        if (!k || !v) return nullptr;
        if (!k->is_value()) {
          error(c, t.key->span, codes::kTypeMismatch, "mapping keys must be value types");
          return nullptr;
        }
        out = types::mapping(k, v);
        break;
      }
      case TypeNameKind::Array: {
        auto e = resolve_type(*t.element, c);
        if (!e) return nullptr;
        out = types::array(e);
        break;
      }
    }
    type_names_[&t] = out;
    return out;
  }

  static TypePtr elementary(const std::string& raw, bool payable) {
    std::string n = canonical_type_name(raw);
    if (n == "bool") return types::bool_t();
    if (n == "address") return types::address_t(payable);
    if (n == "string") return types::string_t();
    if (n == "bytes") return types::bytes_t();
    if (n.rfind("uint", 0) == 0) return types::uint_t(static_cast<unsigned>(std::stoul(n.substr(4))));
    if (n.rfind("int", 0) == 0) return types::int_t(static_cast<unsigned>(std::stoul(n.substr(3))));
    if (n.rfind("bytes", 0) == 0) return types::fixed_bytes(static_cast<unsigned>(std::stoul(n.substr(5))));
    return nullptr;
  }

  // ---- helpers ----

  ExprInfo& rec(const Expr& e) { return exprs_[&e]; }

  TypePtr set(const Expr& e, TypePtr t) {
    rec(e).type = t;
    return t;
  }

  const ExprInfo* info(const Expr& e) const {
    auto it = exprs_.find(&e);
    return it == exprs_.end() ? nullptr : &it->second;
  }

  // Checks that an expression of type `from` can be used where `to` is expected.
  bool expect_convertible(Ctx& c, const Expr& e, const TypePtr& from, const TypePtr& to, const char* what) {
    if (!from || !to) return false;
    if (!implicitly_convertible(*from, *to)) {
      error(c, e.span, codes::kTypeMismatch,
            std::string("type mismatch in ") + what + ": expected " + type_string(*to) + ", found " +
                type_string(*from));
      return false;
    }
    if (from->kind == TypeKind::IntLiteral) {
      const auto* i = info(e);
      if (i && i->constant && to->is_value() && to->kind != TypeKind::String) {
        BigInt lo = type_min(*to), hi = type_max(*to);
        if (*i->constant < lo || (hi >= 0 && *i->constant > hi)) {
          error(c, e.span, codes::kTypeMismatch,
                "literal " + i->constant->str() + " does not fit in " + type_string(*to));
          return false;
        }
      }
    }
    return true;
  }

  bool expect_bool(Ctx& c, const Expr& e, const TypePtr& t, const std::string& what) {
    if (!t) return false;
    if (t->kind != TypeKind::Bool) {
      error(c, e.span, codes::kTypeMismatch, what + " must be bool, found " + type_string(*t));
      return false;
    }
    return true;
  }

  // Common type of two integer operands; null (with a diagnostic) when they do not mix.
  TypePtr common_integer(Ctx& c, const Expr& e, const TypePtr& l, const TypePtr& r) {
    if (l->kind == TypeKind::IntLiteral) return r;
    if (r->kind == TypeKind::IntLiteral) return l;
    if (l->kind == r->kind) return l->bits >= r->bits ? l : r;
    error(c, e.span, codes::kTypeMismatch,
          "operator " + e.name + " not compatible with " + type_string(*l) + " and " + type_string(*r));
    return nullptr;
  }

  static std::optional<BigInt> fold(const std::string& op, const BigInt& a, const BigInt& b) {
    if (op == "+") return a + b;
    if (op == "-") return a - b;
    if (op == "*") return a * b;
    if (op == "/") return b == 0 ? std::nullopt : std::optional<BigInt>(a / b);
    if (op == "%") return b == 0 ? std::nullopt : std::optional<BigInt>(a % b);
    if (op == "**") {
      if (b < 0 || b > 4096) return std::nullopt;
      return boost::multiprecision::pow(a, static_cast<unsigned>(b));
    }
    return std::nullopt;
  }

  const Expr* state_root(const Expr& e) const {
    const Expr* cur = &e;
    while (cur->kind == ExprKind::Index || cur->kind == ExprKind::Member) cur = cur->operands[0].get();
    if (cur->kind != ExprKind::Identifier) return nullptr;
    const auto* i = info(*cur);
    return i && i->ref == RefKind::StateVar ? cur : nullptr;
  }

  // ---- expressions ----

  TypePtr expr(const Expr& e, Ctx& c) {
    switch (e.kind) {
      case ExprKind::Number: {
        auto& r = rec(e);
        r.type = types::int_literal();
        r.constant = e.number;
        return r.type;
      }
      case ExprKind::Bool: return set(e, types::bool_t());
      case ExprKind::String: return set(e, types::string_literal());
      case ExprKind::Identifier: return identifier(e, c);
      case ExprKind::Unary: return unary(e, c);
      case ExprKind::Binary: return binary(e, c);
      case ExprKind::Assign: return assign(e, c);
      case ExprKind::Ternary: {
        auto ct = expr(*e.operands[0], c);
        auto a = expr(*e.operands[1], c);
        auto b = expr(*e.operands[2], c);
        if (ct) expect_bool(c, *e.operands[0], ct, "condition of ?:");
        if (!a || !b) return nullptr;
        if (a->is_integer() && b->is_integer()) {
          auto t = common_integer(c, e, a, b);
          return set(e, t);
        }
        if (implicitly_convertible(*b, *a)) return set(e, a);
        if (implicitly_convertible(*a, *b)) return set(e, b);
        error(c, e.span, codes::kTypeMismatch, "branches of ?: have incompatible types");
        return nullptr;
      }
      case ExprKind::Index: return index(e, c);
      case ExprKind::Member: return member(e, c, false);
      case ExprKind::Call: return call(e, c);
      case ExprKind::Old: return old(e, c);
      case ExprKind::New: {
        auto t = resolve_type(*e.type_name, c);
        if (e.operands.size() != 1) {
          error(c, e.span, codes::kArgumentCount, "new array expects exactly one length argument");
          return nullptr;
        }
        auto n = expr(*e.operands[0], c);
        if (n && !n->is_integer()) error(c, e.operands[0]->span, codes::kTypeMismatch, "array length must be an integer");
        if (t && t->kind != TypeKind::Array) {
          error(c, e.span, codes::kUnsupported, "only dynamic arrays can be created with new");
          return nullptr;
        }
        return set(e, t);
      }
      case ExprKind::ElementaryType:
        error(c, e.span, codes::kSyntax, "type name used as a value");
        return nullptr;
      case ExprKind::Tuple: {
        std::vector<TypePtr> ms;
        bool ok = true;
        bool lv = true;
        for (const auto& o : e.operands) {
          if (!o) {
            ms.push_back(nullptr);
            continue;
          }
          auto t = expr(*o, c);
          if (!t) ok = false;
          const auto* oi = info(*o);
          lv = lv && oi && oi->lvalue;
          ms.push_back(t);
        }
        if (!ok) return nullptr;
        auto& r = rec(e);
        r.type = types::tuple(std::move(ms));
        r.lvalue = lv;
        return r.type;
      }
    }
    return nullptr;
  }

  TypePtr identifier(const Expr& e, Ctx& c) {
    const std::string& n = e.name;
    auto& r = rec(e);
    if (const Local* l = c.lookup(n)) {
      r.ref = RefKind::Local;
      r.type = l->type;
      r.lvalue = true;
      return r.type;
    }
    if (n[0] == '$' && c.mode != Mode::Rule) {
      error(c, e.span, codes::kSymbolicOutsideRule, "symbolic variable '" + n + "' is only allowed in rules");
      return nullptr;
    }
    if (c.contract) {
      if (const auto* v = c.contract->state_var(n)) {
        r.ref = RefKind::StateVar;
        r.var = v;
        r.type = v->type;
        r.lvalue = !v->def->constant && !v->def->immutable;
        if (v->def->constant && v->def->init) {
          if (const auto* ii = info(*v->def->init)) r.constant = ii->constant;
        }
        return r.type;
      }
      if (c.mode == Mode::Rule && n[0] == '$') {
        if (const auto* v = c.contract->state_var(n.substr(1))) {
          r.ref = RefKind::SymbolicAlias;
          r.var = v;
          r.type = v->type;
          return r.type;
        }
      }
    }
    static const std::set<std::string> magic = {"msg", "block", "tx", "abi", "this", "super"};
    if (magic.count(n)) {
      if (n == "this" && c.mode != Mode::Code) {
        error(c, e.span, codes::kUndeclared, "'this' is not available in specifications");
        return nullptr;
      }
      r.ref = RefKind::Magic;
      r.builtin = n;
      r.type = n == "this" && c.contract ? types::contract_t(c.contract->name) : types::void_t();
      return r.type;
    }
    if (c.contract && has_function(*c.contract, n)) {
      error(c, e.span, codes::kUnsupported, "function '" + n + "' used as a value");
      return nullptr;
    }
    error(c, e.span, codes::kUndeclared, "undeclared identifier '" + n + "'");
    return nullptr;
  }

  static bool has_function(const ContractInfo& c, const std::string& n) {
    for (const auto* b : c.linearization)
      for (const auto& f : b->own_functions)
        if (f->def->kind == FunctionKind::Function && f->def->name == n) return true;
    return false;
  }

  TypePtr unary(const Expr& e, Ctx& c) {
    const Expr& o = *e.operands[0];
    auto t = expr(o, c);
    if (!t) return nullptr;
    const auto* oi = info(o);
    const std::string& op = e.name;
    if (op == "!") {
      if (!expect_bool(c, o, t, "operand of '!'")) return nullptr;
      return set(e, t);
    }
    if (op == "-") {
      if (!t->is_integer() || t->kind == TypeKind::Uint) {
        error(c, e.span, codes::kTypeMismatch, "unary '-' is not allowed on " + type_string(*t));
        return nullptr;
      }
      auto& r = rec(e);
      r.type = t;
      if (oi && oi->constant) r.constant = -*oi->constant;
      return t;
    }
    if (op == "~") {
      error(c, e.span, codes::kUnsupported, "bitwise operator '~' is not supported");
      return nullptr;
    }
    if (op == "delete") {
      if (!oi || !oi->lvalue) {
        error(c, o.span, codes::kTypeMismatch, "expression is not assignable");
        return nullptr;
      }
      return set(e, types::void_t());
    }
    // ++ / --
    if (!t->is_integer()) {
      error(c, e.span, codes::kTypeMismatch, "operator " + op + " requires an integer operand");
      return nullptr;
    }
    if (!oi || !oi->lvalue) {
      error(c, o.span, codes::kTypeMismatch, "expression is not assignable");
      return nullptr;
    }
    return set(e, t);
  }

  TypePtr binary(const Expr& e, Ctx& c) {
    const Expr& lhs = *e.operands[0];
    const Expr& rhs = *e.operands[1];
    auto l = expr(lhs, c);
    auto r = expr(rhs, c);
    if (!l || !r) return nullptr;
    const std::string& op = e.name;
    if (op == "&&" || op == "||") {
      bool ok = expect_bool(c, lhs, l, "operand of '" + op + "'");
      ok = expect_bool(c, rhs, r, "operand of '" + op + "'") && ok;
      return ok ? set(e, types::bool_t()) : nullptr;
    }
    if (op == "&" && l->kind == TypeKind::Bool && r->kind == TypeKind::Bool) return set(e, types::bool_t());
    if (op == "&" || op == "|" || op == "^" || op == "<<" || op == ">>") {
      error(c, e.span, codes::kUnsupported, "bitwise operator '" + op + "' is not supported");
      return nullptr;
    }
    if (op == "==" || op == "!=") {
      if (l->is_integer() && r->is_integer()) {
        if (!common_integer(c, e, l, r)) return nullptr;
      } else if (!implicitly_convertible(*l, *r) && !implicitly_convertible(*r, *l)) {
        error(c, e.span, codes::kTypeMismatch,
              "operator " + op + " not compatible with " + type_string(*l) + " and " + type_string(*r));
        return nullptr;
      } else if (!l->is_value() || !r->is_value()) {
        error(c, e.span, codes::kTypeMismatch, "operator " + op + " requires value types");
        return nullptr;
      }
      return set(e, types::bool_t());
    }
    if (op == "<" || op == ">" || op == "<=" || op == ">=") {
      if (l->is_integer() && r->is_integer()) {
        if (!common_integer(c, e, l, r)) return nullptr;
        return set(e, types::bool_t());
      }
      bool addr = (l->kind == TypeKind::Address || l->kind == TypeKind::IntLiteral) &&
                  (r->kind == TypeKind::Address || r->kind == TypeKind::IntLiteral);
      bool fb = (l->kind == TypeKind::FixedBytes || l->kind == TypeKind::IntLiteral) &&
                (r->kind == TypeKind::FixedBytes || r->kind == TypeKind::IntLiteral);
      if (addr || fb) return set(e, types::bool_t());
      error(c, e.span, codes::kTypeMismatch,
            "operator " + op + " not compatible with " + type_string(*l) + " and " + type_string(*r));
      return nullptr;
    }
    // arithmetic
    if (!l->is_integer() || !r->is_integer()) {
      error(c, e.span, codes::kTypeMismatch,
            "operator " + op + " not compatible with " + type_string(*l) + " and " + type_string(*r));
      return nullptr;
    }
    if (op == "**") {
      const auto* ri = info(rhs);
      if (!ri || !ri->constant || *ri->constant < 0 || *ri->constant > 256) {
        error(c, rhs.span, codes::kUnsupported, "exponent must be a constant between 0 and 256");
        return nullptr;
      }
      auto& rr = rec(e);
      rr.type = l;
      const auto* li = info(lhs);
      if (li && li->constant) rr.constant = fold(op, *li->constant, *ri->constant);
      return l;
    }
    auto t = common_integer(c, e, l, r);
    if (!t) return nullptr;
    auto& rr = rec(e);
    rr.type = t;
    const auto* li = info(lhs);
    const auto* ri = info(rhs);
    if (t->kind == TypeKind::IntLiteral && li && ri && li->constant && ri->constant)
      rr.constant = fold(op, *li->constant, *ri->constant);
    return t;
  }

  TypePtr assign(const Expr& e, Ctx& c) {
    const Expr& lhs = *e.operands[0];
    const Expr& rhs = *e.operands[1];
    auto r = expr(rhs, c);
    auto l = expr(lhs, c);
    if (!l || !r) return nullptr;
    const auto* li = info(lhs);
    if (!li || !li->lvalue) {
      error(c, lhs.span, codes::kTypeMismatch, "expression is not assignable");
      return nullptr;
    }
    if (e.name == "=") {
      if (l->kind == TypeKind::Tuple) {
        if (r->kind != TypeKind::Tuple || r->members.size() != l->members.size()) {
          error(c, e.span, codes::kTypeMismatch, "tuple assignment with mismatched component count");
          return nullptr;
        }
        for (size_t i = 0; i < l->members.size(); ++i) {
          if (!l->members[i] || !r->members[i]) continue;
          if (!implicitly_convertible(*r->members[i], *l->members[i])) {
            error(c, e.span, codes::kTypeMismatch, "type mismatch in tuple assignment");
            return nullptr;
          }
        }
        return set(e, l);
      }
      if (l->kind == TypeKind::Mapping) {
        error(c, e.span, codes::kTypeMismatch, "mappings cannot be assigned");
        return nullptr;
      }
      if (!expect_convertible(c, rhs, r, l, "assignment")) return nullptr;
      return set(e, l);
    }
    std::string op = e.name.substr(0, e.name.size() - 1);
    if (op != "+" && op != "-" && op != "*" && op != "/" && op != "%") {
      error(c, e.span, codes::kUnsupported, "compound operator '" + e.name + "' is not supported");
      return nullptr;
    }
    if (!l->is_integer() || !r->is_integer()) {
      error(c, e.span, codes::kTypeMismatch, "operator " + e.name + " requires integer operands");
      return nullptr;
    }
    if (!expect_convertible(c, rhs, r, l, "assignment")) return nullptr;
    return set(e, l);
  }

  TypePtr index(const Expr& e, Ctx& c) {
    auto b = expr(*e.operands[0], c);
    auto k = expr(*e.operands[1], c);
    if (!b || !k) return nullptr;
    auto& r = rec(e);
    if (b->kind == TypeKind::Mapping) {
      if (!expect_convertible(c, *e.operands[1], k, b->key, "mapping key")) return nullptr;
      rec(e).type = b->element;
      rec(e).lvalue = true;
      return b->element;
    }
    if (b->kind == TypeKind::Array) {
      if (!k->is_integer()) {
        error(c, e.operands[1]->span, codes::kTypeMismatch, "array index must be an integer");
        return nullptr;
      }
      r.type = b->element;
      r.lvalue = true;
      return r.type;
    }
    error(c, e.span, codes::kTypeMismatch, "type " + type_string(*b) + " is not indexable");
    return nullptr;
  }

  TypePtr member(const Expr& e, Ctx& c, bool as_callee) {
    const Expr& base = *e.operands[0];
    auto bt = expr(base, c);
    if (!bt) return nullptr;
    const auto* bi = info(base);
    const std::string& m = e.name;
    auto& r = rec(e);
    if (bi && bi->ref == RefKind::Magic) {
      const std::string& w = bi->builtin;
      if ((w == "msg" && (m == "sender" || m == "value")) || (w == "block" && (m == "timestamp" || m == "number")) ||
          (w == "tx" && m == "origin")) {
        r.member = MemberKind::Env;
        r.builtin = w + "." + m;
        r.type = (m == "sender" || m == "origin") ? types::address_t(true) : types::uint_t();
        return r.type;
      }
      if (as_callee && (w == "abi" || w == "super")) return types::void_t();  // resolved by call()
      if (w == "this" && m == "balance") {
        r.member = MemberKind::Balance;
        r.type = types::uint_t();
        return r.type;
      }
      error(c, e.span, codes::kUnknownMember, "unknown member '" + m + "' of '" + w + "'");
      return nullptr;
    }
    switch (bt->kind) {
      case TypeKind::Struct: {
        auto it = core_.structs.find(bt->name);
        TypePtr ft = it == core_.structs.end() ? nullptr : it->second.field(m);
        if (!ft) {
          error(c, e.span, codes::kUnknownMember, "struct " + bt->name + " has no member '" + m + "'");
          return nullptr;
        }
        r.member = MemberKind::Field;
        r.type = ft;
        r.lvalue = true;
        return ft;
      }
      case TypeKind::Array:
        if (m == "length") {
          r.member = MemberKind::Length;
          r.type = types::uint_t();
          return r.type;
        }
        if (as_callee && (m == "push" || m == "pop")) return types::void_t();
        break;
      case TypeKind::Address:
      case TypeKind::Contract:
        if (m == "balance") {
          r.member = MemberKind::Balance;
          r.type = types::uint_t();
          return r.type;
        }
        if (as_callee && (m == "call" || m == "transfer" || m == "send")) return types::void_t();
        if (as_callee && bt->kind == TypeKind::Contract) return types::void_t();
        break;
      default:
        break;
    }
    error(c, e.span, codes::kUnknownMember, "type " + type_string(*bt) + " has no member '" + m + "'");
    return nullptr;
  }

  TypePtr old(const Expr& e, Ctx& c) {
    if (c.mode != Mode::Pre && c.mode != Mode::Post) {
      error(c, e.span, codes::kInvalidOld, "old(...) is only allowed in preconditions and postconditions");
      return nullptr;
    }
    if (c.in_old) {
      error(c, e.span, codes::kInvalidOld, "old(...) cannot be nested");
      return nullptr;
    }
    c.in_old = true;
    auto t = expr(*e.operands[0], c);
    c.in_old = false;
    if (!t) return nullptr;
    if (!state_root(*e.operands[0])) {
      error(c, e.operands[0]->span, codes::kInvalidOld, "old(...) must wrap a state variable");
      return nullptr;
    }
    return set(e, t);
  }

  TypePtr returns_type(const FunctionInfo& f) {
    if (f.return_types.empty()) return types::void_t();
    if (f.return_types.size() == 1) return f.return_types[0];
    return types::tuple(f.return_types);
  }

  bool check_args(Ctx& c, const Expr& call_expr, const std::vector<TypePtr>& arg_types,
                  const std::vector<TypePtr>& params, const std::string& what) {
    size_t nargs = call_expr.operands.size() - 1;
    if (nargs != params.size()) {
      error(c, call_expr.span, codes::kArgumentCount,
            what + " expects " + std::to_string(params.size()) + " argument(s), got " + std::to_string(nargs));
      return false;
    }
    bool ok = true;
    for (size_t i = 0; i < nargs; ++i) {
      if (!arg_types[i] || !params[i]) {
        ok = false;
        continue;
      }
      ok = expect_convertible(c, *call_expr.operands[i + 1], arg_types[i], params[i], "argument") && ok;
    }
    return ok;
  }

  bool forbid_call_in_condition(Ctx& c, const Expr& e, const std::string& what) {
    if (!is_condition(c.mode)) return false;
    error(c, e.span, codes::kCallInCondition, "call to '" + what + "' is not permitted in conditions");
    return true;
  }

  const FunctionInfo* find_static(const ContractInfo& ct, const std::string& name, size_t arity, bool* name_found) {
    for (const auto* b : ct.linearization)
      for (const auto& f : b->own_functions)
        if (f->def->kind == FunctionKind::Function && f->def->name == name) {
          *name_found = true;
          if (f->arity() == arity) return f.get();
        }
    return nullptr;
  }

  TypePtr call(const Expr& e, Ctx& c) {
    const Expr& callee = *e.operands[0];
    size_t nargs = e.operands.size() - 1;
    auto& r = rec(e);
    auto resolve_args = [&]() {
      std::vector<TypePtr> ts;
      for (size_t i = 1; i < e.operands.size(); ++i) ts.push_back(expr(*e.operands[i], c));
      return ts;
    };
    auto resolve_options = [&](bool allowed) {
      for (const auto& o : e.options) {
        if (!allowed || o.name != "value") {
          error(c, e.span, codes::kUnsupported, "call option '" + o.name + "' is not supported here");
          continue;
        }
        auto t = expr(*o.value, c);
        if (t && !t->is_integer()) error(c, o.value->span, codes::kTypeMismatch, "call value must be an integer");
      }
    };

    if (callee.kind == ExprKind::ElementaryType) {
      resolve_options(false);
      auto target = elementary(callee.type_name->name, callee.type_name->payable);
      set(callee, target);
      auto args = resolve_args();
      if (nargs != 1) {
        error(c, e.span, codes::kArgumentCount, "type conversion expects exactly one argument");
        return nullptr;
      }
      if (!args[0] || !target) return nullptr;
      if (!explicit_convertible(*args[0], *target)) {
        error(c, e.span, codes::kTypeMismatch,
              "invalid conversion from " + type_string(*args[0]) + " to " + type_string(*target));
        return nullptr;
      }
      r.call = CallKind::Conversion;
      r.type = target;
      const auto* ai = info(*e.operands[1]);
      if (ai && ai->constant && target->is_integer()) r.constant = ai->constant;
      return target;
    }

    if (callee.kind == ExprKind::Identifier) {
      const std::string& n = callee.name;
      auto& ci = rec(callee);
      if (c.lookup(n) || (c.contract && c.contract->state_var(n))) {
        error(c, callee.span, codes::kTypeMismatch, "'" + n + "' is not callable");
        return nullptr;
      }
      if (c.contract) {
        bool name_found = false;
        const FunctionInfo* f = find_static(*c.contract, n, nargs, &name_found);
        if (name_found) {
          if (forbid_call_in_condition(c, e, n)) return nullptr;
          resolve_options(false);
          auto args = resolve_args();
          if (!f) {
            error(c, e.span, codes::kArgumentCount,
                  "no overload of '" + n + "' takes " + std::to_string(nargs) + " argument(s)");
            return nullptr;
          }
          ci.ref = RefKind::Function;
          ci.function = f;
          r.call = CallKind::Internal;
          r.function = f;
          check_args(c, e, args, f->param_types, "function '" + n + "'");
          r.type = returns_type(*f);
          return r.type;
        }
      }
      if (n == "require" || n == "assert" || n == "revert" || (n == "assume" && c.mode == Mode::Rule)) {
        if (forbid_call_in_condition(c, e, n)) return nullptr;
        resolve_options(false);
        auto args = resolve_args();
        ci.ref = RefKind::Builtin;
        ci.builtin = n;
        if (n == "revert") {
          r.call = CallKind::Revert;
          if (nargs > 1) error(c, e.span, codes::kArgumentCount, "revert expects at most one argument");
          return set(e, types::void_t());
        }
        r.call = n == "require" ? CallKind::Require : n == "assert" ? CallKind::Assert : CallKind::Assume;
        size_t max_args = n == "require" ? 2 : 1;
        if (nargs < 1 || nargs > max_args) {
          error(c, e.span, codes::kArgumentCount,
                n + " expects " + (max_args == 2 ? std::string("one or two arguments") : "one argument"));
          return nullptr;
        }
        // in rules the boolean check of assume/assert belongs to the spec checker
        if (args[0] && c.mode != Mode::Rule) expect_bool(c, *e.operands[1], args[0], "condition of " + n);
        if (nargs == 2 && args[1] && args[1]->kind != TypeKind::StringLiteral && args[1]->kind != TypeKind::String)
          error(c, e.operands[2]->span, codes::kTypeMismatch, "reason of require must be a string");
        return set(e, types::void_t());
      }
      if (n == "keccak256" || n == "sha3" || n == "sha256") {
        resolve_options(false);
        auto args = resolve_args();
        ci.ref = RefKind::Builtin;
        ci.builtin = n;
        r.call = CallKind::Hash;
        r.builtin = n;
        if (nargs == 0) {
          error(c, e.span, codes::kArgumentCount, n + " expects at least one argument");
          return nullptr;
        }
        for (size_t i = 0; i < args.size(); ++i)
          if (args[i] && !args[i]->is_value())
            error(c, e.operands[i + 1]->span, codes::kTypeMismatch, "hash arguments must be value types");
        return set(e, types::fixed_bytes(32));
      }
      if (c.contract) {
        for (const auto* b : c.contract->linearization)
          for (const auto& ev : b->def->events)
            if (ev.name == n) {
              auto args = resolve_args();
              if (!c.in_emit) {
                error(c, e.span, codes::kSyntax, "event '" + n + "' can only be used with emit");
                return nullptr;
              }
              ci.ref = RefKind::Event;
              r.call = CallKind::Event;
              std::vector<TypePtr> ps;
              Ctx tmp = c;
              for (const auto& p : ev.params) ps.push_back(lookup_type(p.type.get()));
              check_args(c, e, args, ps, "event '" + n + "'");
              return set(e, types::void_t());
            }
      }
      if (auto it = core_.structs.find(n); it != core_.structs.end()) {
        if (forbid_call_in_condition(c, e, n)) return nullptr;
        auto args = resolve_args();
        ci.ref = RefKind::StructType;
        r.call = CallKind::StructCtor;
        std::vector<TypePtr> ps;
        for (const auto& [fname, ft] : it->second.fields) ps.push_back(ft);
        check_args(c, e, args, ps, "struct constructor '" + n + "'");
        return set(e, types::struct_t(n));
      }
      if (core_.by_name.count(n)) {
        auto args = resolve_args();
        ci.ref = RefKind::ContractType;
        if (nargs != 1) {
          error(c, e.span, codes::kArgumentCount, "type conversion expects exactly one argument");
          return nullptr;
        }
        if (args[0] && args[0]->kind != TypeKind::Address && args[0]->kind != TypeKind::Contract &&
            args[0]->kind != TypeKind::IntLiteral) {
          error(c, e.span, codes::kTypeMismatch, "invalid conversion to contract " + n);
          return nullptr;
        }
        r.call = CallKind::Conversion;
        return set(e, types::contract_t(n));
      }
      if (n[0] == '$' && c.mode != Mode::Rule) {
        error(c, callee.span, codes::kSymbolicOutsideRule, "symbolic variable '" + n + "' is only allowed in rules");
        return nullptr;
      }
      resolve_args();
      error(c, callee.span, codes::kUndeclared, "undeclared identifier '" + n + "'");
      return nullptr;
    }

    if (callee.kind == ExprKind::Member) {
      const Expr& base = *callee.operands[0];
      const std::string& m = callee.name;
      // super.f(...) and abi.encode(...)
      if (base.kind == ExprKind::Identifier && (base.name == "super" || base.name == "abi") && !c.lookup(base.name)) {
        auto& bi = rec(base);
        bi.ref = RefKind::Magic;
        bi.builtin = base.name;
        bi.type = types::void_t();
        if (base.name == "abi") {
          resolve_options(false);
          auto args = resolve_args();
          if (m != "encode" && m != "encodePacked") {
            error(c, callee.span, codes::kUnknownMember, "unknown member '" + m + "' of 'abi'");
            return nullptr;
          }
          for (size_t i = 0; i < args.size(); ++i)
            if (args[i] && !args[i]->is_value())
              error(c, e.operands[i + 1]->span, codes::kTypeMismatch, "abi.encode arguments must be value types");
          r.call = CallKind::AbiEncode;
          r.builtin = m;
          set(callee, types::void_t());
          return set(e, types::bytes_t());
        }
        if (c.mode != Mode::Code || !c.function) {
          error(c, base.span, codes::kUndeclared, "'super' is only available inside contract functions");
          return nullptr;
        }
        resolve_options(false);
        auto args = resolve_args();
        const ContractInfo& owner = *c.function->owner;
        const FunctionInfo* target = nullptr;
        for (size_t i = 1; i < owner.linearization.size() && !target; ++i)
          target = find_in(*owner.linearization[i], m, nargs, true);
        if (!target) {
          error(c, callee.span, codes::kUnknownFunction, "no base implementation of '" + m + "' for super call");
          return nullptr;
        }
        r.call = CallKind::Super;
        r.function = target;
        set(callee, types::void_t());
        check_args(c, e, args, target->param_types, "function '" + m + "'");
        return set(e, returns_type(*target));
      }
      auto bt = member(callee, c, true);
      if (!bt) {
        resolve_args();
        return nullptr;
      }
      const auto* bti = info(base);
      TypePtr base_type = bti ? bti->type : nullptr;
      if (!base_type) return nullptr;
      if (base_type->kind == TypeKind::Array && (m == "push" || m == "pop")) {
        if (forbid_call_in_condition(c, e, m)) return nullptr;
        resolve_options(false);
        auto args = resolve_args();
        r.call = m == "push" ? CallKind::Push : CallKind::Pop;
        if (!bti->lvalue) error(c, base.span, codes::kTypeMismatch, "push/pop require an array variable");
        if (m == "push") {
          if (nargs > 1) {
            error(c, e.span, codes::kArgumentCount, "push expects at most one argument");
            return nullptr;
          }
          if (nargs == 1 && args[0]) expect_convertible(c, *e.operands[1], args[0], base_type->element, "push");
          return set(e, nargs == 0 ? base_type->element : types::void_t());
        }
        if (nargs != 0) error(c, e.span, codes::kArgumentCount, "pop expects no arguments");
        return set(e, types::void_t());
      }
      if (base_type->kind == TypeKind::Address || base_type->kind == TypeKind::Contract) {
        if (m == "call" || m == "transfer" || m == "send") {
          if (forbid_call_in_condition(c, e, m)) return nullptr;
          resolve_options(m == "call");
          auto args = resolve_args();
          if (m == "call") {
            if (nargs != 1) {
              error(c, e.span, codes::kArgumentCount, "call expects exactly one argument");
              return nullptr;
            }
            r.call = CallKind::LowLevel;
            return set(e, types::tuple({types::bool_t(), types::bytes_t()}));
          }
          if (nargs != 1) {
            error(c, e.span, codes::kArgumentCount, m + " expects exactly one argument");
            return nullptr;
          }
          if (args[0] && !args[0]->is_integer())
            error(c, e.operands[1]->span, codes::kTypeMismatch, "amount must be an integer");
          r.call = m == "transfer" ? CallKind::Transfer : CallKind::Send;
          return set(e, m == "transfer" ? types::void_t() : types::bool_t());
        }
        if (base_type->kind == TypeKind::Contract) {
          if (forbid_call_in_condition(c, e, m)) return nullptr;
          if (bti->ref == RefKind::Magic) {
            error(c, e.span, codes::kUnsupported, "calls through 'this' are not supported");
            return nullptr;
          }
          resolve_options(true);
          auto args = resolve_args();
          const ContractInfo* target = core_.by_name.at(base_type->name);
          const FunctionInfo* f = nullptr;
          for (const auto* b : target->linearization)
            for (const auto& fn : b->own_functions)
              if (!f && fn->def->kind == FunctionKind::Function && fn->def->name == m && fn->arity() == nargs) f = fn.get();
          if (!f) {
            error(c, callee.span, codes::kUnknownMember, "contract " + base_type->name + " has no function '" + m + "'");
            return nullptr;
          }
          r.call = CallKind::External;
          r.function = f;
          rec(callee).member = MemberKind::Function;
          check_args(c, e, args, f->param_types, "function '" + m + "'");
          return set(e, returns_type(*f));
        }
      }
      resolve_args();
      error(c, callee.span, codes::kUnknownMember, "type " + type_string(*base_type) + " has no callable member '" + m + "'");
      return nullptr;
    }
    resolve_args();
    error(c, callee.span, codes::kUnsupported, "unsupported call target");
    return nullptr;
  }

  TypePtr lookup_type(const TypeName* t) {
    auto it = type_names_.find(t);
    if (it != type_names_.end()) return it->second;
    auto jt = core_.type_names.find(t);
    return jt == core_.type_names.end() ? nullptr : jt->second;
  }

  static bool explicit_convertible(const Type& from, const Type& to) {
    if (implicitly_convertible(from, to)) return true;
    auto intlike = [](const Type& t) {
      return t.kind == TypeKind::Uint || t.kind == TypeKind::Int || t.kind == TypeKind::IntLiteral;
    };
    if (intlike(from) && intlike(to)) return true;
    if ((from.kind == TypeKind::Address || from.kind == TypeKind::Contract) &&
        (to.kind == TypeKind::Address || to.kind == TypeKind::Uint))
      return true;
    if (from.kind == TypeKind::Uint && to.kind == TypeKind::Address) return true;
    if (from.kind == TypeKind::FixedBytes && (to.kind == TypeKind::Uint || to.kind == TypeKind::FixedBytes)) return true;
    if (from.kind == TypeKind::Uint && to.kind == TypeKind::FixedBytes) return true;
    if (from.kind == TypeKind::String && to.kind == TypeKind::Bytes) return true;
    if (from.kind == TypeKind::Bytes && to.kind == TypeKind::String) return true;
    return false;
  }

  // ---- statements ----

  void declare(Ctx& c, const VarDecl& d, TypePtr t) {
    auto& frame = c.frames.back();
    if (frame.count(d.name)) {
      error(c, d.span, codes::kDuplicate, "identifier '" + d.name + "' already declared");
      return;
    }
    frame[d.name] = Local{std::move(t), d.location};
  }

  void stmt(const Stmt& s, Ctx& c) {
    switch (s.kind) {
      case StmtKind::Block:
      case StmtKind::Unchecked:
        c.frames.emplace_back();
        for (const auto& ch : s.children) stmt(*ch, c);
        c.frames.pop_back();
        break;
      case StmtKind::VarDecl: {
        TypePtr init = s.expr ? expr(*s.expr, c) : nullptr;
        if (s.decls.size() == 1 && s.decls[0]) {
          const auto& d = *s.decls[0];
          auto t = resolve_type(*d.type, c);
          if (t && init) expect_convertible(c, *s.expr, init, t, "declaration");
          if (t && t->kind == TypeKind::Mapping && d.location != DataLocation::Storage)
            error(c, d.span, codes::kTypeMismatch, "mapping locals must be storage pointers");
          if (t && t->is_reference() && d.location == DataLocation::Storage && !s.expr)
            error(c, d.span, codes::kTypeMismatch, "storage pointer '" + d.name + "' must be initialized");
          declare(c, d, t);
        } else {
          std::vector<TypePtr> ts;
          for (const auto& d : s.decls) ts.push_back(d ? resolve_type(*d->type, c) : nullptr);
          if (!s.expr) {
            error(c, s.span, codes::kSyntax, "tuple declaration requires an initializer");
          } else if (init) {
            if (init->kind != TypeKind::Tuple || init->members.size() != s.decls.size()) {
              error(c, s.span, codes::kTypeMismatch, "tuple declaration with mismatched component count");
            } else {
              for (size_t i = 0; i < ts.size(); ++i)
                if (ts[i] && init->members[i] && !implicitly_convertible(*init->members[i], *ts[i]))
                  error(c, s.decls[i]->span, codes::kTypeMismatch, "type mismatch in tuple declaration");
            }
          }
          for (size_t i = 0; i < s.decls.size(); ++i)
            if (s.decls[i]) declare(c, *s.decls[i], ts[i]);
        }
        break;
      }
      case StmtKind::Expr:
        expr(*s.expr, c);
        break;
      case StmtKind::If: {
        auto t = expr(*s.expr, c);
        if (t) expect_bool(c, *s.expr, t, "if condition");
        for (size_t i = 0; i < 2; ++i) {
          if (!s.children[i]) continue;
          c.frames.emplace_back();
          stmt(*s.children[i], c);
          c.frames.pop_back();
        }
        break;
      }
      case StmtKind::For: {
        c.frames.emplace_back();
        if (s.children[0]) stmt(*s.children[0], c);
        if (s.expr) {
          auto t = expr(*s.expr, c);
          if (t) expect_bool(c, *s.expr, t, "loop condition");
        }
        if (s.expr2) expr(*s.expr2, c);
        ++c.loops;
        c.frames.emplace_back();
        stmt(*s.children[1], c);
        c.frames.pop_back();
        --c.loops;
        c.frames.pop_back();
        break;
      }
      case StmtKind::While: {
        auto t = expr(*s.expr, c);
        if (t) expect_bool(c, *s.expr, t, "loop condition");
        ++c.loops;
        c.frames.emplace_back();
        stmt(*s.children[0], c);
        c.frames.pop_back();
        --c.loops;
        break;
      }
      case StmtKind::Return: {
        if (c.mode != Mode::Code || !c.function) {
          error(c, s.span, codes::kStatementForm, "return is only allowed inside functions");
          break;
        }
        if (c.function->def->kind == FunctionKind::Modifier) {
          if (s.expr) error(c, s.span, codes::kTypeMismatch, "modifiers cannot return values");
          break;
        }
        const auto& rts = c.function->return_types;
        if (!s.expr) break;
        auto t = expr(*s.expr, c);
        if (!t) break;
        if (rts.empty()) {
          error(c, s.span, codes::kTypeMismatch, "function has no return values");
        } else if (rts.size() == 1) {
          if (rts[0]) expect_convertible(c, *s.expr, t, rts[0], "return");
        } else if (t->kind != TypeKind::Tuple || t->members.size() != rts.size()) {
          error(c, s.span, codes::kTypeMismatch, "wrong number of return values");
        } else {
          for (size_t i = 0; i < rts.size(); ++i)
            if (rts[i] && t->members[i] && !implicitly_convertible(*t->members[i], *rts[i]))
              error(c, s.expr->operands[i]->span, codes::kTypeMismatch, "type mismatch in return");
        }
        break;
      }
      case StmtKind::Emit:
        if (s.expr->kind != ExprKind::Call || s.expr->operands[0]->kind != ExprKind::Identifier) {
          error(c, s.span, codes::kSyntax, "emit expects an event call");
          break;
        }
        c.in_emit = true;
        expr(*s.expr, c);
        c.in_emit = false;
        if (const auto* i = info(*s.expr); i && i->type && i->call != CallKind::Event)
          error(c, s.span, codes::kSyntax, "emit expects an event call");
        break;
      case StmtKind::Placeholder:
        if (!c.function || c.function->def->kind != FunctionKind::Modifier)
          error(c, s.span, codes::kSyntax, "'_' is only allowed inside modifiers");
        break;
      case StmtKind::Break:
      case StmtKind::Continue:
        if (c.loops == 0) error(c, s.span, codes::kSyntax, "break/continue outside of a loop");
        break;
    }
  }

 private:
  const ProgramCore& core_;
  ExprTable& exprs_;
  std::unordered_map<const TypeName*, TypePtr>& type_names_;
  std::vector<Diagnostic>& diags_;
};

// ---- contract-level passes -------------------------------------------------

std::optional<std::vector<const ContractInfo*>> c3_merge(std::vector<std::vector<const ContractInfo*>> seqs) {
  std::vector<const ContractInfo*> out;
  for (;;) {
    seqs.erase(std::remove_if(seqs.begin(), seqs.end(), [](const auto& s) { return s.empty(); }), seqs.end());
    if (seqs.empty()) return out;
    const ContractInfo* pick = nullptr;
    for (const auto& s : seqs) {
      const ContractInfo* cand = s.front();
      bool in_tail = false;
      for (const auto& t : seqs)
        if (std::find(t.begin() + 1, t.end(), cand) != t.end()) in_tail = true;
      if (!in_tail) {
        pick = cand;
        break;
      }
    }
    if (!pick) return std::nullopt;
    out.push_back(pick);
    for (auto& s : seqs)
      if (s.front() == pick) s.erase(s.begin());
  }
}

class ProgramBuilder {
 public:
  ProgramBuilder(ProgramCore& core, std::vector<Diagnostic>& diags) : core_(core), diags_(diags) {}

  void run(const ResolveOptions& opts) {
    declare_contracts();
    if (!linearize_all()) return;
    declare_structs();
    declare_members();
    check_overrides();
    resolve_bodies();
    pick_main(opts);
  }

 private:
  void error(const SourceFile& src, Span span, const char* code, std::string msg) {
    diags_.push_back(make_diagnostic(src, span, code, std::move(msg)));
  }

  void declare_contracts() {
    for (const auto& u : core_.units) {
      for (const auto& def : u->contracts) {
        if (core_.by_name.count(def.name)) {
          error(*u->source, def.name_span, codes::kDuplicate, "contract '" + def.name + "' already declared");
          continue;
        }
        auto ci = std::make_unique<ContractInfo>();
        ci->name = def.name;
        ci->def = &def;
        ci->source = u->source;
        core_.by_name[def.name] = ci.get();
        core_.contracts.push_back(std::move(ci));
      }
    }
  }

  bool linearize_all() {
    enum State { Unvisited, Visiting, Done };
    std::map<const ContractInfo*, State> st;
    bool ok = true;
    std::function<bool(ContractInfo*)> visit = [&](ContractInfo* c) -> bool {
      if (st[c] == Done) return !c->linearization.empty();
      if (st[c] == Visiting) {
        error(*c->source, c->def->name_span, codes::kInheritance, "cyclic inheritance involving '" + c->name + "'");
        return false;
      }
      st[c] = Visiting;
      std::vector<std::vector<const ContractInfo*>> seqs;
      std::vector<const ContractInfo*> direct;
      bool good = true;
      for (auto it = c->def->bases.rbegin(); it != c->def->bases.rend(); ++it) {
        auto f = core_.by_name.find(it->name);
        if (f == core_.by_name.end()) {
          error(*c->source, it->span, codes::kUndeclared, "undeclared base contract '" + it->name + "'");
          good = false;
          continue;
        }
        if (f->second == c || !visit(f->second)) {
          if (f->second == c)
            error(*c->source, it->span, codes::kInheritance, "contract '" + c->name + "' cannot inherit from itself");
          good = false;
          continue;
        }
        seqs.push_back(f->second->linearization);
        direct.push_back(f->second);
      }
      st[c] = Done;
      if (!good) return false;
      seqs.push_back(direct);
      auto merged = c3_merge(seqs);
      if (!merged) {
        error(*c->source, c->def->name_span, codes::kInheritance,
              "linearization of inheritance graph impossible for '" + c->name + "'");
        return false;
      }
      c->linearization.push_back(c);
      c->linearization.insert(c->linearization.end(), merged->begin(), merged->end());
      return true;
    };
    for (auto& c : core_.contracts) ok = visit(c.get()) && ok;
    return ok;
  }

  Ctx code_ctx(const ContractInfo& c) {
    Ctx ctx;
    ctx.mode = Mode::Code;
    ctx.src = c.source.get();
    ctx.contract = &c;
    return ctx;
  }

  void declare_structs() {
    for (auto& c : core_.contracts)
      for (const auto& s : c->def->structs) {
        if (core_.structs.count(s.name)) {
          error(*c->source, s.span, codes::kDuplicate, "struct '" + s.name + "' already declared");
          continue;
        }
        core_.structs[s.name] = StructInfo{s.name, &s, {}};
      }
    Resolver r(core_, core_.exprs, core_.type_names, diags_);
    for (auto& c : core_.contracts) {
      Ctx ctx = code_ctx(*c);
      for (const auto& s : c->def->structs) {
        auto& info = core_.structs[s.name];
        if (info.def != &s) continue;
        std::set<std::string> names;
        for (const auto& f : s.fields) {
          if (!names.insert(f.name).second)
            error(*c->source, f.span, codes::kDuplicate, "duplicate struct member '" + f.name + "'");
          info.fields.emplace_back(f.name, r.resolve_type(*f.type, ctx));
        }
      }
    }
  }

  std::unique_ptr<FunctionInfo> function_info(Resolver& r, Ctx& ctx, const ContractInfo& c, const FunctionDef& f) {
    auto fi = std::make_unique<FunctionInfo>();
    fi->def = &f;
    fi->owner = &c;
    std::set<std::string> names;
    for (const auto& p : f.params) {
      fi->param_types.push_back(r.resolve_type(*p.type, ctx));
      if (!p.name.empty() && !names.insert(p.name).second)
        error(*c.source, p.span, codes::kDuplicate, "duplicate parameter '" + p.name + "'");
    }
    for (const auto& p : f.returns) {
      fi->return_types.push_back(r.resolve_type(*p.type, ctx));
      if (!p.name.empty() && !names.insert(p.name).second)
        error(*c.source, p.span, codes::kDuplicate, "duplicate parameter '" + p.name + "'");
    }
    return fi;
  }

  void declare_members() {
    Resolver r(core_, core_.exprs, core_.type_names, diags_);
    for (auto& c : core_.contracts) {
      Ctx ctx = code_ctx(*c);
      for (const auto& v : c->def->state_vars) {
        auto vi = std::make_unique<StateVarInfo>();
        vi->name = v.name;
        vi->def = &v;
        vi->owner = c.get();
        vi->type = r.resolve_type(*v.type, ctx);
        c->own_vars.push_back(std::move(vi));
      }
      for (const auto& f : c->def->functions) c->own_functions.push_back(function_info(r, ctx, *c, f));
      for (const auto& m : c->def->modifiers) c->own_modifiers.push_back(function_info(r, ctx, *c, m));
      if (c->is_interface()) {
        if (!c->def->state_vars.empty())
          error(*c->source, c->def->state_vars[0].span, codes::kUnsupported, "interfaces cannot declare state variables");
        for (const auto& f : c->def->functions)
          if (f.body) error(*c->source, f.span, codes::kUnsupported, "interface functions cannot have a body");
      }
    }
    // state variables along the linearization, most-base first
    for (auto& c : core_.contracts) {
      std::map<std::string, const StateVarInfo*> seen;
      for (auto it = c->linearization.rbegin(); it != c->linearization.rend(); ++it) {
        for (const auto& v : (*it)->own_vars) {
          auto [pos, fresh] = seen.emplace(v->name, v.get());
          if (!fresh) {
            if (*it == c.get())
              error(*c->source, v->def->span, codes::kDuplicate, "state variable '" + v->name + "' already declared");
            continue;
          }
          c->state_vars.push_back(v.get());
        }
      }
      std::set<std::pair<std::string, size_t>> own;
      for (const auto& f : c->own_functions) {
        if (f->def->kind != FunctionKind::Function && f->def->kind != FunctionKind::Constructor) continue;
        if (!own.insert({f->def->name, f->arity()}).second)
          error(*c->source, f->def->name_span, codes::kDuplicate, "function '" + f->def->name + "' already declared");
      }
    }
  }

  void check_overrides() {
    for (auto& c : core_.contracts) {
      if (c->is_interface()) continue;
      std::map<std::pair<std::string, size_t>, std::vector<const ContractInfo*>> definers;
      for (size_t i = 1; i < c->linearization.size(); ++i)
        for (const auto& f : c->linearization[i]->own_functions)
          if (f->def->kind == FunctionKind::Function && f->def->body)
            definers[{f->def->name, f->arity()}].push_back(c->linearization[i]);
      for (const auto& [key, defs] : definers) {
        if (find_in(*c, key.first, key.second, false)) continue;
        std::vector<const ContractInfo*> maximal;
        for (const auto* d : defs) {
          bool dominated = false;
          for (const auto* o : defs)
            if (o != d && o->derives_from(d)) dominated = true;
          if (!dominated) maximal.push_back(d);
        }
        if (maximal.size() > 1)
          error(*c->source, c->def->name_span, codes::kAmbiguousOverride,
                "ambiguous override: '" + key.first + "' is defined in both '" + maximal[0]->name + "' and '" +
                    maximal[1]->name + "'; contract '" + c->name + "' must override it");
      }
    }
  }

  void resolve_function(Resolver& r, const ContractInfo& c, const FunctionInfo& f) {
    Ctx ctx = code_ctx(c);
    ctx.function = &f;
    ctx.frames.emplace_back();
    const auto& d = *f.def;
    for (size_t i = 0; i < d.params.size(); ++i)
      if (!d.params[i].name.empty()) ctx.frames.back()[d.params[i].name] = Local{f.param_types[i], d.params[i].location};
    for (size_t i = 0; i < d.returns.size(); ++i)
      if (!d.returns[i].name.empty())
        ctx.frames.back()[d.returns[i].name] = Local{f.return_types[i], d.returns[i].location};
    for (const auto& m : d.modifiers) {
      for (const auto& a : m.args) r.expr(*a, ctx);
      bool known = false;
      for (const auto* b : c.linearization) {
        if (b->name == m.name && d.kind == FunctionKind::Constructor) known = true;
        for (const auto& mm : b->own_modifiers)
          if (mm->def->name == m.name) known = true;
      }
      if (!known) error(*c.source, m.span, codes::kUndeclared, "undeclared modifier '" + m.name + "'");
    }
    if (d.body) r.stmt(*d.body, ctx);
  }

  void resolve_bodies() {
    Resolver r(core_, core_.exprs, core_.type_names, diags_);
    for (auto& c : core_.contracts) {
      Ctx ctx = code_ctx(*c);
      for (const auto& v : c->own_vars) {
        if (!v->def->init) continue;
        auto t = r.expr(*v->def->init, ctx);
        if (t && v->type) r.expect_convertible(ctx, *v->def->init, t, v->type, "state variable initializer");
      }
      for (const auto& b : c->def->bases)
        for (const auto& a : b.args) r.expr(*a, ctx);
      for (const auto& m : c->own_modifiers) resolve_function(r, *c, *m);
      for (const auto& f : c->own_functions) resolve_function(r, *c, *f);
    }
  }

  void pick_main(const ResolveOptions& opts) {
    if (!opts.main_contract.empty()) {
      auto it = core_.by_name.find(opts.main_contract);
      if (it != core_.by_name.end()) {
        core_.main = it->second;
        return;
      }
      if (!core_.units.empty())
        error(*core_.units.back()->source, {0, 0}, codes::kUndeclared, "unknown contract '" + opts.main_contract + "'");
      return;
    }
    for (auto it = core_.contracts.rbegin(); it != core_.contracts.rend(); ++it)
      if ((*it)->def->kind == ContractKind::Contract) {
        core_.main = it->get();
        return;
      }
    if (!core_.units.empty())
      error(*core_.units.back()->source, {0, 0}, codes::kUndeclared, "no concrete contract to verify");
  }

  ProgramCore& core_;
  std::vector<Diagnostic>& diags_;
};

void resolve_spec_into(const ProgramCore& core, ResolvedSpec& rs) {
  const SpecUnit& u = rs.unit();
  Resolver r(core, rs.exprs, rs.type_names, rs.diagnostics);
  Ctx ctx;
  ctx.src = rs.file->source.get();
  ctx.contract = core.main;
  ctx.frames.emplace_back();
  auto err = [&](Span s, const char* code, std::string msg) {
    rs.diagnostics.push_back(make_diagnostic(*rs.file->source, s, code, std::move(msg)));
  };
  if (!core.main) {
    err(u.name_span, codes::kUndeclared, "no contract to check the specification against");
    return;
  }
  ResolvedProgram program(std::shared_ptr<const ProgramCore>(std::shared_ptr<const ProgramCore>{}, &core));
  switch (u.kind) {
    case SpecKind::Invariant:
      ctx.mode = Mode::Invariant;
      for (const auto& e : u.exprs) r.expr(*e, ctx);
      break;
    case SpecKind::FunctionSpec: {
      auto cands = program.functions_named(*core.main, u.name);
      if (cands.empty()) {
        err(u.name_span, codes::kUnknownFunction, "unknown function '" + u.name + "' in contract " + core.main->name);
        return;
      }
      const FunctionInfo* target = cands.front();
      if (u.has_params) {
        target = nullptr;
        for (const auto* f : cands)
          if (f->arity() == u.params.size()) target = f;
        if (!target) {
          err(u.name_span, codes::kArgumentCount,
              "function '" + u.name + "' has no overload with " + std::to_string(u.params.size()) + " parameter(s)");
          return;
        }
      }
      rs.target = target;
      const auto& d = *target->def;
      for (size_t i = 0; i < d.params.size(); ++i) {
        std::string name = u.has_params ? u.params[i].name : d.params[i].name;
        if (u.has_params) {
          auto t = r.resolve_type(*u.params[i].type, ctx);
          if (t && target->param_types[i] && !same_type(*t, *target->param_types[i]))
            err(u.params[i].span, codes::kTypeMismatch,
                "parameter type " + type_string(*t) + " does not match " + type_string(*target->param_types[i]));
        }
        rs.param_names.push_back(name);
        if (!name.empty()) ctx.frames.back()[name] = Local{target->param_types[i], d.params[i].location};
      }
      ctx.mode = Mode::Pre;
      for (const auto& e : u.pre) r.expr(*e, ctx);
      for (size_t i = 0; i < d.returns.size(); ++i)
        if (!d.returns[i].name.empty()) ctx.frames.back()[d.returns[i].name] = Local{target->return_types[i], {}};
      ctx.mode = Mode::Post;
      for (const auto& e : u.post) r.expr(*e, ctx);
      break;
    }
    case SpecKind::Rule:
      ctx.mode = Mode::Rule;
      for (const auto& p : u.params) {
        auto t = r.resolve_type(*p.type, ctx);
        if (!p.name.empty()) ctx.frames.back()[p.name] = Local{t, p.location};
      }
      for (const auto& s : u.body) r.stmt(*s, ctx);
      break;
  }
}

}  // namespace

std::shared_ptr<const ResolvedSpec> resolve_spec(const ResolvedProgram& program, std::shared_ptr<const SpecFile> file,
                                                 size_t index) {
  auto rs = std::make_shared<ResolvedSpec>();
  rs->core = program.core_ptr();
  rs->file = std::move(file);
  rs->index = index;
  resolve_spec_into(*rs->core, *rs);
  return rs;
}

Parsed<ResolvedProgram> resolve(const std::vector<std::shared_ptr<const SourceUnit>>& units,
                                const ResolveOptions& options) {
  Parsed<ResolvedProgram> out;
  auto core = std::make_shared<ProgramCore>();
  core->units = units;
  ProgramBuilder(*core, out.diagnostics).run(options);
  if (has_errors(out.diagnostics)) return out;
  out.value = std::make_shared<const ResolvedProgram>(core);
  return out;
}

Parsed<ResolvedProgram> resolve(const std::vector<std::shared_ptr<const SourceUnit>>& units,
                                const std::vector<std::shared_ptr<const SpecFile>>& specs,
                                const ResolveOptions& options) {
  auto base = resolve(units, options);
  if (!base.ok()) return base;
  Parsed<ResolvedProgram> out;
  auto program = std::make_shared<ResolvedProgram>(*base.value);
  for (const auto& f : specs) {
    for (size_t i = 0; i < f->units.size(); ++i) {
      auto rs = resolve_spec(*program, f, i);
      out.diagnostics.insert(out.diagnostics.end(), rs->diagnostics.begin(), rs->diagnostics.end());
      program->add_spec(rs);
    }
  }
  if (!has_errors(out.diagnostics)) out.value = program;
  return out;
}

}  // namespace ppgpt::frontend
