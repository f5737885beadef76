#include "ppgpt/symexec/executor.hpp"

#include <functional>
#include <set>

namespace ppgpt::sym {

using namespace frontend;

BigInt encode_string(const std::string& bytes) {
  BigInt v = 1;
  for (unsigned char ch : bytes) v = v * 256 + ch;
  return v;
}

SortPtr value_sort(const Type& t) { return t.kind == TypeKind::Bool ? bool_sort() : int_sort(); }

SortPtr leaf_sort(const Leaf& leaf, size_t base_depth) {
  SortPtr s = value_sort(*leaf.type);
  for (size_t i = 0; i < leaf.depth + base_depth; ++i) s = array_sort(s);
  return s;
}

namespace {

void collect_leaves(const ResolvedProgram& p, const TypePtr& t, const std::string& suffix, size_t depth,
                    std::vector<Leaf>& out) {
  switch (t->kind) {
    case TypeKind::Mapping:
      collect_leaves(p, t->element, suffix + "[]", depth + 1, out);
      break;
    case TypeKind::Array:
      out.push_back({suffix + ".length", depth, types::uint_t()});
      collect_leaves(p, t->element, suffix + "[]", depth + 1, out);
      break;
    case TypeKind::Struct: {
      const auto* si = p.struct_info(t->name);
      if (!si) throw std::logic_error("unknown struct " + t->name);
      for (const auto& [name, ft] : si->fields) collect_leaves(p, ft, suffix + "." + name, depth, out);
      break;
    }
    default:
      out.push_back({suffix, depth, t});
  }
}

bool ranged(const Type& t) { return t.kind != TypeKind::Bool && type_max(t) >= 0; }

Term default_term(const SortPtr& s) {
  switch (s->kind) {
    case SortKind::Int: return int_const(0);
    case SortKind::Bool: return bool_const(false);
    case SortKind::Array: return const_array(s, default_term(s->element));
  }
  return int_const(0);
}

Term as_int(const Term& t) { return t->sort->kind == SortKind::Bool ? ite(t, int_const(1), int_const(0)) : t; }

Term select_chain(Term t, const std::vector<Term>& idx) {
  for (const auto& i : idx) t = select(t, i);
  return t;
}

Term store_chain(const Term& arr, const std::vector<Term>& idx, size_t k, const Term& v) {
  if (k == idx.size()) return v;
  return store(arr, idx[k], store_chain(select(arr, idx[k]), idx, k + 1, v));
}

Loc child(const Loc& base, const std::string& suffix, TypePtr type, const Term* index = nullptr) {
  Loc l = base;
  l.path += suffix;
  if (index) l.indices.push_back(*index);
  l.type = std::move(type);
  return l;
}

}  // namespace

std::vector<Leaf> leaves_of(const ResolvedProgram& program, const TypePtr& type) {
  std::vector<Leaf> out;
  collect_leaves(program, type, "", 0, out);
  return out;
}

// ---------------------------------------------------------------------------

enum class Flow { Normal, Return, Break, Continue };

struct Invocation {
  const FunctionInfo* fn = nullptr;
  std::vector<Value> args;
  std::vector<const FunctionInfo*> modifiers;
  std::vector<const ModifierInvocation*> mod_calls;
};

struct Frame {
  std::vector<std::map<std::string, Value>> scopes;
  std::shared_ptr<const Invocation> inv;
  size_t level = 0;
  bool rule = false;
  int unchecked = 0;
};

struct Path {
  SymState st;
  std::vector<Frame> frames;
  Flow flow = Flow::Normal;
  std::vector<Value> rets;
  int depth = 0;
};

struct Ctx {
  bool spec = false;  // unbounded arithmetic, no revert branches
  bool old = false;   // state reads from the entry snapshot
};

struct Evald {
  Path p;
  Value v;
};
using Results = std::vector<Evald>;
using Paths = std::vector<Path>;

struct LValue {
  enum class Kind { Discard, Local, Location, Tuple };
  Kind kind = Kind::Discard;
  std::string name;
  Loc loc;
  std::vector<LValue> items;
  TypePtr type;
};

struct Executor::Impl {
  const ResolvedProgram& program;
  const ResolvedSpec* spec;
  ExecOptions opts;
  const ContractInfo& contract;
  std::map<std::string, int> names;
  std::vector<Path> reverted;
  std::vector<std::string> reasons;
  size_t path_count = 0;

  Impl(const ResolvedProgram& p, const ResolvedSpec* s, ExecOptions o)
      : program(p), spec(s), opts(o), contract(p.main()) {}

  // ---- tables ----
  const ExprInfo& info(const Expr& e) const {
    const ExprInfo* i = spec ? spec->info(e) : program.info(e);
    if (!i) throw std::logic_error("expression was not resolved");
    return *i;
  }

  TypePtr type_of(const TypeName& t) const {
    TypePtr r = spec ? spec->type_of(t) : program.type_of(t);
    if (!r) throw std::logic_error("type was not resolved");
    return r;
  }

  // ---- names and symbols ----
  std::string fresh_name(const std::string& base) {
    int& n = names[base];
    std::string name = n == 0 ? base : base + "!" + std::to_string(n);
    ++n;
    return name;
  }

  void constrain(SymState& st, const Term& t, const Type& type) {
    if (is_const(t) || !ranged(type)) return;
    if (!st.constrained.insert(t).second) return;
    st.assume(land(le(int_const(type_min(type)), t), le(t, int_const(type_max(type)))));
    if (opts.domain_bound >= 0 && is_input(t))
      st.assume(land(le(int_const(0), t), le(t, int_const(opts.domain_bound))));
  }

  static bool is_input(Term t) {
    while (t->op == sym::Op::Select) t = t->args[0];
    return t->op == sym::Op::Var;
  }

  Term fresh_scalar(SymState& st, const TypePtr& type, const std::string& base) {
    Term t = var(fresh_name(base), value_sort(*type));
    constrain(st, t, *type);
    return t;
  }

  Term oracle(SymState& st, const TypePtr& type, const std::string& base, const std::string& kind,
              const std::string& origin) {
    Term t = fresh_scalar(st, type, base);
    st.oracles.push_back({t->name, kind, origin, t->sort});
    return t;
  }

  Env fresh_env(SymState& st, bool payable) {
    Env env;
    env.sender = fresh_scalar(st, types::address_t(), "msg.sender");
    env.value = payable ? fresh_scalar(st, types::uint_t(), "msg.value") : int_const(0);
    env.timestamp = fresh_scalar(st, types::uint_t(), "block.timestamp");
    env.number = fresh_scalar(st, types::uint_t(), "block.number");
    env.origin = fresh_scalar(st, types::address_t(), "tx.origin");
    return env;
  }

  // ---- memory model ----
  std::map<std::string, Term>& space(SymState& st, const Loc& l) {
    if (l.memory) return st.memory;
    return l.old ? st.old_store : st.store;
  }

  Term leaf_term(SymState& st, const Loc& l, const std::string& suffix) {
    auto& m = space(st, l);
    auto it = m.find(l.key() + suffix);
    if (it == m.end()) throw std::logic_error("no storage leaf " + l.key() + suffix);
    return it->second;
  }

  Term read(SymState& st, const Loc& l) {
    Term t = select_chain(leaf_term(st, l, ""), l.indices);
    constrain(st, t, *l.type);
    return t;
  }

  void write(SymState& st, const Loc& l, const Term& v) {
    if (l.old) throw std::logic_error("write to entry snapshot");
    auto& m = space(st, l);
    auto it = m.find(l.key());
    if (it == m.end()) throw std::logic_error("no storage leaf " + l.key());
    it->second = store_chain(it->second, l.indices, 0, v);
  }

  void copy(SymState& st, const Loc& dst, const Loc& src) {
    for (const auto& lf : leaves_of(program, dst.type)) {
      Term s = select_chain(leaf_term(st, src, lf.suffix), src.indices);
      Loc d = dst;
      d.path += lf.suffix;
      write(st, d, s);
    }
  }

  void write_default(SymState& st, const Loc& dst) {
    for (const auto& lf : leaves_of(program, dst.type)) {
      if (lf.suffix.find("[]") != std::string::npos && lf.depth > 0 &&
          !is_under_array(dst.type, lf.suffix))
        continue;  // mapping contents survive delete
      Loc d = dst;
      d.path += lf.suffix;
      write(st, d, default_term(leaf_sort(lf, 0)));
    }
  }

  // True when every "[]" along the suffix crosses an array, not a mapping.
  bool is_under_array(TypePtr t, const std::string& suffix) {
    size_t pos = 0;
    while (pos < suffix.size()) {
      if (suffix.compare(pos, 2, "[]") == 0) {
        if (t->kind == TypeKind::Mapping) return false;
        t = t->element;
        pos += 2;
      } else if (suffix[pos] == '.') {
        size_t end = pos + 1;
        while (end < suffix.size() && suffix[end] != '.' && suffix[end] != '[') ++end;
        std::string field = suffix.substr(pos + 1, end - pos - 1);
        if (field == "length" && t->kind == TypeKind::Array) return true;
        const auto* si = program.struct_info(t->name);
        if (!si) return true;
        t = si->field(field);
        pos = end;
      } else {
        ++pos;
      }
    }
    return true;
  }

  Loc new_object(SymState& st, const TypePtr& type) {
    Loc l;
    l.memory = true;
    l.root = "#" + std::to_string(st.next_object++);
    l.type = type;
    for (const auto& lf : leaves_of(program, type)) st.memory[l.root + lf.suffix] = default_term(leaf_sort(lf, 0));
    return l;
  }

  Value fresh_value(SymState& st, const TypePtr& type, const std::string& name) {
    if (type->is_value()) return Value::scalar(fresh_scalar(st, type, name), type);
    Loc l = new_object(st, type);
    for (const auto& lf : leaves_of(program, type)) {
      Term t = var(fresh_name(name + lf.suffix), leaf_sort(lf, 0));
      if (lf.depth == 0) {
        constrain(st, t, *lf.type);
        if (opts.max_array_length >= 0 && lf.suffix.size() >= 7 &&
            lf.suffix.compare(lf.suffix.size() - 7, 7, ".length") == 0)
          st.assume(le(t, int_const(opts.max_array_length)));
      }
      st.memory[l.root + lf.suffix] = t;
    }
    return Value::ref(l);
  }

  Value default_value(SymState& st, const TypePtr& type) {
    if (type->is_value()) return Value::scalar(default_term(value_sort(*type)), type);
    return Value::ref(new_object(st, type));
  }

  // Turns a value into what a variable of `type` at `location` holds.
  Value coerce(SymState& st, const Value& v, const TypePtr& type, DataLocation location) {
    if (v.kind != Value::Kind::Ref || !type || type->is_value()) return v;
    if (location == DataLocation::Storage || v.loc.memory) return v;
    Loc obj = new_object(st, type);
    copy(st, obj, v.loc);
    return Value::ref(obj);
  }

  void assign_loc(SymState& st, const Loc& dst, const Value& v) {
    if (dst.type->is_value()) {
      write(st, dst, value_term(v));
      return;
    }
    if (v.kind != Value::Kind::Ref) throw std::logic_error("reference assignment from a non-reference");
    copy(st, dst, v.loc);
  }

  static Term value_term(const Value& v) {
    if (v.kind != Value::Kind::Scalar) throw std::logic_error("expected a scalar value");
    return v.term;
  }

  // ---- paths ----
  void count_fork() {
    if (++path_count > opts.max_paths) throw PathLimitExceeded("path limit exceeded");
  }

  void revert_if(Path& p, const Term& cond, const std::string& reason) {
    if (is_false(cond)) return;
    Path r = p;
    r.st.assume(cond);
    reverted.push_back(std::move(r));
    reasons.push_back(reason);
    count_fork();
    p.st.assume(lnot(cond));
  }

  Value* lookup_local(Path& p, const std::string& name) {
    auto& f = p.frames.back();
    for (auto it = f.scopes.rbegin(); it != f.scopes.rend(); ++it) {
      auto jt = it->find(name);
      if (jt != it->end()) return &jt->second;
    }
    return nullptr;
  }

  void declare(Path& p, const std::string& name, Value v) { p.frames.back().scopes.back()[name] = std::move(v); }

  bool unchecked(const Path& p) const { return p.frames.back().unchecked > 0; }

  // ---- expressions ----
  Results eval(Path p, const Expr& e, Ctx c) {
    const ExprInfo& i = info(e);
    if (i.constant && i.type && i.type->is_integer() && e.kind != ExprKind::Assign && e.kind != ExprKind::Call)
      return {{std::move(p), Value::scalar(int_const(*i.constant), i.type)}};
    switch (e.kind) {
      case ExprKind::Number: return {{std::move(p), Value::scalar(int_const(e.number), i.type)}};
      case ExprKind::Bool: return {{std::move(p), Value::scalar(bool_const(e.boolean), i.type)}};
      case ExprKind::String: return {{std::move(p), Value::scalar(int_const(encode_string(e.str)), i.type)}};
      case ExprKind::Identifier: return identifier(std::move(p), e, i, c);
      case ExprKind::Member: return member(std::move(p), e, i, c);
      case ExprKind::Index: return index(std::move(p), e, i, c);
      case ExprKind::Unary: return unary(std::move(p), e, i, c);
      case ExprKind::Binary: return binary(std::move(p), e, i, c);
      case ExprKind::Assign: return assign(std::move(p), e, i, c);
      case ExprKind::Ternary: return ternary(std::move(p), e, c);
      case ExprKind::Call: return call(std::move(p), e, i, c);
      case ExprKind::Old: {
        Ctx o = c;
        o.old = true;
        return eval(std::move(p), *e.operands[0], o);
      }
      case ExprKind::New: {
        Results out;
        for (auto& [q, len] : eval(std::move(p), *e.operands.at(0), c)) {
          Loc obj = new_object(q.st, i.type);
          write(q.st, child(obj, ".length", types::uint_t()), value_term(len));
          out.push_back({std::move(q), Value::ref(obj)});
        }
        return out;
      }
      case ExprKind::Tuple: {
        if (e.operands.size() == 1 && e.operands[0]) return eval(std::move(p), *e.operands[0], c);
        Results out;
        for (auto& [q, vs] : eval_list(std::move(p), e.operands, 0, c)) {
          Value t;
          t.kind = Value::Kind::Tuple;
          t.items = std::move(vs);
          t.type = i.type;
          out.push_back({std::move(q), std::move(t)});
        }
        return out;
      }
      case ExprKind::ElementaryType: break;
    }
    throw std::logic_error("unsupported expression");
  }

  std::vector<std::pair<Path, std::vector<Value>>> eval_list(Path p, const std::vector<ExprPtr>& es, size_t from,
                                                            Ctx c) {
    std::vector<std::pair<Path, std::vector<Value>>> acc;
    acc.push_back({std::move(p), {}});
    for (size_t k = from; k < es.size(); ++k) {
      std::vector<std::pair<Path, std::vector<Value>>> next;
      for (auto& [q, vs] : acc) {
        if (!es[k]) {
          vs.push_back(Value{});
          next.push_back({std::move(q), std::move(vs)});
          continue;
        }
        for (auto& [r, v] : eval(std::move(q), *es[k], c)) {
          auto ws = vs;
          ws.push_back(std::move(v));
          next.push_back({std::move(r), std::move(ws)});
        }
      }
      acc = std::move(next);
    }
    return acc;
  }

  Results read_or_ref(Path p, const Loc& l) {
    if (l.type->is_value()) {
      Term t = read(p.st, l);
      return {{std::move(p), Value::scalar(t, l.type)}};
    }
    return {{std::move(p), Value::ref(l)}};
  }

  Loc state_loc(const StateVarInfo& v, bool old) {
    Loc l;
    l.root = v.name;
    l.old = old;
    l.type = v.type;
    return l;
  }

  Results identifier(Path p, const Expr& e, const ExprInfo& i, Ctx c) {
    switch (i.ref) {
      case RefKind::Local: {
        Value* v = lookup_local(p, e.name);
        if (!v) throw std::logic_error("unbound local " + e.name);
        Value copy = *v;
        return {{std::move(p), std::move(copy)}};
      }
      case RefKind::StateVar:
        if (i.var->def->constant) {
          if (!i.var->def->init) throw std::logic_error("constant without value");
          Path q = std::move(p);
          q.frames.push_back(Frame{{{}}, nullptr, 0, false, 0});
          auto rs = eval(std::move(q), *i.var->def->init, c);
          for (auto& r : rs) r.p.frames.pop_back();
          return rs;
        }
        return read_or_ref(std::move(p), state_loc(*i.var, c.old));
      case RefKind::SymbolicAlias:
        return read_or_ref(std::move(p), state_loc(*i.var, true));
      case RefKind::Magic:
        if (i.builtin == "this") {
          Term t = var("this", int_sort());
          constrain(p.st, t, *types::address_t());
          return {{std::move(p), Value::scalar(t, i.type)}};
        }
        break;
      default:
        break;
    }
    throw std::logic_error("unsupported identifier " + e.name);
  }

  Results member(Path p, const Expr& e, const ExprInfo& i, Ctx c) {
    if (i.member == MemberKind::Env) {
      const Env& env = p.st.env;
      Term t = i.builtin == "msg.sender"        ? env.sender
               : i.builtin == "msg.value"       ? env.value
               : i.builtin == "block.timestamp" ? env.timestamp
               : i.builtin == "block.number"    ? env.number
                                                : env.origin;
      if (!t) throw std::logic_error("environment not initialized");
      return {{std::move(p), Value::scalar(t, i.type)}};
    }
    Results out;
    for (auto& [q, base] : eval(std::move(p), *e.operands[0], c)) {
      switch (i.member) {
        case MemberKind::Balance: {
          Term t = oracle(q.st, types::uint_t(), "balance", "balance", "");
          out.push_back({std::move(q), Value::scalar(t, i.type)});
          break;
        }
        case MemberKind::Field:
          for (auto& r : read_or_ref(std::move(q), child(base.loc, "." + e.name, i.type))) out.push_back(std::move(r));
          break;
        case MemberKind::Length:
          for (auto& r : read_or_ref(std::move(q), child(base.loc, ".length", i.type))) out.push_back(std::move(r));
          break;
        default:
          throw std::logic_error("unsupported member access ." + e.name);
      }
    }
    return out;
  }

  Results index(Path p, const Expr& e, const ExprInfo& i, Ctx c) {
    Results out;
    for (auto& [q, base] : eval(std::move(p), *e.operands[0], c)) {
      for (auto& [r, key] : eval(std::move(q), *e.operands[1], c)) {
        if (base.kind != Value::Kind::Ref) throw std::logic_error("index on non-reference");
        Term k = as_int(value_term(key));
        if (base.type->kind == TypeKind::Array && !c.spec) {
          Term len = read(r.st, child(base.loc, ".length", types::uint_t()));
          revert_if(r, le(len, k), "index out of bounds");
        }
        for (auto& x : read_or_ref(std::move(r), child(base.loc, "[]", i.type, &k))) out.push_back(std::move(x));
      }
    }
    return out;
  }

  // Arithmetic with Solidity semantics on `type`, or unbounded in specs.
  Term arith(Path& p, const std::string& op, Term a, Term b, const TypePtr& type, Ctx c) {
    bool signed_ = type && type->is_signed();
    bool bounded = type && !c.spec && type->kind != TypeKind::IntLiteral && type_max(*type) >= 0;
    Term r;
    if (op == "+") {
      r = add(a, b);
    } else if (op == "-") {
      r = sub(a, b);
    } else if (op == "*") {
      r = mul(a, b);
    } else if (op == "/" || op == "%") {
      bool d = op == "/";
      Term raw = signed_ ? (d ? tdiv(a, b) : tmod(a, b)) : (d ? div(a, b) : mod(a, b));
      if (c.spec) return ite(eq(b, int_const(0)), int_const(0), raw);
      revert_if(p, eq(b, int_const(0)), "division by zero");
      r = raw;
    } else if (op == "**") {
      if (b->op != Op::IntConst) throw std::logic_error("non-constant exponent");
      r = int_const(1);
      for (BigInt k = 0; k < b->value; ++k) r = mul(r, a);
    } else {
      throw std::logic_error("unsupported operator " + op);
    }
    if (!bounded) return r;
    Term lo = int_const(type_min(*type)), hi = int_const(type_max(*type));
    if (unchecked(p)) return wrap(r, *type);
    Term overflow = lor(lt(r, lo), lt(hi, r));
    revert_if(p, overflow, "arithmetic overflow");
    return r;
  }

  static Term wrap(const Term& x, const Type& t) {
    BigInt m = pow2(t.bits);
    Term u = mod(x, int_const(m));
    if (!t.is_signed()) return u;
    return ite(le(int_const(pow2(t.bits - 1)), u), sub(u, int_const(m)), u);
  }

  Results unary(Path p, const Expr& e, const ExprInfo& i, Ctx c) {
    const std::string& op = e.name;
    const Expr& o = *e.operands[0];
    Results out;
    if (op == "!" || op == "-") {
      for (auto& [q, v] : eval(std::move(p), o, c)) {
        Term t = op == "!" ? lnot(value_term(v)) : arith(q, "-", int_const(0), value_term(v), i.type, c);
        out.push_back({std::move(q), Value::scalar(t, i.type)});
      }
      return out;
    }
    for (auto& [q, lv] : lvalue(std::move(p), o, c)) {
      if (op == "delete") {
        if (lv.kind == LValue::Kind::Location) {
          if (lv.loc.type->is_value())
            write(q.st, lv.loc, default_term(value_sort(*lv.loc.type)));
          else
            write_default(q.st, lv.loc);
        } else {
          store_lvalue(q, lv, default_value(q.st, lv.type));
        }
        out.push_back({std::move(q), Value{}});
        continue;
      }
      Term old = value_term(load_lvalue(q, lv));
      bool inc = op == "++" || op == "post++";
      Term now = arith(q, inc ? "+" : "-", old, int_const(1), lv.type, c);
      store_lvalue(q, lv, Value::scalar(now, lv.type));
      bool post = op.rfind("post", 0) == 0;
      out.push_back({std::move(q), Value::scalar(post ? old : now, i.type)});
    }
    return out;
  }

  // Right operand has no side effects and cannot revert.
  bool pure(const Expr& e) {
    switch (e.kind) {
      case ExprKind::Identifier: case ExprKind::Number: case ExprKind::Bool: case ExprKind::String:
        return true;
      case ExprKind::Member: {
        auto m = info(e).member;
        return (m == MemberKind::Field || m == MemberKind::Env) && pure(*e.operands[0]);
      }
      case ExprKind::Index: {
        const auto& bi = info(*e.operands[0]);
        return bi.type && bi.type->kind == TypeKind::Mapping && pure(*e.operands[0]) && pure(*e.operands[1]);
      }
      case ExprKind::Unary:
        return e.name == "!" && pure(*e.operands[0]);
      case ExprKind::Binary: {
        static const std::set<std::string> safe = {"==", "!=", "<", ">", "<=", ">=", "&&", "||", "&"};
        return safe.count(e.name) && pure(*e.operands[0]) && pure(*e.operands[1]);
      }
      case ExprKind::Old:
        return pure(*e.operands[0]);
      default:
        return false;
    }
  }

  Results binary(Path p, const Expr& e, const ExprInfo& i, Ctx c) {
    const std::string& op = e.name;
    Results out;
    if ((op == "&&" || op == "||") && !c.spec && !pure(*e.operands[1])) {
      bool is_and = op == "&&";
      for (auto& [q, l] : eval(std::move(p), *e.operands[0], c)) {
        Term lt_ = value_term(l);
        // short-circuit branch
        if (!(is_and ? is_true(lt_) : is_false(lt_))) {
          Path s = q;
          s.st.assume(is_and ? lnot(lt_) : lt_);
          out.push_back({std::move(s), Value::scalar(bool_const(!is_and), i.type)});
          count_fork();
        }
        if (is_and ? is_false(lt_) : is_true(lt_)) continue;
        q.st.assume(is_and ? lt_ : lnot(lt_));
        for (auto& r : eval(std::move(q), *e.operands[1], c)) out.push_back(std::move(r));
      }
      return out;
    }
    for (auto& [q, l] : eval(std::move(p), *e.operands[0], c)) {
      for (auto& [r, rv] : eval(std::move(q), *e.operands[1], c)) {
        Term a = value_term(l), b = value_term(rv);
        Term t;
        if (op == "&&" || op == "&") t = land(a, b);
        else if (op == "||") t = lor(a, b);
        else if (op == "==") t = eq(a, b);
        else if (op == "!=") t = lnot(eq(a, b));
        else if (op == "<") t = lt(a, b);
        else if (op == ">") t = gt(a, b);
        else if (op == "<=") t = le(a, b);
        else if (op == ">=") t = ge(a, b);
        else t = arith(r, op, a, b, i.type, c);
        out.push_back({std::move(r), Value::scalar(t, i.type)});
      }
    }
    return out;
  }

  Results ternary(Path p, const Expr& e, Ctx c) {
    Results out;
    bool merge = c.spec || (pure(*e.operands[1]) && pure(*e.operands[2]));
    for (auto& [q, cv] : eval(std::move(p), *e.operands[0], c)) {
      Term cond = value_term(cv);
      if (merge && !is_const(cond)) {
        for (auto& [r, a] : eval(std::move(q), *e.operands[1], c))
          for (auto& [s, b] : eval(std::move(r), *e.operands[2], c))
            out.push_back({std::move(s), Value::scalar(ite(cond, value_term(a), value_term(b)), a.type)});
        continue;
      }
      for (auto& [q2, branch] : split(std::move(q), cond))
        for (auto& r : eval(std::move(q2), *e.operands[branch ? 1 : 2], c)) out.push_back(std::move(r));
    }
    return out;
  }

  // Forks on a condition; constant conditions don't fork.
  std::vector<std::pair<Path, bool>> split(Path p, const Term& cond) {
    std::vector<std::pair<Path, bool>> out;
    if (is_true(cond)) {
      out.push_back({std::move(p), true});
      return out;
    }
    if (is_false(cond)) {
      out.push_back({std::move(p), false});
      return out;
    }
    Path f = p;
    f.st.assume(lnot(cond));
    p.st.assume(cond);
    count_fork();
    out.push_back({std::move(p), true});
    out.push_back({std::move(f), false});
    return out;
  }

  // ---- lvalues ----
  std::vector<std::pair<Path, LValue>> lvalue(Path p, const Expr& e, Ctx c) {
    const ExprInfo& i = info(e);
    std::vector<std::pair<Path, LValue>> out;
    if (e.kind == ExprKind::Identifier && i.ref == RefKind::Local) {
      LValue lv;
      lv.kind = LValue::Kind::Local;
      lv.name = e.name;
      lv.type = i.type;
      out.push_back({std::move(p), std::move(lv)});
      return out;
    }
    if (e.kind == ExprKind::Identifier && i.ref == RefKind::StateVar) {
      LValue lv;
      lv.kind = LValue::Kind::Location;
      lv.loc = state_loc(*i.var, false);
      lv.type = i.type;
      out.push_back({std::move(p), std::move(lv)});
      return out;
    }
    if (e.kind == ExprKind::Tuple) {
      if (e.operands.size() == 1 && e.operands[0]) return lvalue(std::move(p), *e.operands[0], c);
      std::vector<std::pair<Path, std::vector<LValue>>> acc;
      acc.push_back({std::move(p), {}});
      for (const auto& op : e.operands) {
        std::vector<std::pair<Path, std::vector<LValue>>> next;
        for (auto& [q, items] : acc) {
          if (!op) {
            items.push_back(LValue{});
            next.push_back({std::move(q), std::move(items)});
            continue;
          }
          for (auto& [r, lv] : lvalue(std::move(q), *op, c)) {
            auto copy = items;
            copy.push_back(std::move(lv));
            next.push_back({std::move(r), std::move(copy)});
          }
        }
        acc = std::move(next);
      }
      for (auto& [q, items] : acc) {
        LValue lv;
        lv.kind = LValue::Kind::Tuple;
        lv.items = std::move(items);
        lv.type = i.type;
        out.push_back({std::move(q), std::move(lv)});
      }
      return out;
    }
    if (e.kind == ExprKind::Member || e.kind == ExprKind::Index) {
      // evaluate the base as a reference, then address the element
      for (auto& [q, base] : eval(std::move(p), *e.operands[0], c)) {
        if (base.kind != Value::Kind::Ref) throw std::logic_error("assignment through a non-reference");
        if (e.kind == ExprKind::Member) {
          LValue lv;
          lv.kind = LValue::Kind::Location;
          lv.loc = child(base.loc, i.member == MemberKind::Length ? ".length" : "." + e.name, i.type);
          lv.type = i.type;
          out.push_back({std::move(q), std::move(lv)});
          continue;
        }
        for (auto& [r, key] : eval(std::move(q), *e.operands[1], c)) {
          Term k = as_int(value_term(key));
          if (base.type->kind == TypeKind::Array && !c.spec) {
            Term len = read(r.st, child(base.loc, ".length", types::uint_t()));
            revert_if(r, le(len, k), "index out of bounds");
          }
          LValue lv;
          lv.kind = LValue::Kind::Location;
          lv.loc = child(base.loc, "[]", i.type, &k);
          lv.type = i.type;
          out.push_back({std::move(r), std::move(lv)});
        }
      }
      return out;
    }
    throw std::logic_error("expression is not assignable");
  }

  Value load_lvalue(Path& p, const LValue& lv) {
    switch (lv.kind) {
      case LValue::Kind::Local: return *lookup_local(p, lv.name);
      case LValue::Kind::Location:
        if (lv.loc.type->is_value()) return Value::scalar(read(p.st, lv.loc), lv.loc.type);
        return Value::ref(lv.loc);
      default: throw std::logic_error("cannot read this lvalue");
    }
  }

  void store_lvalue(Path& p, const LValue& lv, const Value& v) {
    switch (lv.kind) {
      case LValue::Kind::Discard: return;
      case LValue::Kind::Local: {
        Value* slot = lookup_local(p, lv.name);
        if (!slot) throw std::logic_error("unbound local " + lv.name);
        if (slot->kind == Value::Kind::Ref && !slot->loc.memory) {
          *slot = v;  // storage pointer rebinds
        } else if (slot->kind == Value::Kind::Ref) {
          *slot = coerce(p.st, v, lv.type, DataLocation::Memory);
        } else {
          *slot = Value::scalar(value_term(v), slot->type ? slot->type : lv.type);
        }
        return;
      }
      case LValue::Kind::Location:
        assign_loc(p.st, lv.loc, v);
        return;
      case LValue::Kind::Tuple:
        for (size_t k = 0; k < lv.items.size(); ++k) store_lvalue(p, lv.items[k], v.items.at(k));
        return;
    }
  }

  Results assign(Path p, const Expr& e, const ExprInfo& i, Ctx c) {
    Results out;
    for (auto& [q, lv] : lvalue(std::move(p), *e.operands[0], c)) {
      for (auto& [r, rv] : eval(std::move(q), *e.operands[1], c)) {
        Value v = rv;
        if (e.name != "=") {
          Term cur = value_term(load_lvalue(r, lv));
          v = Value::scalar(arith(r, e.name.substr(0, e.name.size() - 1), cur, value_term(rv), lv.type, c), lv.type);
        }
        store_lvalue(r, lv, v);
        out.push_back({std::move(r), v.kind == Value::Kind::Ref ? v : v});
      }
    }
    (void)i;
    return out;
  }

  // ---- calls ----
  Results call(Path p, const Expr& e, const ExprInfo& i, Ctx c) {
    const Expr& callee = *e.operands[0];
    Results out;
    switch (i.call) {
      case CallKind::Require: case CallKind::Assert: case CallKind::Assume: {
        bool rule = p.frames.back().rule;
        Ctx cc = c;
        if (rule) cc.spec = true;
        for (auto& [q, v] : eval(std::move(p), *e.operands[1], cc)) {
          Term cond = value_term(v);
          if (rule && i.call == CallKind::Assert) {
            q.st.obligations.push_back({cond, q.st.path_condition(), e.span});
          } else if (rule || i.call == CallKind::Assume) {
            q.st.assume(cond);
          } else {
            std::string reason = i.call == CallKind::Assert ? "assert failed" : "require failed";
            if (e.operands.size() > 2 && e.operands[2]->kind == ExprKind::String) reason = e.operands[2]->str;
            revert_if(q, lnot(cond), reason);
          }
          out.push_back({std::move(q), Value{}});
        }
        return out;
      }
      case CallKind::Revert:
        for (auto& [q, vs] : eval_list(std::move(p), e.operands, 1, c)) {
          reverted.push_back(std::move(q));
          std::string reason = "revert";
          if (e.operands.size() > 1 && e.operands[1]->kind == ExprKind::String) reason = e.operands[1]->str;
          reasons.push_back(reason);
        }
        return out;
      case CallKind::Conversion:
        for (auto& [q, v] : eval(std::move(p), *e.operands[1], c)) out.push_back({std::move(q), convert(v, i.type)});
        return out;
      case CallKind::Hash: {
        std::string fn = i.builtin == "sha256" ? "sha256" : "sha3";
        for (auto& [q, vs] : eval_list(std::move(p), e.operands, 1, c)) {
          std::vector<Term> args;
          for (const auto& v : vs) args.push_back(as_int(value_term(v)));
          out.push_back({std::move(q), Value::scalar(sym::apply(fn, std::move(args)), i.type)});
        }
        return out;
      }
      case CallKind::AbiEncode:
        for (auto& [q, vs] : eval_list(std::move(p), e.operands, 1, c)) {
          std::vector<Term> args;
          for (const auto& v : vs) args.push_back(as_int(value_term(v)));
          out.push_back({std::move(q), Value::scalar(sym::apply("abi_" + i.builtin, std::move(args)), i.type)});
        }
        return out;
      case CallKind::Event:
        for (auto& [q, vs] : eval_list(std::move(p), e.operands, 1, c)) out.push_back({std::move(q), Value{}});
        return out;
      case CallKind::StructCtor:
        for (auto& [q, vs] : eval_list(std::move(p), e.operands, 1, c)) {
          Loc obj = new_object(q.st, i.type);
          const auto* si = program.struct_info(i.type->name);
          for (size_t k = 0; k < vs.size(); ++k)
            assign_loc(q.st, child(obj, "." + si->fields[k].first, si->fields[k].second), vs[k]);
          out.push_back({std::move(q), Value::ref(obj)});
        }
        return out;
      case CallKind::Push: case CallKind::Pop:
        return push_pop(std::move(p), e, i, c);
      case CallKind::LowLevel: case CallKind::Transfer: case CallKind::Send: {
        std::vector<ExprPtr> parts{callee.operands[0]};
        for (const auto& o : e.options) parts.push_back(o.value);
        for (size_t k = 1; k < e.operands.size(); ++k) parts.push_back(e.operands[k]);
        for (auto& [q, vs] : eval_list(std::move(p), parts, 0, c)) {
          if (i.call == CallKind::Transfer) {
            out.push_back({std::move(q), Value{}});
          } else if (i.call == CallKind::Send) {
            out.push_back({std::move(q), Value::scalar(bool_const(true), i.type)});
          } else {
            Term ok = oracle(q.st, types::bool_t(), "call.success", "success", "");
            q.st.assume(ok);  // on-chain calls are assumed to succeed
            Term data = oracle(q.st, types::bytes_t(), "call.returndata", "returndata", "");
            Value t;
            t.kind = Value::Kind::Tuple;
            t.type = i.type;
            t.items = {Value::scalar(ok, types::bool_t()), Value::scalar(data, types::bytes_t())};
            out.push_back({std::move(q), std::move(t)});
          }
        }
        return out;
      }
      case CallKind::External: {
        std::vector<ExprPtr> parts{callee.operands[0]};
        for (const auto& o : e.options) parts.push_back(o.value);
        for (size_t k = 1; k < e.operands.size(); ++k) parts.push_back(e.operands[k]);
        std::string origin = i.function->owner->name + "." + i.function->name();
        for (auto& [q, vs] : eval_list(std::move(p), parts, 0, c)) {
          std::vector<Value> rets;
          for (const auto& rt : i.function->return_types) rets.push_back(external_result(q.st, rt, origin));
          out.push_back({std::move(q), pack(std::move(rets), i.type)});
        }
        return out;
      }
      case CallKind::Internal: case CallKind::Super: {
        const FunctionInfo* target = nullptr;
        if (i.call == CallKind::Internal) {
          target = program.dispatch(contract, i.function->name(), i.function->arity());
        } else {
          const auto& f = p.frames.back();
          const ContractInfo* from = f.inv ? f.inv->fn->owner : &contract;
          target = program.super_dispatch(contract, *from, i.function->name(), i.function->arity());
        }
        if (!target || !target->def->body) throw std::logic_error("call to unimplemented function");
        bool transaction = p.frames.back().rule;
        for (auto& [q, args] : eval_list(std::move(p), e.operands, 1, c)) {
          if (transaction) {
            Term value = q.st.env.value;
            if (target->def->mutability != Mutability::Payable && value && !is_false(eq(value, int_const(0))))
              revert_if(q, lnot(eq(value, int_const(0))), "non-payable function received value");
            for (auto& r : invoke(std::move(q), *target, args, 0)) out.push_back(std::move(r));
          } else {
            for (auto& r : invoke(std::move(q), *target, args, q.depth + 1)) out.push_back(std::move(r));
          }
        }
        return out;
      }
      case CallKind::None: break;
    }
    throw std::logic_error("unsupported call");
  }

  Value external_result(SymState& st, const TypePtr& t, const std::string& origin) {
    if (t->is_value()) return Value::scalar(oracle(st, t, origin, "external", origin), t);
    Value v = fresh_value(st, t, origin);
    return v;
  }

  static Value pack(std::vector<Value> vs, const TypePtr& type) {
    if (vs.empty()) return Value{};
    if (vs.size() == 1) return std::move(vs[0]);
    Value t;
    t.kind = Value::Kind::Tuple;
    t.items = std::move(vs);
    t.type = type;
    return t;
  }

  Value convert(const Value& v, const TypePtr& target) {
    if (v.kind != Value::Kind::Scalar || !target->is_value()) return v;
    const Type& from = *v.type;
    Term t = v.term;
    auto integral = [](const Type& ty) {
      return ty.kind == TypeKind::Uint || ty.kind == TypeKind::Int || ty.kind == TypeKind::Address ||
             ty.kind == TypeKind::Contract || ty.kind == TypeKind::FixedBytes;
    };
    if (integral(*target) && target->kind != TypeKind::FixedBytes && t->sort->kind == SortKind::Int) {
      bool fits = from.kind != TypeKind::IntLiteral && integral(from) && type_min(from) >= type_min(*target) &&
                  type_max(from) <= type_max(*target);
      if (t->op == Op::IntConst)
        fits = t->value >= type_min(*target) && t->value <= type_max(*target);
      if (!fits) t = wrap(t, *target);
    }
    return Value::scalar(t, target);
  }

  Results push_pop(Path p, const Expr& e, const ExprInfo& i, Ctx c) {
    Results out;
    const Expr& base_expr = *e.operands[0]->operands[0];
    for (auto& [q, base] : eval(std::move(p), base_expr, c)) {
      Loc arr = base.loc;
      Loc len_loc = child(arr, ".length", types::uint_t());
      TypePtr elem = arr.type->element;
      if (i.call == CallKind::Push) {
        for (auto& [r, vs] : eval_list(std::move(q), e.operands, 1, c)) {
          Term len = read(r.st, len_loc);
          Loc slot = child(arr, "[]", elem, &len);
          if (vs.empty()) {
            if (elem->is_value())
              write(r.st, slot, default_term(value_sort(*elem)));
            else
              write_default(r.st, slot);
          } else {
            assign_loc(r.st, slot, vs[0]);
          }
          write(r.st, len_loc, add(len, int_const(1)));
          Value res;
          if (vs.empty()) res = elem->is_value() ? Value::scalar(read(r.st, slot), elem) : Value::ref(slot);
          out.push_back({std::move(r), res});
        }
      } else {
        Term len = read(q.st, len_loc);
        revert_if(q, eq(len, int_const(0)), "pop on empty array");
        Term last = sub(len, int_const(1));
        Loc slot = child(arr, "[]", elem, &last);
        if (elem->is_value())
          write(q.st, slot, default_term(value_sort(*elem)));
        else
          write_default(q.st, slot);
        write(q.st, len_loc, last);
        out.push_back({std::move(q), Value{}});
      }
    }
    return out;
  }

  // ---- functions ----
  std::shared_ptr<Invocation> make_invocation(const FunctionInfo& fn, const std::vector<Value>& args) {
    auto inv = std::make_shared<Invocation>();
    inv->fn = &fn;
    inv->args = args;
    for (const auto& m : fn.def->modifiers) {
      const FunctionInfo* mi = program.modifier(contract, m.name);
      if (!mi) continue;  // base constructor arguments
      inv->modifiers.push_back(mi);
      inv->mod_calls.push_back(&m);
    }
    return inv;
  }

  Frame param_frame(SymState& st, const FunctionInfo& fn, const std::vector<Value>& args,
                    std::shared_ptr<const Invocation> inv, size_t level) {
    Frame f;
    f.scopes.emplace_back();
    f.inv = std::move(inv);
    f.level = level;
    const auto& ps = fn.def->params;
    for (size_t k = 0; k < ps.size(); ++k)
      if (!ps[k].name.empty()) f.scopes[0][ps[k].name] = coerce(st, args.at(k), fn.param_types[k], ps[k].location);
    return f;
  }

  Results invoke(Path p, const FunctionInfo& fn, const std::vector<Value>& args, int depth) {
    Results out;
    if (depth > opts.call_depth) {
      havoc(p.st);
      std::vector<Value> rets;
      for (const auto& rt : fn.return_types) rets.push_back(fresh_value(p.st, rt, "havoc." + fn.name()));
      out.push_back({std::move(p), pack(std::move(rets), nullptr)});
      return out;
    }
    int saved = p.depth;
    p.depth = depth;
    auto inv = make_invocation(fn, args);
    p.rets.push_back(Value{});
    for (auto& q : run_level(std::move(p), inv, 0)) {
      Value v = std::move(q.rets.back());
      q.rets.pop_back();
      q.depth = saved;
      out.push_back({std::move(q), std::move(v)});
    }
    return out;
  }

  void havoc(SymState& st) {
    for (const auto* sv : contract.state_vars) {
      if (sv->def->constant) continue;
      for (const auto& lf : leaves_of(program, sv->type)) {
        std::string key = sv->name + lf.suffix;
        st.store[key] = var(fresh_name(key), leaf_sort(lf, 0));
        if (lf.depth == 0) constrain(st, st.store[key], *lf.type);
      }
    }
    st.imprecise = true;
  }

  Paths run_level(Path p, std::shared_ptr<const Invocation> inv, size_t level) {
    const FunctionInfo& fn = *inv->fn;
    Paths done;
    if (level < inv->modifiers.size()) {
      const FunctionInfo& mod = *inv->modifiers[level];
      const ModifierInvocation& mc = *inv->mod_calls[level];
      p.frames.push_back(param_frame(p.st, fn, inv->args, inv, level));
      for (auto& [q, margs] : eval_list(std::move(p), mc.args, 0, Ctx{})) {
        q.frames.pop_back();
        q.frames.push_back(param_frame(q.st, mod, margs, inv, level));
        for (auto& r : exec(std::move(q), *mod.def->body)) {
          r.frames.pop_back();
          r.flow = Flow::Normal;
          done.push_back(std::move(r));
        }
      }
      return done;
    }
    Frame f = param_frame(p.st, fn, inv->args, inv, level);
    for (size_t k = 0; k < fn.def->returns.size(); ++k) {
      const auto& rp = fn.def->returns[k];
      if (!rp.name.empty()) f.scopes[0][rp.name] = default_value(p.st, fn.return_types[k]);
    }
    p.frames.push_back(std::move(f));
    for (auto& r : exec(std::move(p), *fn.def->body)) {
      if (r.rets.back().kind == Value::Kind::None && !fn.return_types.empty()) {
        std::vector<Value> vs;
        for (size_t k = 0; k < fn.def->returns.size(); ++k) {
          const auto& rp = fn.def->returns[k];
          if (rp.name.empty())
            vs.push_back(default_value(r.st, fn.return_types[k]));
          else
            vs.push_back(r.frames.back().scopes[0][rp.name]);
        }
        r.rets.back() = pack(std::move(vs), nullptr);
      }
      r.frames.pop_back();
      r.flow = Flow::Normal;
      done.push_back(std::move(r));
    }
    return done;
  }

  // ---- statements ----
  Paths exec_list(Path p, const std::vector<StmtPtr>& stmts) {
    Paths cur;
    cur.push_back(std::move(p));
    for (const auto& s : stmts) {
      Paths next;
      for (auto& q : cur) {
        if (q.flow != Flow::Normal) {
          next.push_back(std::move(q));
          continue;
        }
        for (auto& r : exec(std::move(q), *s)) next.push_back(std::move(r));
      }
      cur = std::move(next);
    }
    return cur;
  }

  Paths scoped(Path p, const std::function<Paths(Path)>& body) {
    p.frames.back().scopes.emplace_back();
    Paths out = body(std::move(p));
    for (auto& q : out) q.frames.back().scopes.pop_back();
    return out;
  }

  Paths exec(Path p, const Stmt& s) {
    Paths out;
    switch (s.kind) {
      case StmtKind::Block:
        return scoped(std::move(p), [&](Path q) { return exec_list(std::move(q), s.children); });
      case StmtKind::Unchecked: {
        p.frames.back().unchecked++;
        out = scoped(std::move(p), [&](Path q) { return exec_list(std::move(q), s.children); });
        for (auto& q : out) q.frames.back().unchecked--;
        return out;
      }
      case StmtKind::VarDecl:
        return var_decl(std::move(p), s);
      case StmtKind::Expr:
      case StmtKind::Emit:
        for (auto& [q, v] : eval(std::move(p), *s.expr, Ctx{})) out.push_back(std::move(q));
        return out;
      case StmtKind::If:
        for (auto& [q, cv] : eval(std::move(p), *s.expr, Ctx{})) {
          for (auto& [r, branch] : split(std::move(q), value_term(cv))) {
            const Stmt* body = branch ? s.children[0].get() : (s.children.size() > 1 ? s.children[1].get() : nullptr);
            if (!body) {
              out.push_back(std::move(r));
              continue;
            }
            for (auto& x : exec(std::move(r), *body)) out.push_back(std::move(x));
          }
        }
        return out;
      case StmtKind::While:
        return loop(std::move(p), s.expr.get(), nullptr, *s.children[0]);
      case StmtKind::For:
        return scoped(std::move(p), [&](Path q) {
          Paths init;
          if (s.children[0])
            init = exec(std::move(q), *s.children[0]);
          else
            init.push_back(std::move(q));
          Paths res;
          for (auto& r : init)
            for (auto& x : loop(std::move(r), s.expr.get(), s.expr2.get(), *s.children[1])) res.push_back(std::move(x));
          return res;
        });
      case StmtKind::Return: {
        auto finish = [&](Path q, Value v) {
          if (!q.rets.empty() && v.kind != Value::Kind::None) {
            const auto& f = q.frames.back();
            const FunctionInfo* fn = f.inv ? f.inv->fn : nullptr;
            if (fn && fn->return_types.size() == 1) {
              v = coerce(q.st, v, fn->return_types[0], fn->def->returns[0].location);
            } else if (fn && v.kind == Value::Kind::Tuple) {
              for (size_t k = 0; k < v.items.size() && k < fn->return_types.size(); ++k)
                v.items[k] = coerce(q.st, v.items[k], fn->return_types[k], fn->def->returns[k].location);
            }
            q.rets.back() = std::move(v);
          }
          q.flow = Flow::Return;
          out.push_back(std::move(q));
        };
        if (!s.expr) {
          finish(std::move(p), Value{});
          return out;
        }
        for (auto& [q, v] : eval(std::move(p), *s.expr, Ctx{})) finish(std::move(q), std::move(v));
        return out;
      }
      case StmtKind::Placeholder: {
        const Frame& f = p.frames.back();
        auto inv = f.inv;
        size_t level = f.level;
        for (auto& q : run_level(std::move(p), inv, level + 1)) out.push_back(std::move(q));
        return out;
      }
      case StmtKind::Break:
        p.flow = Flow::Break;
        out.push_back(std::move(p));
        return out;
      case StmtKind::Continue:
        p.flow = Flow::Continue;
        out.push_back(std::move(p));
        return out;
    }
    return out;
  }

  Paths loop(Path p, const Expr* cond, const Expr* post, const Stmt& body) {
    Paths exits, active;
    active.push_back(std::move(p));
    for (int iter = 0; iter <= opts.loop_bound && !active.empty(); ++iter) {
      Paths next;
      for (auto& q : active) {
        std::vector<std::pair<Path, bool>> branches;
        if (cond) {
          for (auto& [r, cv] : eval(std::move(q), *cond, Ctx{}))
            for (auto& b : split(std::move(r), value_term(cv))) branches.push_back(std::move(b));
        } else {
          branches.push_back({std::move(q), true});
        }
        for (auto& [r, enter] : branches) {
          if (!enter) {
            exits.push_back(std::move(r));
            continue;
          }
          if (iter == opts.loop_bound) {
            r.st.truncated = true;
            exits.push_back(std::move(r));
            continue;
          }
          for (auto& x : exec(std::move(r), body)) {
            if (x.flow == Flow::Break) {
              x.flow = Flow::Normal;
              exits.push_back(std::move(x));
              continue;
            }
            if (x.flow == Flow::Return) {
              exits.push_back(std::move(x));
              continue;
            }
            x.flow = Flow::Normal;
            if (post) {
              for (auto& [y, v] : eval(std::move(x), *post, Ctx{})) next.push_back(std::move(y));
            } else {
              next.push_back(std::move(x));
            }
          }
        }
      }
      active = std::move(next);
    }
    return exits;
  }

  Paths var_decl(Path p, const Stmt& s) {
    Paths out;
    bool rule = p.frames.back().rule;
    if (!s.expr) {
      for (const auto& d : s.decls) {
        if (!d) continue;
        TypePtr t = type_of(*d->type);
        Value v;
        if (rule && !d->name.empty() && d->name[0] == '$' && t->is_value()) {
          Term sym = oracle(p.st, t, d->name, "symbolic", "");
          v = Value::scalar(sym, t);
          if (const auto* sv = contract.state_var(d->name.substr(1)); sv && sv->type->is_value() && !sv->def->constant)
            p.st.assume(eq(sym, read(p.st, state_loc(*sv, false))));
        } else {
          v = default_value(p.st, t);
        }
        declare(p, d->name, std::move(v));
      }
      out.push_back(std::move(p));
      return out;
    }
    for (auto& [q, v] : eval(std::move(p), *s.expr, Ctx{})) {
      if (s.decls.size() == 1 && s.decls[0]) {
        const auto& d = *s.decls[0];
        TypePtr t = type_of(*d.type);
        declare(q, d.name, bind_value(q.st, v, t, d.location));
      } else {
        for (size_t k = 0; k < s.decls.size(); ++k) {
          if (!s.decls[k]) continue;
          const auto& d = *s.decls[k];
          TypePtr t = type_of(*d.type);
          declare(q, d.name, bind_value(q.st, v.items.at(k), t, d.location));
        }
      }
      out.push_back(std::move(q));
    }
    return out;
  }

  Value bind_value(SymState& st, const Value& v, const TypePtr& t, DataLocation loc) {
    if (t->is_value()) return Value::scalar(value_term(v), t);
    return coerce(st, v, t, loc);
  }

  // ---- entry points ----
  std::vector<Outcome> collect(Paths normal) {
    std::vector<Outcome> out;
    for (auto& p : normal) {
      Outcome o;
      o.kind = OutcomeKind::Normal;
      o.ret = p.rets.empty() ? Value{} : p.rets.back();
      o.state = std::move(p.st);
      out.push_back(std::move(o));
    }
    for (size_t k = 0; k < reverted.size(); ++k) {
      Outcome o;
      o.kind = OutcomeKind::Reverted;
      o.state = std::move(reverted[k].st);
      o.state.obligations.clear();
      o.reason = reasons[k];
      out.push_back(std::move(o));
    }
    reverted.clear();
    reasons.clear();
    return out;
  }

  Path start(const SymState& st, bool rule) {
    reverted.clear();
    reasons.clear();
    path_count = 1;
    Path p;
    p.st = st;
    Frame f;
    f.scopes.emplace_back();
    f.rule = rule;
    p.frames.push_back(std::move(f));
    return p;
  }

  std::vector<Outcome> call_entry(const SymState& st, const FunctionInfo& fn, const std::vector<Value>& args) {
    Path p = start(st, false);
    if (fn.def->mutability != Mutability::Payable && p.st.env.value)
      revert_if(p, lnot(eq(p.st.env.value, int_const(0))), "non-payable function received value");
    Paths normal;
    for (auto& [q, v] : invoke(std::move(p), fn, args, 0)) {
      q.rets.push_back(std::move(v));
      normal.push_back(std::move(q));
    }
    return collect(std::move(normal));
  }

  std::vector<Outcome> constructor(const SymState& st, const std::vector<Value>& args) {
    Path p = start(st, false);
    const auto& lin = contract.linearization;
    // base constructor arguments, resolved top-down
    std::map<const ContractInfo*, std::vector<Value>> ctor_args;
    ctor_args[&contract] = args;
    std::vector<std::pair<Path, std::map<const ContractInfo*, std::vector<Value>>>> acc{{std::move(p), ctor_args}};
    for (const ContractInfo* c : lin) {
      decltype(acc) next;
      for (auto& [q, known] : acc) {
        const FunctionInfo* ctor = c->constructor();
        std::vector<std::pair<const ContractInfo*, const std::vector<ExprPtr>*>> specs;
        for (const auto& b : c->def->bases)
          if (!b.args.empty()) specs.push_back({program.contract(b.name), &b.args});
        if (ctor)
          for (const auto& m : ctor->def->modifiers)
            if (program.contract(m.name)) specs.push_back({program.contract(m.name), &m.args});
        std::vector<std::pair<Path, std::map<const ContractInfo*, std::vector<Value>>>> local{{std::move(q), known}};
        for (const auto& [base, exprs] : specs) {
          decltype(local) next_local;
          for (auto& [r, kn] : local) {
            Frame f;
            if (ctor && kn.count(c)) f = param_frame(r.st, *ctor, kn[c], nullptr, 0);
            else f.scopes.emplace_back();
            r.frames.push_back(std::move(f));
            for (auto& [x, vs] : eval_list(std::move(r), *exprs, 0, Ctx{})) {
              x.frames.pop_back();
              auto kn2 = kn;
              kn2[base] = vs;
              next_local.push_back({std::move(x), std::move(kn2)});
            }
          }
          local = std::move(next_local);
        }
        for (auto& l : local) next.push_back(std::move(l));
      }
      acc = std::move(next);
    }
    Paths cur;
    std::vector<std::map<const ContractInfo*, std::vector<Value>>> cargs;
    for (auto& [q, kn] : acc) {
      cur.push_back(std::move(q));
      cargs.push_back(std::move(kn));
    }
    for (auto it = lin.rbegin(); it != lin.rend(); ++it) {
      const ContractInfo* c = *it;
      Paths next;
      std::vector<std::map<const ContractInfo*, std::vector<Value>>> next_args;
      for (size_t k = 0; k < cur.size(); ++k) {
        Paths ps;
        ps.push_back(std::move(cur[k]));
        for (const auto& sv : c->own_vars) {
          if (sv->def->constant || !sv->def->init) continue;
          Paths after;
          for (auto& q : ps)
            for (auto& [r, v] : eval(std::move(q), *sv->def->init, Ctx{})) {
              assign_loc(r.st, state_loc(*sv, false), v);
              after.push_back(std::move(r));
            }
          ps = std::move(after);
        }
        const FunctionInfo* ctor = c->constructor();
        for (auto& q : ps) {
          if (!ctor || !ctor->def->body) {
            next.push_back(std::move(q));
            next_args.push_back(cargs[k]);
            continue;
          }
          auto a = cargs[k].count(c) ? cargs[k].at(c) : std::vector<Value>{};
          if (a.size() != ctor->arity()) throw std::logic_error("missing constructor arguments for " + c->name);
          for (auto& [r, v] : invoke(std::move(q), *ctor, a, 0)) {
            next.push_back(std::move(r));
            next_args.push_back(cargs[k]);
          }
        }
      }
      cur = std::move(next);
      cargs = std::move(next_args);
    }
    return collect(std::move(cur));
  }

  std::vector<Outcome> rule(const SymState& st) {
    if (!spec || spec->unit().kind != SpecKind::Rule) throw std::logic_error("run_rule needs a rule");
    SymState s = st;
    s.old_store = s.store;
    Path p = start(s, true);
    for (const auto& prm : spec->unit().params) {
      TypePtr t = type_of(*prm.type);
      Value v;
      if (t->is_value()) {
        Term sym = oracle(p.st, t, prm.name, "param", "");
        v = Value::scalar(sym, t);
      } else {
        v = fresh_value(p.st, t, prm.name);
      }
      declare(p, prm.name, std::move(v));
    }
    Paths normal = exec_list(std::move(p), spec->unit().body);
    return collect(std::move(normal));
  }

  Term condition(SymState& st, const Expr& e, const std::map<std::string, Value>& bindings, bool entry) {
    Path p;
    p.st = std::move(st);
    Frame f;
    f.scopes.emplace_back(bindings.begin(), bindings.end());
    p.frames.push_back(std::move(f));
    Ctx c;
    c.spec = true;
    c.old = entry;
    auto rs = eval(std::move(p), e, c);
    if (rs.size() != 1) throw std::logic_error("specification condition forked");
    st = std::move(rs[0].p.st);
    return value_term(rs[0].v);
  }
};

// ---------------------------------------------------------------------------

Executor::Executor(const ResolvedProgram& program, const ResolvedSpec* spec, ExecOptions options)
    : impl_(std::make_unique<Impl>(program, spec, options)) {}

Executor::~Executor() = default;

const ContractInfo& Executor::contract() const { return impl_->contract; }
const ExecOptions& Executor::options() const { return impl_->opts; }
std::string Executor::fresh_name(const std::string& base) { return impl_->fresh_name(base); }

SymState Executor::init_state() {
  SymState st;
  for (const auto* sv : impl_->contract.state_vars) {
    if (sv->def->constant) continue;
    for (const auto& lf : leaves_of(impl_->program, sv->type)) {
      std::string key = sv->name + lf.suffix;
      Term t = var(impl_->fresh_name(key), leaf_sort(lf, 0));
      st.store[key] = t;
      if (lf.depth == 0) impl_->constrain(st, t, *lf.type);
    }
  }
  st.old_store = st.store;
  return st;
}

SymState Executor::default_state() {
  SymState st;
  for (const auto* sv : impl_->contract.state_vars) {
    if (sv->def->constant) continue;
    for (const auto& lf : leaves_of(impl_->program, sv->type))
      st.store[sv->name + lf.suffix] = default_term(leaf_sort(lf, 0));
  }
  st.old_store = st.store;
  return st;
}

Env Executor::fresh_env(SymState& st, bool payable) { return impl_->fresh_env(st, payable); }

Value Executor::fresh_value(SymState& st, const TypePtr& type, const std::string& name) {
  return impl_->fresh_value(st, type, name);
}

std::vector<Outcome> Executor::run_constructor(const SymState& st, const std::vector<Value>& args) {
  return impl_->constructor(st, args);
}

std::vector<Outcome> Executor::call(const SymState& st, const FunctionInfo& fn, const std::vector<Value>& args) {
  return impl_->call_entry(st, fn, args);
}

std::vector<Outcome> Executor::run_rule(const SymState& st) { return impl_->rule(st); }

Term Executor::condition(SymState& st, const Expr& e, const std::map<std::string, Value>& bindings,
                         bool entry_state) {
  return impl_->condition(st, e, bindings, entry_state);
}

Term Executor::read(SymState& st, const Loc& loc) { return impl_->read(st, loc); }

}  // namespace ppgpt::sym
