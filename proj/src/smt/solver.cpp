#include "ppgpt/smt/solver.hpp"

#include <chrono>
#include <map>
#include <sstream>

#include "ppgpt/common/error.hpp"

namespace ppgpt::smt {

using namespace sym;

// ---- model values ----

ModelValue ModelValue::of_int(BigInt v) {
  ModelValue m;
  m.kind = Kind::Int;
  m.i = std::move(v);
  return m;
}

ModelValue ModelValue::of_bool(bool v) {
  ModelValue m;
  m.kind = Kind::Bool;
  m.b = v;
  return m;
}

ModelValue ModelValue::default_of(const Sort& s) {
  switch (s.kind) {
    case SortKind::Int: return of_int(0);
    case SortKind::Bool: return of_bool(false);
    case SortKind::Array: {
      ModelValue m;
      m.kind = Kind::Array;
      auto a = std::make_shared<ArrayValue>();
      a->fallback = std::make_shared<ModelValue>(default_of(*s.element));
      m.array = a;
      return m;
    }
  }
  return of_int(0);
}

namespace {

ModelValue eval_sexpr(const SExpr& e, const std::map<std::string, ModelValue>& env);

}  // namespace

ModelValue ModelValue::select(const BigInt& index) const {
  if (kind != Kind::Array || !array) throw SolverError("select on a non-array model value");
  auto it = array->entries.find(index);
  if (it != array->entries.end()) return it->second;
  if (array->lambda) {
    const SExpr& lam = *array->lambda;
    std::map<std::string, ModelValue> env;
    env[lam.at(1).at(0).at(0).text] = of_int(index);
    return eval_sexpr(lam.at(2), env);
  }
  return *array->fallback;
}

ModelValue ModelValue::store(const BigInt& index, const ModelValue& v) const {
  if (kind != Kind::Array || !array) throw SolverError("store on a non-array model value");
  auto a = std::make_shared<ArrayValue>(*array);
  a->entries[index] = v;
  ModelValue m = *this;
  m.array = a;
  return m;
}

std::string ModelValue::str() const {
  switch (kind) {
    case Kind::Int: return i.str();
    case Kind::Bool: return b ? "true" : "false";
    case Kind::Array: {
      std::string s = "[";
      bool first = true;
      for (const auto& [k, v] : array->entries) {
        if (!first) s += ", ";
        first = false;
        s += k.str() + ": " + v.str();
      }
      if (array->fallback) s += std::string(first ? "" : ", ") + "*: " + array->fallback->str();
      return s + "]";
    }
  }
  return "?";
}

const char* to_string(Status s) {
  switch (s) {
    case Status::Sat: return "sat";
    case Status::Unsat: return "unsat";
    case Status::Unknown: return "unknown";
  }
  return "?";
}

namespace {

BigInt euclid_div(const BigInt& a, const BigInt& b) {
  if (b == 0) return 0;
  BigInt q = a / b;
  BigInt r = a - q * b;
  if (r < 0) q += b > 0 ? -1 : 1;
  return q;
}

BigInt euclid_mod(const BigInt& a, const BigInt& b) {
  if (b == 0) return a;
  BigInt r = a % b;
  if (r < 0) r += b > 0 ? b : -b;
  return r;
}

ModelValue eval_sexpr(const SExpr& e, const std::map<std::string, ModelValue>& env) {
  if (e.atom) {
    if (e.text == "true") return ModelValue::of_bool(true);
    if (e.text == "false") return ModelValue::of_bool(false);
    auto it = env.find(e.text);
    if (it != env.end()) return it->second;
    try {
      return ModelValue::of_int(BigInt(e.text));
    } catch (const std::exception&) {
      throw SolverError("cannot evaluate model atom '" + e.text + "'");
    }
  }
  if (e.size() == 0) throw SolverError("empty model expression");
  // ((as const (Array Int T)) v)
  if (!e.at(0).atom) {
    const SExpr& h = e.at(0);
    if (h.size() == 3 && h.at(0).is("as") && h.at(1).is("const")) {
      ModelValue m;
      m.kind = ModelValue::Kind::Array;
      auto a = std::make_shared<ArrayValue>();
      a->fallback = std::make_shared<ModelValue>(eval_sexpr(e.at(1), env));
      m.array = a;
      return m;
    }
    throw SolverError("unsupported model expression " + to_string(e));
  }
  const std::string& op = e.at(0).text;
  auto arg = [&](size_t k) { return eval_sexpr(e.at(k), env); };
  if (op == "-" && e.size() == 2) return ModelValue::of_int(-arg(1).i);
  if (op == "+" || op == "-" || op == "*") {
    BigInt acc = arg(1).i;
    for (size_t k = 2; k < e.size(); ++k) {
      BigInt v = arg(k).i;
      acc = op == "+" ? acc + v : op == "-" ? acc - v : acc * v;
    }
    return ModelValue::of_int(acc);
  }
  if (op == "div") return ModelValue::of_int(euclid_div(arg(1).i, arg(2).i));
  if (op == "mod") return ModelValue::of_int(euclid_mod(arg(1).i, arg(2).i));
  if (op == "/") {
    BigInt b = arg(2).i;
    if (b == 0) throw SolverError("division by zero in model");
    return ModelValue::of_int(arg(1).i / b);
  }
  if (op == "=") {
    ModelValue a = arg(1), b = arg(2);
    if (a.kind == ModelValue::Kind::Bool) return ModelValue::of_bool(a.b == b.b);
    return ModelValue::of_bool(a.i == b.i);
  }
  if (op == "<") return ModelValue::of_bool(arg(1).i < arg(2).i);
  if (op == "<=") return ModelValue::of_bool(arg(1).i <= arg(2).i);
  if (op == ">") return ModelValue::of_bool(arg(1).i > arg(2).i);
  if (op == ">=") return ModelValue::of_bool(arg(1).i >= arg(2).i);
  if (op == "not") return ModelValue::of_bool(!arg(1).b);
  if (op == "and" || op == "or") {
    bool is_and = op == "and";
    for (size_t k = 1; k < e.size(); ++k)
      if (arg(k).b != is_and) return ModelValue::of_bool(!is_and);
    return ModelValue::of_bool(is_and);
  }
  if (op == "ite") return arg(1).b ? arg(2) : arg(3);
  if (op == "store") return arg(1).store(arg(2).i, arg(3));
  if (op == "select") return arg(1).select(arg(2).i);
  if (op == "lambda") {
    ModelValue m;
    m.kind = ModelValue::Kind::Array;
    auto a = std::make_shared<ArrayValue>();
    a->lambda = std::make_shared<SExpr>(e);
    a->fallback = std::make_shared<ModelValue>(ModelValue::of_int(0));
    m.array = a;
    return m;
  }
  if (op == "let") {
    auto inner = env;
    for (const auto& b : e.at(1).items) inner[b->at(0).text] = eval_sexpr(b->at(1), env);
    return eval_sexpr(e.at(2), inner);
  }
  throw SolverError("unsupported model operator '" + op + "'");
}

// ---- encoding ----

bool simple_symbol(const std::string& s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  return true;
}

std::string symbol(const std::string& s) { return simple_symbol(s) ? s : "|" + s + "|"; }

void emit(std::ostream& os, const Term& t) {
  auto nary = [&](const char* op) {
    os << "(" << op;
    for (const auto& a : t->args) {
      os << " ";
      emit(os, a);
    }
    os << ")";
  };
  switch (t->op) {
    case Op::Var: os << symbol(t->name); break;
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
    case Op::TDiv: case Op::TMod: {
      // truncating division from Euclidean: q = sign-corrected div of magnitudes
      std::ostringstream a, b;
      emit(a, t->args[0]);
      emit(b, t->args[1]);
      std::string A = a.str(), B = b.str();
      std::string absA = "(ite (>= " + A + " 0) " + A + " (- " + A + "))";
      // a literal divisor must stay a literal or the linear logic rejects it
      const Term& d = t->args[1];
      std::string absB = d->op == Op::IntConst ? (d->value < 0 ? BigInt(-d->value) : d->value).str()
                                               : "(ite (>= " + B + " 0) " + B + " (- " + B + "))";
      std::string q = "(div " + absA + " " + absB + ")";
      std::string same = "(= (>= " + A + " 0) (>= " + B + " 0))";
      std::string tq = "(ite " + same + " " + q + " (- " + q + "))";
      if (t->op == Op::TDiv)
        os << tq;
      else
        os << "(- " << A << " (* " << B << " " << tq << "))";
      break;
    }
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
      emit(os, t->args[0]);
      os << ")";
      break;
    case Op::Apply: nary(t->name.c_str()); break;
  }
}

std::string emit(const Term& t) {
  std::ostringstream os;
  emit(os, t);
  return os.str();
}

struct Query {
  std::string script;
  std::vector<Term> vars;
  std::vector<Term> applies;
};

Query build(const std::vector<Term>& assertions, bool want_model) {
  Query q;
  TermSet seen_vars, seen_apps;
  bool nonlinear = false;
  for (const auto& a : assertions) {
    collect_vars(a, q.vars, seen_vars);
    collect_applies(a, q.applies, seen_apps);
    nonlinear = nonlinear || is_nonlinear(a);
  }
  std::ostringstream os;
  os << "(set-option :produce-models " << (want_model ? "true" : "false") << ")\n";
  os << "(set-logic " << (nonlinear ? "QF_AUFNIA" : "QF_AUFLIA") << ")\n";
  for (const auto& v : q.vars) os << "(declare-fun " << symbol(v->name) << " () " << sort_string(*v->sort) << ")\n";
  std::map<std::string, std::vector<Term>> by_fn;
  for (const auto& a : q.applies) by_fn[a->name].push_back(a);
  for (const auto& [fn, apps] : by_fn) {
    os << "(declare-fun " << fn << " (";
    for (size_t k = 0; k < apps[0]->args.size(); ++k) os << (k ? " " : "") << "Int";
    os << ") Int)\n";
  }
  for (const auto& a : assertions) os << "(assert " << emit(a) << ")\n";
  // injectivity over the applications that occur
  for (const auto& [fn, apps] : by_fn) {
    for (size_t x = 0; x < apps.size(); ++x)
      for (size_t y = x + 1; y < apps.size(); ++y) {
        std::vector<Term> same;
        for (size_t k = 0; k < apps[x]->args.size(); ++k) same.push_back(eq(apps[x]->args[k], apps[y]->args[k]));
        Term ax = implies(eq(apps[x], apps[y]), land(same));
        os << "(assert " << emit(ax) << ")\n";
      }
  }
  os << "(check-sat)\n";
  if (want_model && (!q.vars.empty() || !q.applies.empty())) {
    os << "(get-value (";
    bool first = true;
    for (const auto& v : q.vars) {
      os << (first ? "" : " ") << symbol(v->name);
      first = false;
    }
    for (const auto& a : q.applies) {
      os << (first ? "" : " ") << emit(a);
      first = false;
    }
    os << "))\n";
  }
  os << "(exit)\n";
  q.script = os.str();
  return q;
}

}  // namespace

std::string encode(const std::vector<Term>& assertions, bool want_model) { return build(assertions, want_model).script; }

// ---- ground evaluation ----

ModelValue Model::eval(const Term& t) const {
  auto a = [&](size_t k) { return eval(t->args[k]); };
  switch (t->op) {
    case Op::Var: {
      auto it = vars.find(t->name);
      return it == vars.end() ? ModelValue::default_of(*t->sort) : it->second;
    }
    case Op::IntConst: return ModelValue::of_int(t->value);
    case Op::BoolConst: return ModelValue::of_bool(t->bval);
    case Op::Add: return ModelValue::of_int(a(0).i + a(1).i);
    case Op::Sub: return ModelValue::of_int(a(0).i - a(1).i);
    case Op::Mul: return ModelValue::of_int(a(0).i * a(1).i);
    case Op::Div: return ModelValue::of_int(euclid_div(a(0).i, a(1).i));
    case Op::Mod: return ModelValue::of_int(euclid_mod(a(0).i, a(1).i));
    case Op::TDiv: {
      BigInt d = a(1).i;
      return ModelValue::of_int(d == 0 ? BigInt(0) : BigInt(a(0).i / d));
    }
    case Op::TMod: {
      BigInt d = a(1).i;
      return ModelValue::of_int(d == 0 ? a(0).i : BigInt(a(0).i % d));
    }
    case Op::Neg: return ModelValue::of_int(-a(0).i);
    case Op::Eq: {
      ModelValue x = a(0), y = a(1);
      if (x.kind == ModelValue::Kind::Bool) return ModelValue::of_bool(x.b == y.b);
      if (x.kind == ModelValue::Kind::Int) return ModelValue::of_bool(x.i == y.i);
      return ModelValue::of_bool(x.str() == y.str());
    }
    case Op::Lt: return ModelValue::of_bool(a(0).i < a(1).i);
    case Op::Le: return ModelValue::of_bool(a(0).i <= a(1).i);
    case Op::Not: return ModelValue::of_bool(!a(0).b);
    case Op::And: return ModelValue::of_bool(a(0).b && a(1).b);
    case Op::Or: return ModelValue::of_bool(a(0).b || a(1).b);
    case Op::Implies: return ModelValue::of_bool(!a(0).b || a(1).b);
    case Op::Ite: return a(0).b ? a(1) : a(2);
    case Op::Select: return a(0).select(a(1).i);
    case Op::Store: return a(0).store(a(1).i, a(2));
    case Op::ConstArray: {
      ModelValue m;
      m.kind = ModelValue::Kind::Array;
      auto arr = std::make_shared<ArrayValue>();
      arr->fallback = std::make_shared<ModelValue>(a(0));
      m.array = arr;
      return m;
    }
    case Op::Apply: {
      auto it = applies.find(sym::to_string(t));
      if (it != applies.end()) return ModelValue::of_int(it->second);
      return ModelValue::of_int(0);
    }
  }
  return ModelValue::of_int(0);
}

BigInt Model::eval_int(const Term& t) const { return eval(t).i; }
bool Model::eval_bool(const Term& t) const { return eval(t).b; }

// ---- solver process ----

Solver::Solver(SolverOptions options) : options_(std::move(options)) {}

Result Solver::check(const std::vector<Term>& assertions, bool want_model) const {
  auto t0 = std::chrono::steady_clock::now();
  Query q = build(assertions, want_model);
  std::vector<std::string> argv;
  std::istringstream words(options_.command);
  for (std::string w; words >> w;) argv.push_back(w);
  if (argv.empty()) throw SolverError("empty solver command");
  // z3 gets a soft limit too; anything else relies on the kill below
  std::string exe = argv[0].substr(argv[0].find_last_of('/') + 1);
  if (exe == "z3") argv.push_back("-t:" + std::to_string(options_.timeout_ms));
  ProcessResult pr = run_process(argv, q.script, options_.timeout_ms + 5000);
  Result r;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (pr.timed_out) {
    r.status = Status::Unknown;
    r.reason = "timeout";
    return r;
  }
  std::vector<SExprPtr> items;
  try {
    items = parse_sexprs(pr.out);
  } catch (const SolverError& e) {
    throw SolverError(std::string("malformed solver output: ") + e.what());
  }
  if (items.empty() || !items[0]->atom) throw SolverError("solver produced no answer: " + pr.err + pr.out);
  const std::string& ans = items[0]->text;
  if (ans == "unsat") {
    r.status = Status::Unsat;
    return r;
  }
  if (ans == "unknown" || ans == "timeout") {
    r.status = Status::Unknown;
    r.reason = ans == "timeout" ? "timeout" : "solver returned unknown";
    return r;
  }
  if (ans != "sat") throw SolverError("unexpected solver answer: " + to_string(*items[0]));
  r.status = Status::Sat;
  if (!want_model || (q.vars.empty() && q.applies.empty())) return r;
  if (items.size() < 2 || items[1]->atom) throw SolverError("solver did not return a model");
  const SExpr& vals = *items[1];
  if (vals.size() > 0 && vals.at(0).atom && vals.at(0).text == "error")
    throw SolverError("solver error: " + to_string(vals));
  size_t nv = q.vars.size();
  if (vals.size() != nv + q.applies.size()) throw SolverError("model has the wrong number of values");
  for (size_t k = 0; k < vals.size(); ++k) {
    const SExpr& pair = vals.at(k);
    if (pair.atom || pair.size() != 2) throw SolverError("malformed model entry " + to_string(pair));
    ModelValue v = eval_sexpr(pair.at(1), {});
    if (k < nv)
      r.model.vars[q.vars[k]->name] = v;
    else
      r.model.applies[sym::to_string(q.applies[k - nv])] = v.i;
  }
  return r;
}

}  // namespace ppgpt::smt
