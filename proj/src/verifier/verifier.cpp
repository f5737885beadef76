#include "ppgpt/verifier/verifier.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include "ppgpt/common/error.hpp"

namespace ppgpt::verify {

using namespace frontend;
using sym::Executor;
using sym::Outcome;
using sym::OutcomeKind;
using sym::SymState;
using sym::Term;

const char* to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::Proven: return "Proven";
    case VerdictKind::VacuouslyProven: return "VacuouslyProven";
    case VerdictKind::Violated: return "Violated";
    case VerdictKind::Unknown: return "Unknown";
  }
  return "?";
}

namespace {

BigInt num(const smt::Model& m, const Term& t) {
  smt::ModelValue v = m.eval(t);
  if (v.kind == smt::ModelValue::Kind::Bool) return v.b ? 1 : 0;
  return v.i;
}

// A calldata argument plus the memory it lives in, captured when it was created.
struct Arg {
  sym::Value value;
  std::map<std::string, Term> memory;
};

struct Step {
  const FunctionInfo* fn = nullptr;  // null for a constructor-less deployment
  std::vector<Arg> args;
  sym::Env env;
};

CValue concretize(const smt::Model& m, const std::map<std::string, Term>& mem, const std::string& key,
                  const TypePtr& t, std::vector<Term> idx) {
  auto at = [&](const std::string& k) {
    auto it = mem.find(k);
    if (it == mem.end()) throw ReplayError("argument leaf " + k + " is missing");
    Term x = it->second;
    for (const auto& i : idx) x = sym::select(x, i);
    return x;
  };
  if (t->kind == TypeKind::Array) {
    BigInt len = num(m, at(key + ".length"));
    if (len < 0 || len > 64) throw ReplayError("calldata array too long to replay");
    CValue c;
    c.is_array = true;
    for (BigInt k = 0; k < len; ++k) {
      auto sub = idx;
      sub.push_back(sym::int_const(k));
      c.items.push_back(concretize(m, mem, key + "[]", t->element, sub));
    }
    return c;
  }
  if (t->is_value()) return CValue::of(num(m, at(key)));
  throw ReplayError("calldata of type " + type_string(*t) + " cannot be replayed");
}

CValue concretize(const smt::Model& m, const Arg& a) {
  if (a.value.kind == sym::Value::Kind::Scalar) return CValue::of(num(m, a.value.term));
  return concretize(m, a.memory, a.value.loc.key(), a.value.type, {});
}

CEnv concretize(const smt::Model& m, const sym::Env& e) {
  return {num(m, e.sender), num(m, e.value), num(m, e.timestamp), num(m, e.number), num(m, e.origin)};
}

// Calls the rule body makes into the contract.
size_t count_rule_calls(const ResolvedSpec& spec) {
  size_t n = 0;
  std::function<void(const Expr&)> expr = [&](const Expr& e) {
    if (e.kind == ExprKind::Call) {
      const ExprInfo* i = spec.info(e);
      if (i && (i->call == CallKind::Internal || i->call == CallKind::Super)) ++n;
    }
    for (const auto& o : e.operands)
      if (o) expr(*o);
    for (const auto& o : e.options)
      if (o.value) expr(*o.value);
  };
  std::function<void(const Stmt&)> stmt = [&](const Stmt& s) {
    if (s.expr) expr(*s.expr);
    if (s.expr2) expr(*s.expr2);
    for (const auto& c : s.children)
      if (c) stmt(*c);
  };
  for (const auto& s : spec.unit().body) stmt(*s);
  return n;
}

// One checked transaction (function spec or invariant) from a state.
struct Candidate {
  SymState state;        // outcome state after evaluating the postconditions
  std::vector<Term> posts;
  std::vector<Span> spans;
};

struct Target {
  Step step;
  std::vector<Candidate> normal;
  std::vector<SymState> all;  // every outcome, for truncation checks
};

class Engine {
 public:
  Engine(const ResolvedProgram& program, const ResolvedSpec& spec, const VerifyOptions& opts)
      : program_(program), spec_(spec), opts_(opts), solver_(opts.solver) {}

  smt::Result check(const std::vector<Term>& ts, bool model = true) const { return solver_.check(ts, model); }

  bool feasible(const SymState& st) const {
    auto r = check({st.path_condition()}, false);
    return r.status != smt::Status::Unsat;
  }

  std::vector<const Expr*> pres() const {
    std::vector<const Expr*> out;
    const auto& u = spec_.unit();
    for (const auto& e : u.kind == SpecKind::Invariant ? u.exprs : u.pre) out.push_back(e.get());
    return out;
  }
  std::vector<const Expr*> posts() const {
    std::vector<const Expr*> out;
    const auto& u = spec_.unit();
    for (const auto& e : u.kind == SpecKind::Invariant ? u.exprs : u.post) out.push_back(e.get());
    return out;
  }

  // Fresh env and args, preconditions on entry, one call, postconditions per Normal outcome.
  Target run_target(Executor& ex, SymState st, const FunctionInfo& fn) const {
    Target t;
    t.step.fn = &fn;
    st.old_store = st.store;
    st.env = ex.fresh_env(st, fn.def->mutability == Mutability::Payable);
    t.step.env = st.env;
    std::map<std::string, sym::Value> bind;
    std::vector<sym::Value> args;
    bool fspec = spec_.unit().kind == SpecKind::FunctionSpec;
    for (size_t k = 0; k < fn.arity(); ++k) {
      std::string name = fspec && k < spec_.param_names.size() ? spec_.param_names[k] : fn.def->params[k].name;
      if (name.empty()) name = "arg" + std::to_string(k);
      sym::Value v = ex.fresh_value(st, fn.param_types[k], name);
      args.push_back(v);
      if (fspec) bind[name] = v;
      t.step.args.push_back({v, st.memory});
    }
    for (const Expr* p : pres()) st.assume(ex.condition(st, *p, bind, true));
    for (auto& o : ex.call(st, fn, args)) {
      t.all.push_back(o.state);
      if (o.kind != OutcomeKind::Normal) continue;
      Candidate c;
      c.state = o.state;
      auto b = bind;
      if (fspec) {
        const auto& rets = fn.def->returns;
        for (size_t k = 0; k < rets.size(); ++k) {
          if (rets[k].name.empty()) continue;
          if (rets.size() == 1) b[rets[k].name] = o.ret;
          else if (k < o.ret.items.size()) b[rets[k].name] = o.ret.items[k];
        }
      }
      for (const Expr* q : posts()) {
        c.posts.push_back(ex.condition(c.state, *q, b, false));
        c.spans.push_back(q->span);
      }
      t.normal.push_back(std::move(c));
    }
    return t;
  }

  struct Modular {
    bool witness = false;
    bool feasible = false;
    bool truncated = false;
    std::string unknown;
  };

  Modular modular_function(const FunctionInfo& fn) const {
    Executor ex(program_, &spec_, opts_.exec);
    Modular m;
    Target t = run_target(ex, ex.init_state(), fn);
    for (const auto& c : t.normal) {
      auto r = check({c.state.path_condition(), sym::lnot(sym::land(c.posts))}, false);
      if (r.status == smt::Status::Sat) {
        m.witness = m.feasible = true;
      } else if (r.status == smt::Status::Unknown) {
        m.unknown = r.reason;
      } else if (!m.feasible && feasible(c.state)) {
        m.feasible = true;
      }
    }
    for (const auto& s : t.all)
      if (s.truncated && !m.truncated && feasible(s)) m.truncated = true;
    return m;
  }

  Modular modular_rule() const {
    Executor ex(program_, &spec_, opts_.exec);
    Modular m;
    SymState st = ex.init_state();
    st.env = ex.fresh_env(st, true);
    for (const auto& o : ex.run_rule(st)) {
      if (o.state.truncated && !m.truncated && feasible(o.state)) m.truncated = true;
      if (o.kind != OutcomeKind::Normal) continue;
      Term pc = o.state.path_condition();
      for (const auto& ob : o.state.obligations) {
        auto r = check({pc, sym::lnot(ob.condition)}, false);
        if (r.status == smt::Status::Sat) m.witness = m.feasible = true;
        else if (r.status == smt::Status::Unknown) m.unknown = r.reason;
      }
      if (!m.feasible && feasible(o.state)) m.feasible = true;
    }
    return m;
  }

  Verdict decide(const Modular& m, const std::string& function) const {
    if (m.witness) {
      if (!opts_.bmc) return Verdict::unknown("unconfirmed", true);
      Verdict v = bmc(function);
      v.modular_violation = true;
      return v;
    }
    if (m.truncated) return Verdict::unknown("loop bound");
    if (!m.unknown.empty()) return Verdict::unknown(m.unknown);
    if (!m.feasible) return Verdict::vacuous();
    return Verdict::proven();
  }

  // ---- bounded model checking ----
  struct Node {
    SymState st;
    std::vector<Step> steps;
  };

  Verdict bmc(const std::string& function) const {
    sym::ExecOptions eo = opts_.exec;
    eo.max_array_length = opts_.bmc_array_length;
    Executor ex(program_, &spec_, eo);
    const ContractInfo& c = program_.main();
    bool rule = spec_.unit().kind == SpecKind::Rule;
    const FunctionInfo* target = nullptr;
    if (spec_.unit().kind == SpecKind::FunctionSpec) target = spec_.target;
    if (spec_.unit().kind == SpecKind::Invariant)
      for (const auto* f : program_.public_functions(c))
        if (f->signature() == function || f->name() == function) target = f;
    if (!rule && !target) throw Error("no function to check");

    int max_prefix = rule ? opts_.bmc_depth - static_cast<int>(count_rule_calls(spec_)) : opts_.bmc_depth - 1;
    if (max_prefix < 0) return Verdict::unknown("no reachable counterexample within depth");

    // deployment
    std::vector<Node> frontier;
    {
      SymState st = ex.default_state();
      const FunctionInfo* ctor = c.constructor();
      st.env = ex.fresh_env(st, ctor && ctor->def->mutability == Mutability::Payable);
      Step step;
      step.fn = ctor;
      step.env = st.env;
      std::vector<sym::Value> args;
      if (ctor)
        for (size_t k = 0; k < ctor->arity(); ++k) {
          std::string name = ctor->def->params[k].name.empty() ? "ctor" + std::to_string(k) : ctor->def->params[k].name;
          args.push_back(ex.fresh_value(st, ctor->param_types[k], name));
          step.args.push_back({args.back(), st.memory});
        }
      for (auto& o : ex.run_constructor(st, args))
        if (o.kind == OutcomeKind::Normal && feasible(o.state)) frontier.push_back({o.state, {step}});
    }

    std::vector<const FunctionInfo*> mutating;
    for (const auto* f : program_.public_functions(c))
      if (f->def->is_mutating()) mutating.push_back(f);

    bool replay_failed = false;
    for (int level = 0; level <= max_prefix && !frontier.empty(); ++level) {
      for (const auto& node : frontier) {
        auto v = rule ? try_rule(ex, node, replay_failed) : try_function(ex, node, *target, function, replay_failed);
        if (v) return *v;
      }
      if (level == max_prefix) break;
      std::vector<Node> next;
      for (const auto& node : frontier) {
        for (const auto* f : mutating) {
          if (next.size() >= opts_.bmc_max_states) break;
          SymState st = node.st;
          st.env = ex.fresh_env(st, f->def->mutability == Mutability::Payable);
          Step step;
          step.fn = f;
          step.env = st.env;
          std::vector<sym::Value> args;
          for (size_t k = 0; k < f->arity(); ++k) {
            std::string name = f->def->params[k].name.empty() ? "arg" + std::to_string(k) : f->def->params[k].name;
            args.push_back(ex.fresh_value(st, f->param_types[k], name));
            step.args.push_back({args.back(), st.memory});
          }
          for (auto& o : ex.call(st, *f, args)) {
            if (o.kind != OutcomeKind::Normal || next.size() >= opts_.bmc_max_states) continue;
            if (!feasible(o.state)) continue;
            Node n{o.state, node.steps};
            n.steps.push_back(step);
            next.push_back(std::move(n));
          }
        }
      }
      frontier = std::move(next);
    }
    if (replay_failed) return Verdict::unknown("counterexample replay failed");
    return Verdict::unknown("no reachable counterexample within depth");
  }

  Trace base_trace(const smt::Model& m, const std::vector<Step>& steps, const SymState& final) const {
    Trace t;
    const Step& deploy = steps.front();
    for (const auto& a : deploy.args) t.constructor_args.push_back(concretize(m, a));
    if (deploy.fn) t.constructor_types = deploy.fn->param_types;
    t.deploy_env = concretize(m, deploy.env);
    for (size_t k = 1; k < steps.size(); ++k) {
      TraceCall call;
      call.function = steps[k].fn->name();
      call.types = steps[k].fn->param_types;
      for (const auto& a : steps[k].args) call.args.push_back(concretize(m, a));
      call.env = concretize(m, steps[k].env);
      t.calls.push_back(std::move(call));
    }
    for (const auto& o : final.oracles) {
      smt::ModelValue v = m.eval(sym::var(o.name, o.sort));
      t.oracles.push_back(CValue::of(v.kind == smt::ModelValue::Kind::Bool ? BigInt(v.b ? 1 : 0) : v.i));
    }
    t.this_address = num(m, sym::var("this", sym::int_sort()));
    return t;
  }

  std::string text(Span s) const { return std::string(spec_.file->source->slice(s)); }

  std::optional<Verdict> confirm(Trace t, const std::string& function, bool& replay_failed) const {
    if (opts_.replay) {
      bool ok = false;
      try {
        ok = replay(program_, spec_, t, function);
      } catch (const ReplayError&) {
        ok = false;
      }
      if (!ok) {
        replay_failed = true;
        return std::nullopt;
      }
    }
    Verdict v;
    v.kind = VerdictKind::Violated;
    v.trace = std::move(t);
    return v;
  }

  std::optional<Verdict> try_function(Executor& ex, const Node& node, const FunctionInfo& fn,
                                      const std::string& function, bool& replay_failed) const {
    Target tg = run_target(ex, node.st, fn);
    for (const auto& c : tg.normal) {
      auto r = check({c.state.path_condition(), sym::lnot(sym::land(c.posts))});
      if (r.status != smt::Status::Sat) continue;
      size_t bad = 0;
      while (bad + 1 < c.posts.size() && r.model.eval_bool(c.posts[bad])) ++bad;
      std::vector<Step> steps = node.steps;
      steps.push_back(tg.step);
      Trace t;
      try {
        t = base_trace(r.model, steps, c.state);
      } catch (const ReplayError&) {
        replay_failed = true;
        continue;
      }
      t.target_call = true;
      t.span = c.spans[bad];
      t.obligation = text(t.span);
      if (auto v = confirm(std::move(t), function, replay_failed)) return v;
    }
    return std::nullopt;
  }

  std::optional<Verdict> try_rule(Executor& ex, const Node& node, bool& replay_failed) const {
    SymState st = node.st;
    st.env = ex.fresh_env(st, true);
    sym::Env env = st.env;
    for (const auto& o : ex.run_rule(st)) {
      if (o.kind != OutcomeKind::Normal) continue;
      Term pc = o.state.path_condition();
      for (const auto& ob : o.state.obligations) {
        auto r = check({pc, sym::lnot(ob.condition)});
        if (r.status != smt::Status::Sat) continue;
        Trace t;
        try {
          t = base_trace(r.model, node.steps, o.state);
        } catch (const ReplayError&) {
          replay_failed = true;
          continue;
        }
        t.rule_env = concretize(r.model, env);
        t.span = ob.span;
        t.obligation = text(ob.span);
        if (auto v = confirm(std::move(t), "", replay_failed)) return v;
      }
    }
    return std::nullopt;
  }

 private:
  const ResolvedProgram& program_;
  const ResolvedSpec& spec_;
  VerifyOptions opts_;
  smt::Solver solver_;
};

std::map<std::string, CValue> bindings_for(const ResolvedSpec& spec, const FunctionInfo& fn,
                                           const std::vector<CValue>& args) {
  std::map<std::string, CValue> b;
  if (spec.unit().kind != SpecKind::FunctionSpec) return b;
  for (size_t k = 0; k < args.size() && k < spec.param_names.size(); ++k) b[spec.param_names[k]] = args[k];
  (void)fn;
  return b;
}

}  // namespace

Verdict verify_function_spec(const ResolvedProgram& program, const ResolvedSpec& spec, const VerifyOptions& options) {
  if (spec.unit().kind != SpecKind::FunctionSpec || !spec.target) throw Error("not a function specification");
  Engine eng(program, spec, options);
  try {
    return eng.decide(eng.modular_function(*spec.target), spec.target->name());
  } catch (const sym::PathLimitExceeded& e) {
    return Verdict::unknown("path limit");
  }
}

std::map<std::string, Verdict> verify_invariant(const ResolvedProgram& program, const ResolvedSpec& spec,
                                                const VerifyOptions& options) {
  if (spec.unit().kind != SpecKind::Invariant) throw Error("not an invariant");
  Engine eng(program, spec, options);
  std::map<std::string, Verdict> out;
  for (const auto* f : program.public_functions(program.main())) {
    std::string key = f->name();
    if (out.count(key)) key = f->signature();
    try {
      out[key] = eng.decide(eng.modular_function(*f), f->signature());
    } catch (const sym::PathLimitExceeded&) {
      out[key] = Verdict::unknown("path limit");
    }
  }
  return out;
}

Verdict verify_rule(const ResolvedProgram& program, const ResolvedSpec& spec, const VerifyOptions& options) {
  if (spec.unit().kind != SpecKind::Rule) throw Error("not a rule");
  Engine eng(program, spec, options);
  try {
    return eng.decide(eng.modular_rule(), "");
  } catch (const sym::PathLimitExceeded&) {
    return Verdict::unknown("path limit");
  }
}

Verdict bmc_refute(const ResolvedProgram& program, const ResolvedSpec& spec, const VerifyOptions& options,
                   const std::string& function) {
  Engine eng(program, spec, options);
  std::string fn = function;
  if (fn.empty() && spec.target) fn = spec.target->name();
  try {
    return eng.bmc(fn);
  } catch (const sym::PathLimitExceeded&) {
    return Verdict::unknown("path limit");
  }
}

bool replay(const ResolvedProgram& program, const ResolvedSpec& spec, Trace& trace, const std::string& function) {
  Interpreter in(program, &spec);
  in.set_oracles(std::deque<CValue>(trace.oracles.begin(), trace.oracles.end()));
  in.set_this(trace.this_address);
  try {
    in.deploy(trace.constructor_args, trace.deploy_env);
    trace.initial_state.clear();
    for (const auto* sv : program.main().state_vars)
      if (!sv->def->constant && sv->type->is_value()) trace.initial_state.push_back({sv->name, in.state_scalar(sv->name)});
    size_t prefix = trace.calls.size() - (trace.target_call ? 1 : 0);
    for (size_t k = 0; k < prefix; ++k) in.call(trace.calls[k].function, trace.calls[k].args, trace.calls[k].env);

    const SpecUnit& u = spec.unit();
    if (u.kind == SpecKind::Rule) {
      if (!trace.rule_env) return false;
      RuleRun run = in.run_rule(*trace.rule_env);
      trace.rule_calls = run.calls;
      if (run.reverted || !run.assumptions_hold) return false;
      for (const auto& ob : run.obligations)
        if (ob.span == trace.span && !ob.holds) return true;
      return false;
    }

    if (!trace.target_call || trace.calls.empty()) return false;
    const TraceCall& tc = trace.calls.back();
    const FunctionInfo* fn = u.kind == SpecKind::FunctionSpec ? spec.target : nullptr;
    if (!fn)
      for (const auto* f : program.public_functions(program.main()))
        if (f->name() == tc.function && f->arity() == tc.args.size()) fn = f;
    if (!fn) return false;
    (void)function;
    auto bind = bindings_for(spec, *fn, tc.args);
    in.snapshot();
    const auto& pres = u.kind == SpecKind::Invariant ? u.exprs : u.pre;
    const auto& posts = u.kind == SpecKind::Invariant ? u.exprs : u.post;
    for (const auto& p : pres)
      if (!in.condition(*p, bind, true)) return false;
    in.call(tc.function, tc.args, tc.env);
    if (u.kind == SpecKind::FunctionSpec) {
      auto rets = in.last_return();
      const auto& decl = fn->def->returns;
      for (size_t k = 0; k < decl.size() && k < rets.size(); ++k)
        if (!decl[k].name.empty()) bind[decl[k].name] = rets[k];
    }
    for (const auto& q : posts)
      if (q->span == trace.span) return !in.condition(*q, bind, false);
    return false;
  } catch (const Reverted&) {
    return false;
  }
}

Verdict combine(const std::map<std::string, Verdict>& per_function) {
  auto rank = [](VerdictKind k) {
    switch (k) {
      case VerdictKind::Violated: return 3;
      case VerdictKind::Unknown: return 2;
      case VerdictKind::Proven: return 1;
      case VerdictKind::VacuouslyProven: return 0;
    }
    return 0;
  };
  if (per_function.empty()) return Verdict::proven();
  const Verdict* worst = nullptr;
  bool modular = false;
  for (const auto& [name, v] : per_function) {
    modular = modular || v.modular_violation;
    if (!worst || rank(v.kind) > rank(worst->kind)) worst = &v;
  }
  Verdict out = *worst;
  out.modular_violation = modular;
  return out;
}

Verdict verify_property(const ResolvedProgram& program, const ResolvedSpec& spec, const VerifyOptions& options,
                        std::map<std::string, Verdict>* per_function) {
  switch (spec.unit().kind) {
    case SpecKind::FunctionSpec: return verify_function_spec(program, spec, options);
    case SpecKind::Rule: return verify_rule(program, spec, options);
    case SpecKind::Invariant: {
      auto m = verify_invariant(program, spec, options);
      Verdict v = combine(m);
      if (per_function) *per_function = std::move(m);
      return v;
    }
  }
  throw Error("unknown property kind");
}

std::vector<PropertyResult> verify_all(const ResolvedProgram& program, const std::vector<Job>& jobs,
                                       const VerifyOptions& options, unsigned threads) {
  std::vector<PropertyResult> out(jobs.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t k; (k = next++) < jobs.size();) {
      const Job& j = jobs[k];
      PropertyResult& r = out[k];
      r.id = j.id;
      r.kind = j.spec->unit().kind;
      r.name = j.spec->unit().name;
      auto t0 = std::chrono::steady_clock::now();
      try {
        r.verdict = verify_property(program, *j.spec, options, &r.per_function);
      } catch (const std::exception& e) {
        r.verdict = Verdict::unknown(std::string("error: ") + e.what());
      }
      r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, std::max<size_t>(1, jobs.size()));
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < threads; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

namespace {

std::string addr(const BigInt& v) { return to_hex(v); }

std::string args_str(const std::vector<CValue>& args, const std::vector<frontend::TypePtr>& types = {}) {
  std::string s;
  for (size_t k = 0; k < args.size(); ++k) s += (k ? ", " : "") + args[k].show(k < types.size() ? types[k].get() : nullptr);
  return s;
}

std::string env_str(const CEnv& e) {
  std::string s = "sender=" + addr(e.sender);
  if (e.value != 0) s += " value=" + e.value.str();
  return s;
}

}  // namespace

std::string render_trace(const Trace& t) {
  std::ostringstream os;
  int n = 0;
  os << "  " << n++ << ". deploy(" << args_str(t.constructor_args, t.constructor_types) << ") " << env_str(t.deploy_env) << "\n";
  for (size_t k = 0; k < t.calls.size(); ++k)
    os << "  " << n++ << ". " << t.calls[k].function << "(" << args_str(t.calls[k].args, t.calls[k].types) << ") "
       << env_str(t.calls[k].env) << "\n";
  if (t.rule_env) {
    os << "  rule body, " << env_str(*t.rule_env) << ":\n";
    for (const auto& c : t.rule_calls) os << "  " << n++ << ". " << c.function << "(" << args_str(c.args, c.types) << ")\n";
  }
  if (!t.oracles.empty()) os << "  external values: " << args_str(t.oracles) << "\n";
  os << "  fails: " << t.obligation << "\n";
  return os.str();
}

}  // namespace ppgpt::verify
