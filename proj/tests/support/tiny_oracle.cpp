#include "tiny_oracle.hpp"

#include <functional>
#include <random>
#include <sstream>

namespace ppgpt::tiny {

namespace {

// ---- rendering ----

std::string show(const Ex& e) {
  switch (e.kind) {
    case Ex::Const: return std::to_string(e.v);
    case Ex::State: return "s" + std::to_string(e.v);
    case Ex::Old: return "old(s" + std::to_string(e.v) + ")";
    case Ex::Param: return "a";
    case Ex::Ghost: return e.v == 0 ? "$x" : "$b";
    case Ex::Loop: return "i";
    case Ex::Bin: return "(" + show(*e.l) + " " + e.op + " " + show(*e.r) + ")";
  }
  return "?";
}

std::string show(const Cond& c) {
  std::string s = show(*c.l) + " " + c.op + " " + show(*c.r);
  if (c.rest) s = "(" + s + ") " + c.join + " (" + show(*c.rest) + ")";
  return s;
}

void show(std::ostringstream& o, const Stmt& s, int ind) {
  std::string pad(ind, ' ');
  switch (s.kind) {
    case Stmt::Assign: o << pad << "s" << s.var << " = " << show(*s.e) << ";\n"; break;
    case Stmt::Require: o << pad << "require(" << show(*s.c) << ");\n"; break;
    case Stmt::If:
      o << pad << "if (" << show(*s.c) << ") {\n";
      for (const auto& t : s.then_) show(o, t, ind + 4);
      o << pad << "}";
      if (!s.else_.empty()) {
        o << " else {\n";
        for (const auto& t : s.else_) show(o, t, ind + 4);
        o << pad << "}";
      }
      o << "\n";
      break;
    case Stmt::For:
      o << pad << "for (uint8 i = 0; i < " << s.bound << "; i++) {\n";
      for (const auto& t : s.then_) show(o, t, ind + 4);
      o << pad << "}\n";
      break;
  }
}

std::string signature(const Func& f) { return f.name + (f.has_param ? "(uint8 a)" : "()"); }

// ---- evaluation ----

struct Revert {};

struct Env {
  std::vector<long long> s, old;
  long long a = 0, loop = 0;
  long long ghost[2] = {0, 0};
};

// code: uint8 checked arithmetic; otherwise mathematical integers
long long eval(const Ex& e, const Env& env, bool code) {
  switch (e.kind) {
    case Ex::Const: return e.v;
    case Ex::State: return env.s[e.v];
    case Ex::Old: return env.old[e.v];
    case Ex::Param: return env.a;
    case Ex::Ghost: return env.ghost[e.v];
    case Ex::Loop: return env.loop;
    case Ex::Bin: {
      long long x = eval(*e.l, env, code), y = eval(*e.r, env, code);
      long long r = e.op == '+' ? x + y : e.op == '-' ? x - y : x * y;
      if (code && (r < 0 || r > 255)) throw Revert{};
      return r;
    }
  }
  return 0;
}

bool holds(const Cond& c, const Env& env, bool code) {
  long long x = eval(*c.l, env, code), y = eval(*c.r, env, code);
  bool v = c.op == "<" ? x < y : c.op == "<=" ? x <= y : c.op == "==" ? x == y : c.op == "!=" ? x != y : c.op == ">" ? x > y : x >= y;
  if (!c.rest) return v;
  if (c.join == "&&") return v && holds(*c.rest, env, code);
  return v || holds(*c.rest, env, code);
}

void exec(const std::vector<Stmt>& body, Env& env) {
  for (const auto& s : body) {
    switch (s.kind) {
      case Stmt::Assign: env.s[s.var] = eval(*s.e, env, true); break;
      case Stmt::Require:
        if (!holds(*s.c, env, true)) throw Revert{};
        break;
      case Stmt::If: exec(holds(*s.c, env, true) ? s.then_ : s.else_, env); break;
      case Stmt::For: {
        long long saved = env.loop;
        for (env.loop = 0; env.loop < s.bound; ++env.loop) exec(s.then_, env);
        env.loop = saved;
        break;
      }
    }
  }
}

// Calls f on env.s with parameter a; false on revert (state unspecified then).
bool call(const Func& f, Env& env, long long a) {
  Env inner;
  inner.s = env.s;
  inner.a = a;
  try {
    exec(f.body, inner);
  } catch (const Revert&) {
    return false;
  }
  env.s = inner.s;
  return true;
}

template <typename F>
bool any_state(int n, F&& f) {
  std::vector<long long> s(n, 0);
  for (;;) {
    if (f(s)) return true;
    int k = 0;
    while (k < n && s[k] == kDomain) s[k++] = 0;
    if (k == n) return false;
    ++s[k];
  }
}

// ---- generation ----

class Gen {
 public:
  explicit Gen(uint64_t seed) : rng_(seed) {}

  int pick(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }

  static ExP mk(Ex::Kind k, int v = 0) {
    auto e = std::make_shared<Ex>();
    e->kind = k;
    e->v = v;
    return e;
  }
  static ExP bin(char op, ExP l, ExP r) {
    auto e = std::make_shared<Ex>();
    e->kind = Ex::Bin;
    e->op = op;
    e->l = std::move(l);
    e->r = std::move(r);
    return e;
  }
  char op() {
    int k = pick(0, 19);
    return k < 10 ? '+' : k < 17 ? '-' : '*';
  }
  std::string cmp() {
    static const char* ops[] = {"<", "<=", "==", "!=", ">", ">="};
    return ops[pick(0, 5)];
  }

  // code leaves: never two constants under one operator
  ExP code_leaf(int nvars, bool param, bool loop, bool allow_const) {
    std::vector<Ex::Kind> ks = {Ex::State, Ex::State};
    if (param) ks.push_back(Ex::Param);
    if (loop) ks.push_back(Ex::Loop);
    if (allow_const) ks.insert(ks.end(), {Ex::Const, Ex::Const});
    Ex::Kind k = ks[pick(0, int(ks.size()) - 1)];
    return mk(k, k == Ex::Const ? pick(0, kDomain) : k == Ex::State ? pick(0, nvars - 1) : 0);
  }
  ExP code_expr(int nvars, bool param, bool loop) {
    int shape = pick(0, 9);
    if (shape < 4) return code_leaf(nvars, param, loop, true);
    ExP e = bin(op(), code_leaf(nvars, param, loop, false), code_leaf(nvars, param, loop, true));
    if (shape == 9) e = bin(op(), e, code_leaf(nvars, param, loop, true));
    return e;
  }
  CondP code_cond(int nvars, bool param, bool loop) {
    auto c = std::make_shared<Cond>();
    c->l = code_expr(nvars, param, loop);
    c->op = cmp();
    do c->r = code_leaf(nvars, param, loop, true);
    while (show(*c->r) == show(*c->l));
    if (coin(0.2)) {
      c->join = coin() ? "&&" : "||";
      c->rest = code_cond(nvars, param, loop);
    }
    return c;
  }

  Stmt assign(int nvars, bool param, bool loop) {
    Stmt s;
    s.kind = Stmt::Assign;
    s.var = pick(0, nvars - 1);
    s.e = code_expr(nvars, param, loop);
    return s;
  }

  Stmt stmt(int nvars, bool param) {
    int k = pick(0, 9);
    Stmt s;
    if (k < 4) return assign(nvars, param, false);
    if (k < 6) {
      s.kind = Stmt::Require;
      s.c = code_cond(nvars, param, false);
      return s;
    }
    if (k < 8) {
      s.kind = Stmt::If;
      s.c = code_cond(nvars, param, false);
      s.then_.push_back(assign(nvars, param, false));
      if (coin()) s.else_.push_back(assign(nvars, param, false));
      return s;
    }
    s.kind = Stmt::For;
    s.bound = pick(1, 3);
    Stmt body;
    body.kind = Stmt::Assign;
    body.var = pick(0, nvars - 1);
    body.e = bin(coin(0.7) ? '+' : '-', mk(Ex::State, body.var), code_leaf(nvars, param, true, true));
    s.then_.push_back(body);
    return s;
  }

  Contract contract(const std::string& name) {
    Contract c;
    c.name = name;
    c.nvars = pick(1, 3);
    int nf = pick(1, 2);
    for (int k = 0; k < nf; ++k) {
      Func f;
      f.name = "f" + std::to_string(k);
      f.has_param = coin(0.6);
      int ns = pick(1, 3);
      for (int j = 0; j < ns; ++j) f.body.push_back(stmt(c.nvars, f.has_param));
      c.fns.push_back(std::move(f));
    }
    return c;
  }

  // spec leaves: state, old state, parameter, ghosts, constants
  ExP spec_leaf(const std::vector<Ex::Kind>& kinds, int nvars, bool allow_const) {
    std::vector<Ex::Kind> ks = kinds;
    if (allow_const) ks.insert(ks.end(), {Ex::Const, Ex::Const});
    Ex::Kind k = ks[pick(0, int(ks.size()) - 1)];
    int v = k == Ex::Const ? pick(0, kDomain + 1) : (k == Ex::State || k == Ex::Old) ? pick(0, nvars - 1) : 0;
    return mk(k, v);
  }
  ExP spec_expr(const std::vector<Ex::Kind>& kinds, int nvars) {
    if (coin(0.55)) return spec_leaf(kinds, nvars, false);
    return bin(coin(0.8) ? (coin() ? '+' : '-') : '*', spec_leaf(kinds, nvars, false), spec_leaf(kinds, nvars, true));
  }
  CondP spec_cond(const std::vector<Ex::Kind>& kinds, int nvars) {
    auto c = std::make_shared<Cond>();
    c->l = spec_expr(kinds, nvars);
    c->op = cmp();
    do c->r = coin(0.6) ? spec_expr(kinds, nvars) : spec_leaf(kinds, nvars, true);
    while (show(*c->r) == show(*c->l));
    if (coin(0.15)) {
      c->join = coin() ? "&&" : "||";
      c->rest = spec_cond(kinds, nvars);
    }
    return c;
  }
  // "unchanged" and "did not decrease" shapes hold often enough to balance the mix
  CondP frame_cond(int nvars) {
    auto c = std::make_shared<Cond>();
    int v = pick(0, nvars - 1);
    c->l = mk(Ex::State, v);
    c->op = coin() ? "==" : (coin() ? ">=" : "<=");
    c->r = mk(Ex::Old, v);
    return c;
  }

  std::mt19937_64 rng_;
};

}  // namespace

std::string render(const Contract& c) {
  std::ostringstream o;
  o << "contract " << c.name << " {\n";
  for (int k = 0; k < c.nvars; ++k) o << "    uint8 s" << k << ";\n";
  for (const auto& f : c.fns) {
    o << "\n    function " << signature(f) << " public {\n";
    for (const auto& s : f.body) show(o, s, 8);
    o << "    }\n";
  }
  o << "}\n";
  return o.str();
}

std::string render(const Contract& c, const FuncSpec& s) {
  std::ostringstream o;
  o << "function " << signature(c.fns[s.fn]) << "\nprecondition {\n";
  for (const auto& p : s.pre) o << "    " << show(*p) << ";\n";
  o << "}\npostcondition {\n";
  for (const auto& p : s.post) o << "    " << show(*p) << ";\n";
  o << "}\n";
  return o.str();
}

std::string render(const Rule& r) {
  std::ostringstream o;
  o << "rule " << r.name << "() {\n    uint8 $x;\n";
  if (r.assume) o << "    assume(" << show(*r.assume) << ");\n";
  if (r.snapshot >= 0) o << "    uint8 $b = s" << r.snapshot << ";\n";
  for (const auto& c : r.calls) o << "    f" << c.fn << "(" << (c.arg ? show(*c.arg) : "") << ");\n";
  for (const auto& a : r.asserts) o << "    assert(" << show(*a) << ");\n";
  o << "}\n";
  return o.str();
}

bool oracle_violates(const Contract& c, const FuncSpec& s) {
  const Func& f = c.fns[s.fn];
  return any_state(c.nvars, [&](const std::vector<long long>& st) {
    for (long long a = 0; a <= (f.has_param ? kDomain : 0); ++a) {
      Env env;
      env.s = env.old = st;
      env.a = a;
      bool pre = true;
      for (const auto& p : s.pre) pre = pre && holds(*p, env, false);
      if (!pre || !call(f, env, a)) continue;
      for (const auto& p : s.post)
        if (!holds(*p, env, false)) return true;
    }
    return false;
  });
}

bool oracle_violates(const Contract& c, const Rule& r) {
  return any_state(c.nvars, [&](const std::vector<long long>& st) {
    for (long long x = 0; x <= kDomain; ++x) {
      Env env;
      env.s = env.old = st;
      env.ghost[0] = x;
      if (r.assume && !holds(*r.assume, env, false)) continue;
      if (r.snapshot >= 0) env.ghost[1] = env.s[r.snapshot];
      bool ok = true;
      for (const auto& k : r.calls) {
        long long arg = k.arg ? eval(*k.arg, env, false) : 0;
        if (!call(c.fns[k.fn], env, arg)) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      for (const auto& a : r.asserts)
        if (!holds(*a, env, false)) return true;
    }
    return false;
  });
}

std::vector<Case> generate_cases(size_t n, uint64_t seed) {
  Gen g(seed);
  std::vector<Case> out;
  for (size_t k = 0; k < n; ++k) {
    Case cs;
    cs.contract = g.contract("Tiny" + std::to_string(k));
    const Contract& c = cs.contract;
    cs.contract_text = render(c);

    // Function specs: from a pool of random candidates keep one that holds and
    // one that fails, when the pool has them.
    for (int fi = 0; fi < int(c.fns.size()); ++fi) {
      bool param = c.fns[fi].has_param;
      std::vector<Ex::Kind> pre_kinds = {Ex::State};
      std::vector<Ex::Kind> post_kinds = {Ex::State, Ex::Old};
      if (param) {
        pre_kinds.push_back(Ex::Param);
        post_kinds.push_back(Ex::Param);
      }
      bool have[2] = {false, false};
      std::vector<Property> picked;
      for (int t = 0; t < 16 && !(have[0] && have[1]); ++t) {
        FuncSpec s;
        s.fn = fi;
        int npre = g.pick(0, 2);
        for (int j = 0; j < npre; ++j) s.pre.push_back(g.spec_cond(pre_kinds, c.nvars));
        int npost = g.pick(1, 2);
        for (int j = 0; j < npost; ++j) s.post.push_back(g.coin(0.3) ? g.frame_cond(c.nvars) : g.spec_cond(post_kinds, c.nvars));
        bool v = oracle_violates(c, s);
        if (have[v]) continue;
        picked.push_back({render(c, s), false, v});
        have[v] = true;
      }
      for (auto& p : picked) cs.properties.push_back(p);
    }

    // Rules, same selection.
    bool have[2] = {false, false};
    for (int t = 0; t < 16 && !(have[0] && have[1]); ++t) {
      Rule r;
      r.name = "r" + std::to_string(t);
      std::vector<Ex::Kind> kinds = {Ex::State, Ex::Ghost};
      if (g.coin(0.5)) r.assume = g.spec_cond(kinds, c.nvars);
      if (g.coin(0.7)) r.snapshot = g.pick(0, c.nvars - 1);
      int ncalls = g.pick(1, 2);
      for (int j = 0; j < ncalls; ++j) {
        RuleCall rc;
        rc.fn = g.pick(0, int(c.fns.size()) - 1);
        if (c.fns[rc.fn].has_param) rc.arg = g.coin(0.7) ? Gen::mk(Ex::Ghost, 0) : Gen::mk(Ex::Const, g.pick(0, kDomain));
        r.calls.push_back(rc);
      }
      std::vector<Ex::Kind> akinds = {Ex::State, Ex::Ghost};
      int na = g.pick(1, 2);
      for (int j = 0; j < na; ++j) {
        CondP a = g.spec_cond(akinds, c.nvars);
        if (r.snapshot >= 0 && g.coin(0.5)) {
          auto fc = std::make_shared<Cond>();
          fc->l = Gen::mk(Ex::State, r.snapshot);
          fc->op = g.coin() ? ">=" : (g.coin() ? "==" : "<=");
          fc->r = g.coin(0.7) ? Gen::mk(Ex::Ghost, 1) : Gen::bin('+', Gen::mk(Ex::Ghost, 1), Gen::mk(Ex::Const, g.pick(1, 3)));
          a = fc;
        }
        // $b only exists with a snapshot
        std::function<bool(const Ex&)> uses_b = [&](const Ex& e) {
          return (e.kind == Ex::Ghost && e.v == 1) || (e.l && uses_b(*e.l)) || (e.r && uses_b(*e.r));
        };
        std::function<bool(const Cond&)> cond_b = [&](const Cond& cd) {
          return uses_b(*cd.l) || uses_b(*cd.r) || (cd.rest && cond_b(*cd.rest));
        };
        if (r.snapshot < 0 && cond_b(*a)) continue;
        r.asserts.push_back(a);
      }
      if (r.asserts.empty()) continue;
      bool v = oracle_violates(c, r);
      if (have[v]) continue;
      have[v] = true;
      cs.properties.push_back({render(r), true, v});
    }
    out.push_back(std::move(cs));
  }
  return out;
}

}  // namespace ppgpt::tiny
