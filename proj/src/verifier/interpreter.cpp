#include "ppgpt/verifier/interpreter.hpp"

#include <openssl/evp.h>

#include <functional>

#include "ppgpt/symexec/executor.hpp"

namespace ppgpt::verify {

using namespace frontend;

std::string CValue::str() const {
  if (!is_array) return i.str();
  std::string s = "[";
  for (size_t k = 0; k < items.size(); ++k) s += (k ? ", " : "") + items[k].str();
  return s + "]";
}

std::string CValue::show(const frontend::Type* t) const {
  using frontend::TypeKind;
  if (!t) return str();
  if (is_array) {
    std::string s = "[";
    for (size_t k = 0; k < items.size(); ++k) s += (k ? ", " : "") + items[k].show(t->element.get());
    return s + "]";
  }
  switch (t->kind) {
    case TypeKind::Bool: return i == 0 ? "false" : "true";
    case TypeKind::Address: case TypeKind::Contract: case TypeKind::FixedBytes: return to_hex(i);
    case TypeKind::String: case TypeKind::StringLiteral: {
      // strings are 0x01 followed by their bytes
      std::string bytes;
      BigInt v = i;
      while (v > 1) {
        bytes.insert(bytes.begin(), static_cast<char>(static_cast<unsigned>(v & 0xff)));
        v >>= 8;
      }
      bool printable = v == 1;
      for (unsigned char ch : bytes) printable = printable && ch >= 0x20 && ch < 0x7f && ch != '"' && ch != '\\';
      return printable ? "\"" + bytes + "\"" : str();
    }
    default: return str();
  }
}

BigInt concrete_hash(const std::string& fn, const std::vector<BigInt>& args) {
  std::string buf = fn;
  buf.push_back('\0');
  for (const auto& a : args) {
    BigInt v = a < 0 ? BigInt(-a) : a;
    std::string bytes;
    while (v > 0) {
      bytes.insert(bytes.begin(), static_cast<char>(static_cast<unsigned>(v & 0xff)));
      v >>= 8;
    }
    uint32_t n = static_cast<uint32_t>(bytes.size());
    buf.push_back(a < 0 ? '-' : '+');
    for (int k = 3; k >= 0; --k) buf.push_back(static_cast<char>((n >> (8 * k)) & 0xff));
    buf += bytes;
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(buf.data(), buf.size(), md, &len, EVP_sha3_256(), nullptr);
  BigInt r = 0;
  for (unsigned k = 0; k < len; ++k) r = (r << 8) | md[k];
  return r;
}

namespace {

struct Node;
using NodePtr = std::shared_ptr<Node>;

struct Node {
  TypePtr type;
  BigInt scalar;
  std::map<std::string, NodePtr> fields;
  std::vector<NodePtr> elems;
  std::map<BigInt, NodePtr> entries;
};

struct RV {
  enum class Kind { None, Scalar, Ref, Tuple };
  Kind kind = Kind::None;
  BigInt v;
  NodePtr ref;
  std::vector<RV> items;
  TypePtr type;

  static RV scalar(BigInt x, TypePtr t) {
    RV r;
    r.kind = Kind::Scalar;
    r.v = std::move(x);
    r.type = std::move(t);
    return r;
  }
  static RV reference(NodePtr n) {
    RV r;
    r.kind = Kind::Ref;
    r.type = n->type;
    r.ref = std::move(n);
    return r;
  }
};

enum class Flow { Normal, Return, Break, Continue };

struct Frame {
  std::vector<std::map<std::string, RV>> scopes;
  const FunctionInfo* fn = nullptr;
  const std::vector<const FunctionInfo*>* mods = nullptr;
  const std::vector<const ModifierInvocation*>* mod_calls = nullptr;
  const std::vector<RV>* args = nullptr;
  size_t level = 0;
  bool rule = false;
  int unchecked = 0;
  RV* ret = nullptr;
};

struct LV {
  enum class Kind { Discard, Local, Node, Tuple };
  Kind kind = Kind::Discard;
  std::string name;
  NodePtr node;
  std::vector<LV> items;
  TypePtr type;
};

BigInt wrap(const BigInt& x, const Type& t) {
  BigInt m = pow2(t.bits);
  BigInt u = x % m;
  if (u < 0) u += m;
  if (t.is_signed() && u >= pow2(t.bits - 1)) u -= m;
  return u;
}

}  // namespace

struct Interpreter::Impl {
  const ResolvedProgram& program;
  const ResolvedSpec* spec;
  const ContractInfo& contract;
  std::map<std::string, NodePtr> storage;
  std::map<std::string, NodePtr> old;
  std::deque<CValue> oracles;
  BigInt this_address = 0;
  CEnv env;
  std::vector<Frame> frames;
  std::vector<RV> last_ret;
  RuleRun* rule_run = nullptr;
  size_t steps = 0;

  Impl(const ResolvedProgram& p, const ResolvedSpec* s) : program(p), spec(s), contract(p.main()) {}

  const ExprInfo& info(const Expr& e) const {
    const ExprInfo* i = spec ? spec->info(e) : program.info(e);
    if (!i) throw ReplayError("expression was not resolved");
    return *i;
  }

  TypePtr type_of(const TypeName& t) const {
    TypePtr r = spec ? spec->type_of(t) : program.type_of(t);
    if (!r) throw ReplayError("type was not resolved");
    return r;
  }

  // ---- nodes ----
  NodePtr make(const TypePtr& t) {
    auto n = std::make_shared<Node>();
    n->type = t;
    if (t->kind == TypeKind::Struct) {
      const auto* si = program.struct_info(t->name);
      for (const auto& [name, ft] : si->fields) n->fields[name] = make(ft);
    }
    return n;
  }

  static NodePtr clone(const NodePtr& n) {
    auto c = std::make_shared<Node>(*n);
    for (auto& [k, v] : c->fields) v = clone(v);
    for (auto& v : c->elems) v = clone(v);
    for (auto& [k, v] : c->entries) v = clone(v);
    return c;
  }

  // Overwrites `dst` in place so aliases observe the new contents.
  static void assign_node(const NodePtr& dst, const NodePtr& src) {
    NodePtr c = clone(src);
    TypePtr keep = dst->type;
    *dst = *c;
    dst->type = keep;
  }

  NodePtr entry(const NodePtr& mapping, const BigInt& key) {
    auto it = mapping->entries.find(key);
    if (it != mapping->entries.end()) return it->second;
    NodePtr n = make(mapping->type->element);
    mapping->entries[key] = n;
    return n;
  }

  void reset_storage() {
    storage.clear();
    for (const auto* sv : contract.state_vars)
      if (!sv->def->constant) storage[sv->name] = make(sv->type);
  }

  CValue oracle() {
    if (oracles.empty()) throw ReplayError("oracle values exhausted");
    CValue v = oracles.front();
    oracles.pop_front();
    return v;
  }

  NodePtr from_cvalue(const CValue& c, const TypePtr& t) {
    NodePtr n = make(t);
    if (t->kind == TypeKind::Array) {
      for (const auto& item : c.items) n->elems.push_back(from_cvalue(item, t->element));
    } else {
      n->scalar = c.i;
    }
    return n;
  }

  RV to_rv(const CValue& c, const TypePtr& t) {
    if (t->is_value()) return RV::scalar(c.i, t);
    return RV::reference(from_cvalue(c, t));
  }

  CValue to_cvalue(const RV& r) {
    if (r.kind == RV::Kind::Scalar) return CValue::of(r.v);
    CValue c;
    if (r.kind == RV::Kind::Ref) {
      c.is_array = true;
      for (const auto& e : r.ref->elems) c.items.push_back(to_cvalue(RV::reference(e)));
      if (r.ref->type->is_value()) return CValue::of(r.ref->scalar);
    }
    return c;
  }

  // ---- evaluation ----
  struct Ctx {
    bool spec = false;
    bool old = false;
  };

  RV read_node(const NodePtr& n) {
    if (n->type->is_value()) return RV::scalar(n->scalar, n->type);
    return RV::reference(n);
  }

  RV* local(const std::string& name) {
    auto& f = frames.back();
    for (auto it = f.scopes.rbegin(); it != f.scopes.rend(); ++it) {
      auto jt = it->find(name);
      if (jt != it->end()) return &jt->second;
    }
    return nullptr;
  }

  BigInt arith(const std::string& op, const BigInt& a, const BigInt& b, const TypePtr& type, Ctx c) {
    BigInt r;
    if (op == "+") r = a + b;
    else if (op == "-") r = a - b;
    else if (op == "*") r = a * b;
    else if (op == "/" || op == "%") {
      if (b == 0) {
        if (c.spec) return 0;
        throw Reverted("division by zero");
      }
      r = op == "/" ? BigInt(a / b) : BigInt(a % b);
    } else if (op == "**") {
      r = 1;
      for (BigInt k = 0; k < b; ++k) r *= a;
    } else {
      throw ReplayError("unsupported operator " + op);
    }
    if (c.spec || !type || type->kind == TypeKind::IntLiteral || type_max(*type) < 0) return r;
    if (frames.back().unchecked > 0) return wrap(r, *type);
    if (r < type_min(*type) || r > type_max(*type)) throw Reverted("arithmetic overflow");
    return r;
  }

  NodePtr state_node(const StateVarInfo& v, bool use_old) {
    auto& m = use_old ? old : storage;
    auto it = m.find(v.name);
    if (it == m.end()) throw ReplayError("no state variable " + v.name);
    return it->second;
  }

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
      case ExprKind::Unary: return e.name == "!" && pure(*e.operands[0]);
      case ExprKind::Binary: {
        static const std::set<std::string> safe = {"==", "!=", "<", ">", "<=", ">=", "&&", "||", "&"};
        return safe.count(e.name) && pure(*e.operands[0]) && pure(*e.operands[1]);
      }
      case ExprKind::Old: return pure(*e.operands[0]);
      default: return false;
    }
  }

  RV eval(const Expr& e, Ctx c) {
    if (++steps > 2000000) throw ReplayError("step limit exceeded");
    const ExprInfo& i = info(e);
    if (i.constant && i.type && i.type->is_integer() && e.kind != ExprKind::Assign && e.kind != ExprKind::Call)
      return RV::scalar(*i.constant, i.type);
    switch (e.kind) {
      case ExprKind::Number: return RV::scalar(e.number, i.type);
      case ExprKind::Bool: return RV::scalar(e.boolean ? 1 : 0, i.type);
      case ExprKind::String: return RV::scalar(sym::encode_string(e.str), i.type);
      case ExprKind::Identifier:
        switch (i.ref) {
          case RefKind::Local: {
            RV* v = local(e.name);
            if (!v) throw ReplayError("unbound local " + e.name);
            return *v;
          }
          case RefKind::StateVar:
            if (i.var->def->constant) {
              frames.push_back(Frame{{{}}});
              RV r = eval(*i.var->def->init, c);
              frames.pop_back();
              return r;
            }
            return read_node(state_node(*i.var, c.old));
          case RefKind::SymbolicAlias: return read_node(state_node(*i.var, true));
          case RefKind::Magic:
            if (i.builtin == "this") return RV::scalar(this_address, i.type);
            break;
          default: break;
        }
        throw ReplayError("unsupported identifier " + e.name);
      case ExprKind::Member: {
        if (i.member == MemberKind::Env) {
          const BigInt& v = i.builtin == "msg.sender"        ? env.sender
                            : i.builtin == "msg.value"       ? env.value
                            : i.builtin == "block.timestamp" ? env.timestamp
                            : i.builtin == "block.number"    ? env.number
                                                             : env.origin;
          return RV::scalar(v, i.type);
        }
        RV base = eval(*e.operands[0], c);
        if (i.member == MemberKind::Balance) return RV::scalar(oracle().i, i.type);
        if (i.member == MemberKind::Length) return RV::scalar(base.ref->elems.size(), i.type);
        if (i.member == MemberKind::Field) return read_node(base.ref->fields.at(e.name));
        throw ReplayError("unsupported member ." + e.name);
      }
      case ExprKind::Index: {
        RV base = eval(*e.operands[0], c);
        RV key = eval(*e.operands[1], c);
        return read_node(element(base.ref, key.v, c));
      }
      case ExprKind::Unary: return unary(e, i, c);
      case ExprKind::Binary: return binary(e, i, c);
      case ExprKind::Assign: {
        LV lv = lvalue(*e.operands[0], c);
        RV rv = eval(*e.operands[1], c);
        if (e.name != "=") {
          BigInt cur = load(lv).v;
          rv = RV::scalar(arith(e.name.substr(0, e.name.size() - 1), cur, rv.v, lv.type, c), lv.type);
        }
        store(lv, rv);
        return rv;
      }
      case ExprKind::Ternary: {
        bool cond = eval(*e.operands[0], c).v != 0;
        return eval(*e.operands[cond ? 1 : 2], c);
      }
      case ExprKind::Call: return call(e, i, c);
      case ExprKind::Old: {
        Ctx o = c;
        o.old = true;
        return eval(*e.operands[0], o);
      }
      case ExprKind::New: {
        BigInt len = eval(*e.operands.at(0), c).v;
        NodePtr n = make(i.type);
        for (BigInt k = 0; k < len; ++k) n->elems.push_back(make(i.type->element));
        return RV::reference(n);
      }
      case ExprKind::Tuple: {
        if (e.operands.size() == 1 && e.operands[0]) return eval(*e.operands[0], c);
        RV t;
        t.kind = RV::Kind::Tuple;
        t.type = i.type;
        for (const auto& o : e.operands) t.items.push_back(o ? eval(*o, c) : RV{});
        return t;
      }
      case ExprKind::ElementaryType: break;
    }
    throw ReplayError("unsupported expression");
  }

  NodePtr element(const NodePtr& base, const BigInt& key, Ctx c) {
    if (base->type->kind == TypeKind::Mapping) return entry(base, key);
    if (key < 0 || key >= base->elems.size()) {
      if (c.spec) return make(base->type->element);  // out-of-range reads in specs see defaults
      throw Reverted("index out of bounds");
    }
    return base->elems[static_cast<size_t>(key)];
  }

  RV unary(const Expr& e, const ExprInfo& i, Ctx c) {
    const std::string& op = e.name;
    if (op == "!") return RV::scalar(eval(*e.operands[0], c).v == 0 ? 1 : 0, i.type);
    if (op == "-") return RV::scalar(arith("-", 0, eval(*e.operands[0], c).v, i.type, c), i.type);
    LV lv = lvalue(*e.operands[0], c);
    if (op == "delete") {
      if (lv.kind == LV::Kind::Node) {
        if (lv.node->type->is_value()) lv.node->scalar = 0;
        else reset_node(lv.node);
      } else {
        store(lv, default_rv(lv.type));
      }
      return RV{};
    }
    BigInt cur = load(lv).v;
    bool inc = op == "++" || op == "post++";
    BigInt now = arith(inc ? "+" : "-", cur, 1, lv.type, c);
    store(lv, RV::scalar(now, lv.type));
    return RV::scalar(op.rfind("post", 0) == 0 ? cur : now, i.type);
  }

  // delete on a reference: clears everything except mapping contents
  void reset_node(const NodePtr& n) {
    switch (n->type->kind) {
      case TypeKind::Mapping: return;
      case TypeKind::Array: n->elems.clear(); return;
      case TypeKind::Struct:
        for (auto& [k, f] : n->fields) {
          if (f->type->is_value()) f->scalar = 0;
          else reset_node(f);
        }
        return;
      default: n->scalar = 0;
    }
  }

  RV default_rv(const TypePtr& t) {
    if (t->is_value()) return RV::scalar(0, t);
    return RV::reference(make(t));
  }

  RV binary(const Expr& e, const ExprInfo& i, Ctx c) {
    const std::string& op = e.name;
    if ((op == "&&" || op == "||") && !c.spec && !pure(*e.operands[1])) {
      bool l = eval(*e.operands[0], c).v != 0;
      if (op == "&&" && !l) return RV::scalar(0, i.type);
      if (op == "||" && l) return RV::scalar(1, i.type);
      return RV::scalar(eval(*e.operands[1], c).v != 0 ? 1 : 0, i.type);
    }
    BigInt a = eval(*e.operands[0], c).v;
    BigInt b = eval(*e.operands[1], c).v;
    auto B = [&](bool x) { return RV::scalar(x ? 1 : 0, i.type); };
    if (op == "&&" || op == "&") return B(a != 0 && b != 0);
    if (op == "||") return B(a != 0 || b != 0);
    if (op == "==") return B(a == b);
    if (op == "!=") return B(a != b);
    if (op == "<") return B(a < b);
    if (op == ">") return B(a > b);
    if (op == "<=") return B(a <= b);
    if (op == ">=") return B(a >= b);
    return RV::scalar(arith(op, a, b, i.type, c), i.type);
  }

  LV lvalue(const Expr& e, Ctx c) {
    const ExprInfo& i = info(e);
    LV lv;
    lv.type = i.type;
    if (e.kind == ExprKind::Identifier && i.ref == RefKind::Local) {
      lv.kind = LV::Kind::Local;
      lv.name = e.name;
      return lv;
    }
    if (e.kind == ExprKind::Identifier && i.ref == RefKind::StateVar) {
      lv.kind = LV::Kind::Node;
      lv.node = state_node(*i.var, false);
      return lv;
    }
    if (e.kind == ExprKind::Tuple) {
      if (e.operands.size() == 1 && e.operands[0]) return lvalue(*e.operands[0], c);
      lv.kind = LV::Kind::Tuple;
      for (const auto& o : e.operands) lv.items.push_back(o ? lvalue(*o, c) : LV{});
      return lv;
    }
    if (e.kind == ExprKind::Member) {
      RV base = eval(*e.operands[0], c);
      lv.kind = LV::Kind::Node;
      if (i.member == MemberKind::Length) throw ReplayError("assignment to array length");
      lv.node = base.ref->fields.at(e.name);
      return lv;
    }
    if (e.kind == ExprKind::Index) {
      RV base = eval(*e.operands[0], c);
      RV key = eval(*e.operands[1], c);
      lv.kind = LV::Kind::Node;
      lv.node = element(base.ref, key.v, c);
      return lv;
    }
    throw ReplayError("expression is not assignable");
  }

  RV load(const LV& lv) {
    if (lv.kind == LV::Kind::Local) return *local(lv.name);
    if (lv.kind == LV::Kind::Node) return read_node(lv.node);
    throw ReplayError("cannot read this lvalue");
  }

  RV coerce(const RV& v, const TypePtr& t, DataLocation loc, bool from_storage) {
    if (v.kind != RV::Kind::Ref || t->is_value()) return v;
    if (loc == DataLocation::Storage || !from_storage) return v;
    return RV::reference(clone(v.ref));
  }

  bool in_storage(const NodePtr& n) {
    std::function<bool(const NodePtr&)> walk = [&](const NodePtr& cur) {
      if (cur == n) return true;
      for (const auto& [k, f] : cur->fields)
        if (walk(f)) return true;
      for (const auto& x : cur->elems)
        if (walk(x)) return true;
      for (const auto& [k, x] : cur->entries)
        if (walk(x)) return true;
      return false;
    };
    for (const auto& [name, root] : storage)
      if (walk(root)) return true;
    return false;
  }

  void store(const LV& lv, const RV& v) {
    switch (lv.kind) {
      case LV::Kind::Discard: return;
      case LV::Kind::Local: {
        RV* slot = local(lv.name);
        if (slot->kind == RV::Kind::Ref) {
          if (in_storage(slot->ref) || !in_storage(v.ref))
            *slot = v;  // storage pointers and memory references rebind
          else
            *slot = RV::reference(clone(v.ref));
        } else {
          *slot = RV::scalar(v.v, slot->type ? slot->type : lv.type);
        }
        return;
      }
      case LV::Kind::Node:
        if (lv.node->type->is_value())
          lv.node->scalar = v.v;
        else
          assign_node(lv.node, v.ref);
        return;
      case LV::Kind::Tuple:
        for (size_t k = 0; k < lv.items.size(); ++k) store(lv.items[k], v.items.at(k));
        return;
    }
  }

  RV convert(const RV& v, const TypePtr& target) {
    if (v.kind != RV::Kind::Scalar || !target->is_value()) return v;
    auto integral = [](const Type& ty) {
      return ty.kind == TypeKind::Uint || ty.kind == TypeKind::Int || ty.kind == TypeKind::Address ||
             ty.kind == TypeKind::Contract;
    };
    BigInt x = v.v;
    if (integral(*target) && (x < type_min(*target) || x > type_max(*target))) x = wrap(x, *target);
    return RV::scalar(x, target);
  }

  RV pack(std::vector<RV> vs) {
    if (vs.empty()) return RV{};
    if (vs.size() == 1) return vs[0];
    RV t;
    t.kind = RV::Kind::Tuple;
    t.items = std::move(vs);
    return t;
  }

  RV call(const Expr& e, const ExprInfo& i, Ctx c) {
    const Expr& callee = *e.operands[0];
    auto args = [&](size_t from) {
      std::vector<RV> vs;
      for (size_t k = from; k < e.operands.size(); ++k) vs.push_back(eval(*e.operands[k], c));
      return vs;
    };
    switch (i.call) {
      case CallKind::Require: case CallKind::Assert: case CallKind::Assume: {
        bool rule = frames.back().rule;
        Ctx cc = c;
        if (rule) cc.spec = true;
        bool ok = eval(*e.operands[1], cc).v != 0;
        if (rule && i.call == CallKind::Assert) {
          if (rule_run) rule_run->obligations.push_back({e.span, ok});
        } else if (rule || i.call == CallKind::Assume) {
          if (!ok && rule_run) rule_run->assumptions_hold = false;
        } else if (!ok) {
          throw Reverted(i.call == CallKind::Assert ? "assert failed" : "require failed");
        }
        return RV{};
      }
      case CallKind::Revert:
        args(1);
        throw Reverted("revert");
      case CallKind::Conversion: return convert(eval(*e.operands[1], c), i.type);
      case CallKind::Hash: case CallKind::AbiEncode: {
        std::vector<BigInt> vs;
        for (const auto& v : args(1)) vs.push_back(v.v);
        std::string fn = i.call == CallKind::AbiEncode ? "abi_" + i.builtin : i.builtin == "sha256" ? "sha256" : "sha3";
        BigInt h = concrete_hash(fn, vs);
        if (i.call == CallKind::AbiEncode) h += pow2(256);  // keep encodings apart from hashes
        return RV::scalar(h, i.type);
      }
      case CallKind::Event: args(1); return RV{};
      case CallKind::StructCtor: {
        auto vs = args(1);
        NodePtr n = make(i.type);
        const auto* si = program.struct_info(i.type->name);
        for (size_t k = 0; k < vs.size(); ++k) {
          NodePtr f = n->fields.at(si->fields[k].first);
          if (f->type->is_value()) f->scalar = vs[k].v;
          else assign_node(f, vs[k].ref);
        }
        return RV::reference(n);
      }
      case CallKind::Push: case CallKind::Pop: {
        RV base = eval(*callee.operands[0], c);
        NodePtr arr = base.ref;
        if (i.call == CallKind::Pop) {
          if (arr->elems.empty()) throw Reverted("pop on empty array");
          arr->elems.pop_back();
          return RV{};
        }
        auto vs = args(1);
        NodePtr n = make(arr->type->element);
        if (!vs.empty()) {
          if (n->type->is_value()) n->scalar = vs[0].v;
          else assign_node(n, vs[0].ref);
        }
        arr->elems.push_back(n);
        return vs.empty() ? read_node(n) : RV{};
      }
      case CallKind::LowLevel: case CallKind::Transfer: case CallKind::Send: {
        eval(*callee.operands[0], c);
        for (const auto& o : e.options) eval(*o.value, c);
        args(1);
        if (i.call == CallKind::Transfer) return RV{};
        if (i.call == CallKind::Send) return RV::scalar(1, i.type);
        BigInt ok = oracle().i;
        BigInt data = oracle().i;
        if (ok == 0) throw ReplayError("replayed call reported failure");
        RV t;
        t.kind = RV::Kind::Tuple;
        t.items = {RV::scalar(ok, types::bool_t()), RV::scalar(data, types::bytes_t())};
        return t;
      }
      case CallKind::External: {
        eval(*callee.operands[0], c);
        for (const auto& o : e.options) eval(*o.value, c);
        args(1);
        std::vector<RV> rets;
        for (const auto& rt : i.function->return_types) {
          if (!rt->is_value()) throw ReplayError("external call returning a reference");
          rets.push_back(RV::scalar(oracle().i, rt));
        }
        return pack(std::move(rets));
      }
      case CallKind::Internal: case CallKind::Super: {
        const FunctionInfo* target = nullptr;
        if (i.call == CallKind::Internal) {
          target = program.dispatch(contract, i.function->name(), i.function->arity());
        } else {
          const ContractInfo* from = frames.back().fn ? frames.back().fn->owner : &contract;
          target = program.super_dispatch(contract, *from, i.function->name(), i.function->arity());
        }
        auto vs = args(1);
        if (frames.back().rule) {
          if (rule_run) {
            CallRecord rec{target->name(), {}, target->param_types};
            for (const auto& v : vs) rec.args.push_back(to_cvalue(v));
            rule_run->calls.push_back(std::move(rec));
          }
          if (target->def->mutability != Mutability::Payable && env.value != 0)
            throw Reverted("non-payable function received value");
        }
        return invoke(*target, vs);
      }
      case CallKind::None: break;
    }
    throw ReplayError("unsupported call");
  }

  // ---- functions ----
  RV invoke(const FunctionInfo& fn, const std::vector<RV>& args) {
    std::vector<const FunctionInfo*> mods;
    std::vector<const ModifierInvocation*> calls;
    for (const auto& m : fn.def->modifiers) {
      const FunctionInfo* mi = program.modifier(contract, m.name);
      if (!mi) continue;
      mods.push_back(mi);
      calls.push_back(&m);
    }
    RV ret;
    Frame base;
    base.fn = &fn;
    base.mods = &mods;
    base.mod_calls = &calls;
    base.args = &args;
    base.ret = &ret;
    run_level(base, 0);
    return ret;
  }

  Frame params(const FunctionInfo& fn, const std::vector<RV>& args, const Frame& proto, size_t level) {
    Frame f = proto;
    f.scopes.assign(1, {});
    f.level = level;
    f.rule = false;
    f.unchecked = 0;
    for (size_t k = 0; k < fn.def->params.size(); ++k) {
      const auto& p = fn.def->params[k];
      if (p.name.empty()) continue;
      bool from_storage = args[k].kind == RV::Kind::Ref && in_storage(args[k].ref);
      f.scopes[0][p.name] = coerce(args[k], fn.param_types[k], p.location, from_storage);
    }
    return f;
  }

  void run_level(const Frame& proto, size_t level) {
    const FunctionInfo& fn = *proto.fn;
    if (level < proto.mods->size()) {
      const FunctionInfo& mod = *(*proto.mods)[level];
      frames.push_back(params(fn, *proto.args, proto, level));
      std::vector<RV> margs;
      for (const auto& a : (*proto.mod_calls)[level]->args) margs.push_back(eval(*a, Ctx{}));
      frames.pop_back();
      Frame mf = params(mod, margs, proto, level);
      frames.push_back(mf);
      exec(*mod.def->body);
      frames.pop_back();
      return;
    }
    Frame f = params(fn, *proto.args, proto, level);
    for (size_t k = 0; k < fn.def->returns.size(); ++k)
      if (!fn.def->returns[k].name.empty()) f.scopes[0][fn.def->returns[k].name] = default_rv(fn.return_types[k]);
    frames.push_back(f);
    bool returned = false;
    Flow fl = exec(*fn.def->body);
    returned = fl == Flow::Return && proto.ret->kind != RV::Kind::None;
    if (!returned && !fn.return_types.empty()) {
      std::vector<RV> vs;
      for (size_t k = 0; k < fn.def->returns.size(); ++k) {
        const auto& rp = fn.def->returns[k];
        vs.push_back(rp.name.empty() ? default_rv(fn.return_types[k]) : frames.back().scopes[0][rp.name]);
      }
      *proto.ret = pack(std::move(vs));
    }
    frames.pop_back();
  }

  // ---- statements ----
  Flow exec_list(const std::vector<StmtPtr>& ss) {
    for (const auto& s : ss) {
      Flow f = exec(*s);
      if (f != Flow::Normal) return f;
    }
    return Flow::Normal;
  }

  Flow scoped(const std::function<Flow()>& body) {
    frames.back().scopes.emplace_back();
    Flow f = body();
    frames.back().scopes.pop_back();
    return f;
  }

  Flow exec(const Stmt& s) {
    switch (s.kind) {
      case StmtKind::Block: return scoped([&] { return exec_list(s.children); });
      case StmtKind::Unchecked: {
        frames.back().unchecked++;
        Flow f = scoped([&] { return exec_list(s.children); });
        frames.back().unchecked--;
        return f;
      }
      case StmtKind::VarDecl: var_decl(s); return Flow::Normal;
      case StmtKind::Expr: case StmtKind::Emit: eval(*s.expr, Ctx{}); return Flow::Normal;
      case StmtKind::If: {
        bool cond = eval(*s.expr, Ctx{}).v != 0;
        if (cond) return exec(*s.children[0]);
        if (s.children.size() > 1 && s.children[1]) return exec(*s.children[1]);
        return Flow::Normal;
      }
      case StmtKind::While: return loop(s.expr.get(), nullptr, *s.children[0]);
      case StmtKind::For:
        return scoped([&] {
          if (s.children[0]) exec(*s.children[0]);
          return loop(s.expr.get(), s.expr2.get(), *s.children[1]);
        });
      case StmtKind::Return: {
        Frame& f = frames.back();
        if (s.expr) {
          RV v = eval(*s.expr, Ctx{});
          if (f.ret && f.fn) {
            const FunctionInfo& fn = *f.fn;
            auto fix = [&](const RV& x, size_t k) {
              bool from_storage = x.kind == RV::Kind::Ref && in_storage(x.ref);
              return coerce(x, fn.return_types[k], fn.def->returns[k].location, from_storage);
            };
            if (fn.return_types.size() == 1) v = fix(v, 0);
            else if (v.kind == RV::Kind::Tuple)
              for (size_t k = 0; k < v.items.size() && k < fn.return_types.size(); ++k) v.items[k] = fix(v.items[k], k);
            *f.ret = v;
          }
        }
        return Flow::Return;
      }
      case StmtKind::Placeholder: {
        Frame proto = frames.back();
        run_level(proto, proto.level + 1);
        return Flow::Normal;
      }
      case StmtKind::Break: return Flow::Break;
      case StmtKind::Continue: return Flow::Continue;
    }
    return Flow::Normal;
  }

  Flow loop(const Expr* cond, const Expr* post, const Stmt& body) {
    for (size_t iter = 0;; ++iter) {
      if (iter > 100000) throw ReplayError("loop did not terminate");
      if (cond && eval(*cond, Ctx{}).v == 0) return Flow::Normal;
      Flow f = exec(body);
      if (f == Flow::Break) return Flow::Normal;
      if (f == Flow::Return) return f;
      if (post) eval(*post, Ctx{});
    }
  }

  void var_decl(const Stmt& s) {
    bool rule = frames.back().rule;
    if (!s.expr) {
      for (const auto& d : s.decls) {
        if (!d) continue;
        TypePtr t = type_of(*d->type);
        RV v;
        if (rule && !d->name.empty() && d->name[0] == '$' && t->is_value()) {
          v = RV::scalar(oracle().i, t);
          if (const auto* sv = contract.state_var(d->name.substr(1)); sv && sv->type->is_value() && !sv->def->constant)
            if (state_node(*sv, false)->scalar != v.v && rule_run) rule_run->assumptions_hold = false;
        } else {
          v = default_rv(t);
        }
        frames.back().scopes.back()[d->name] = v;
      }
      return;
    }
    RV v = eval(*s.expr, Ctx{});
    auto bind = [&](const VarDecl& d, const RV& x) {
      TypePtr t = type_of(*d.type);
      RV b = x;
      if (t->is_value()) b = RV::scalar(x.v, t);
      else b = coerce(x, t, d.location, x.kind == RV::Kind::Ref && in_storage(x.ref));
      frames.back().scopes.back()[d.name] = b;
    };
    if (s.decls.size() == 1 && s.decls[0]) {
      bind(*s.decls[0], v);
      return;
    }
    for (size_t k = 0; k < s.decls.size(); ++k)
      if (s.decls[k]) bind(*s.decls[k], v.items.at(k));
  }

  // ---- transactions ----
  template <typename F>
  void transaction(F&& body) {
    auto saved = storage;
    std::map<std::string, NodePtr> copy;
    for (const auto& [k, v] : storage) copy[k] = clone(v);
    try {
      body();
    } catch (const Reverted&) {
      storage = std::move(copy);
      frames.clear();
      throw;
    }
    (void)saved;
  }

  const FunctionInfo* find(const std::string& name, size_t arity) {
    for (const auto* f : program.public_functions(contract))
      if (f->name() == name && f->arity() == arity) return f;
    return program.dispatch(contract, name, arity);
  }
};

Interpreter::Interpreter(const ResolvedProgram& program, const ResolvedSpec* spec)
    : impl_(std::make_unique<Impl>(program, spec)) {
  impl_->reset_storage();
  impl_->old = impl_->storage;
}

Interpreter::~Interpreter() = default;

void Interpreter::set_oracles(std::deque<CValue> values) { impl_->oracles = std::move(values); }
size_t Interpreter::oracles_left() const { return impl_->oracles.size(); }
void Interpreter::set_this(const BigInt& address) { impl_->this_address = address; }

void Interpreter::deploy(const std::vector<CValue>& args, const CEnv& env) {
  auto& I = *impl_;
  I.reset_storage();
  I.env = env;
  I.frames.clear();
  const auto& lin = I.contract.linearization;
  std::map<const ContractInfo*, std::vector<RV>> cargs;
  const FunctionInfo* main_ctor = I.contract.constructor();
  if (main_ctor) {
    std::vector<RV> vs;
    for (size_t k = 0; k < args.size() && k < main_ctor->arity(); ++k) vs.push_back(I.to_rv(args[k], main_ctor->param_types[k]));
    cargs[&I.contract] = vs;
  }
  I.transaction([&] {
    for (const ContractInfo* c : lin) {
      const FunctionInfo* ctor = c->constructor();
      Frame f;
      f.scopes.emplace_back();
      if (ctor && cargs.count(c)) {
        Frame proto;
        proto.fn = ctor;
        f = I.params(*ctor, cargs[c], proto, 0);
      }
      I.frames.push_back(f);
      for (const auto& b : c->def->bases)
        if (!b.args.empty()) {
          std::vector<RV> vs;
          for (const auto& a : b.args) vs.push_back(I.eval(*a, Impl::Ctx{}));
          cargs[I.program.contract(b.name)] = vs;
        }
      if (ctor)
        for (const auto& m : ctor->def->modifiers)
          if (const ContractInfo* base = I.program.contract(m.name)) {
            std::vector<RV> vs;
            for (const auto& a : m.args) vs.push_back(I.eval(*a, Impl::Ctx{}));
            cargs[base] = vs;
          }
      I.frames.pop_back();
    }
    for (auto it = lin.rbegin(); it != lin.rend(); ++it) {
      const ContractInfo* c = *it;
      for (const auto& sv : c->own_vars) {
        if (sv->def->constant || !sv->def->init) continue;
        I.frames.push_back(Frame{{{}}});
        RV v = I.eval(*sv->def->init, Impl::Ctx{});
        I.frames.pop_back();
        NodePtr n = I.state_node(*sv, false);
        if (n->type->is_value()) n->scalar = v.v;
        else Impl::assign_node(n, v.ref);
      }
      const FunctionInfo* ctor = c->constructor();
      if (ctor && ctor->def->body) {
        I.frames.push_back(Frame{{{}}});
        I.invoke(*ctor, cargs[c]);
        I.frames.pop_back();
      }
    }
  });
  I.old = I.storage;
}

void Interpreter::call(const std::string& function, const std::vector<CValue>& args, const CEnv& env) {
  auto& I = *impl_;
  const FunctionInfo* fn = I.find(function, args.size());
  if (!fn) throw ReplayError("no function " + function);
  I.env = env;
  I.frames.clear();
  I.transaction([&] {
    if (fn->def->mutability != Mutability::Payable && env.value != 0)
      throw Reverted("non-payable function received value");
    std::vector<RV> vs;
    for (size_t k = 0; k < args.size(); ++k) vs.push_back(I.to_rv(args[k], fn->param_types[k]));
    I.frames.push_back(Frame{{{}}});
    RV r = I.invoke(*fn, vs);
    I.frames.pop_back();
    I.last_ret.clear();
    if (r.kind == RV::Kind::Tuple) I.last_ret = r.items;
    else if (r.kind != RV::Kind::None) I.last_ret.push_back(r);
  });
}

void Interpreter::snapshot() {
  impl_->old.clear();
  for (const auto& [k, v] : impl_->storage) impl_->old[k] = Impl::clone(v);
}

bool Interpreter::condition(const frontend::Expr& e, const std::map<std::string, CValue>& bindings, bool entry_state) {
  auto& I = *impl_;
  Frame f;
  f.scopes.emplace_back();
  const FunctionInfo* target = I.spec ? I.spec->target : nullptr;
  for (const auto& [name, v] : bindings) {
    TypePtr t = types::uint_t();
    if (target) {
      for (size_t k = 0; k < I.spec->param_names.size(); ++k)
        if (I.spec->param_names[k] == name) t = target->param_types[k];
      for (size_t k = 0; k < target->def->returns.size(); ++k)
        if (target->def->returns[k].name == name) t = target->return_types[k];
    }
    f.scopes[0][name] = I.to_rv(v, t);
  }
  I.frames.push_back(f);
  Impl::Ctx c;
  c.spec = true;
  c.old = entry_state;
  bool r = I.eval(e, c).v != 0;
  I.frames.pop_back();
  return r;
}

std::vector<CValue> Interpreter::last_return() const {
  std::vector<CValue> out;
  for (const auto& r : impl_->last_ret) out.push_back(impl_->to_cvalue(r));
  return out;
}

RuleRun Interpreter::run_rule(const CEnv& env) {
  auto& I = *impl_;
  RuleRun run;
  if (!I.spec || I.spec->unit().kind != SpecKind::Rule) throw ReplayError("not a rule");
  I.env = env;
  I.frames.clear();
  snapshot();
  I.rule_run = &run;
  Frame f;
  f.scopes.emplace_back();
  f.rule = true;
  I.frames.push_back(f);
  try {
    for (const auto& p : I.spec->unit().params) {
      TypePtr t = I.type_of(*p.type);
      if (!t->is_value()) throw ReplayError("reference-typed rule parameter");
      I.frames.back().scopes[0][p.name] = RV::scalar(I.oracle().i, t);
    }
    I.transaction([&] { I.exec_list(I.spec->unit().body); });
  } catch (const Reverted&) {
    run.reverted = true;
    run.obligations.clear();
  }
  I.frames.clear();
  I.rule_run = nullptr;
  return run;
}

BigInt Interpreter::state_scalar(const std::string& name) const {
  auto it = impl_->storage.find(name);
  if (it == impl_->storage.end()) throw ReplayError("no state variable " + name);
  return it->second->scalar;
}

}  // namespace ppgpt::verify
