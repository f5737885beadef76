#include "ppgpt/frontend/printer.hpp"

#include <sstream>

namespace ppgpt::frontend {
namespace {

int binary_precedence(const std::string& op) {
  if (op == "||") return 1;
  if (op == "&&") return 2;
  if (op == "==" || op == "!=") return 3;
  if (op == "<" || op == ">" || op == "<=" || op == ">=") return 4;
  if (op == "|") return 5;
  if (op == "^") return 6;
  if (op == "&") return 7;
  if (op == "<<" || op == ">>") return 8;
  if (op == "+" || op == "-") return 9;
  if (op == "*" || op == "/" || op == "%") return 10;
  if (op == "**") return 11;
  return 0;
}

// Binding strength of an expression as it appears in the printed output.
int strength(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Assign: return -2;
    case ExprKind::Ternary: return -1;
    case ExprKind::Binary: return binary_precedence(e.name);
    case ExprKind::Unary: return (e.name == "post++" || e.name == "post--") ? 13 : 12;
    default: return 14;
  }
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      case '\0': out += "\\0"; break;
      default: out += c;
    }
  }
  return out + "\"";
}

std::string wrap(const Expr& e, int min_strength) {
  std::string s = print_expr(e);
  return strength(e) < min_strength ? "(" + s + ")" : s;
}

std::string join_args(const std::vector<ExprPtr>& args, size_t from = 0) {
  std::string out;
  for (size_t i = from; i < args.size(); ++i) {
    if (i > from) out += ", ";
    out += print_expr(*args[i]);
  }
  return out;
}

std::string print_param(const Param& p) {
  std::string out = print_type(*p.type);
  if (p.location != DataLocation::Default) out += std::string(" ") + to_string(p.location);
  if (!p.name.empty()) out += " " + p.name;
  return out;
}

std::string print_params(const std::vector<Param>& ps) {
  std::string out = "(";
  for (size_t i = 0; i < ps.size(); ++i) {
    if (i) out += ", ";
    out += print_param(ps[i]);
  }
  return out + ")";
}

std::string pad(int indent) { return std::string(static_cast<size_t>(indent) * 4, ' '); }

std::string print_simple(const Stmt& s) {
  // statement text without trailing ';' (used inside for-headers)
  if (s.kind == StmtKind::VarDecl) {
    std::string out;
    if (s.decls.size() == 1 && s.decls[0]) {
      const auto& d = *s.decls[0];
      out = print_type(*d.type);
      if (d.location != DataLocation::Default) out += std::string(" ") + to_string(d.location);
      out += " " + d.name;
    } else {
      out = "(";
      for (size_t i = 0; i < s.decls.size(); ++i) {
        if (i) out += ", ";
        if (const auto& d = s.decls[i]) {
          out += print_type(*d->type);
          if (d->location != DataLocation::Default) out += std::string(" ") + to_string(d->location);
          out += " " + d->name;
        }
      }
      out += ")";
    }
    if (s.expr) out += " = " + print_expr(*s.expr);
    return out;
  }
  return s.expr ? print_expr(*s.expr) : "";
}

std::string print_body_stmt(const Stmt& s, int indent) {
  // nested statement of if/for/while: blocks stay on the same line
  if (s.kind == StmtKind::Block) return " " + print_stmt(s, indent).substr(static_cast<size_t>(indent) * 4);
  return "\n" + print_stmt(s, indent + 1);
}

}  // namespace

std::string print_type(const TypeName& t) {
  switch (t.kind) {
    case TypeNameKind::Elementary: return t.payable ? t.name + " payable" : t.name;
    case TypeNameKind::UserDefined: return t.name;
    case TypeNameKind::Mapping: return "mapping(" + print_type(*t.key) + " => " + print_type(*t.element) + ")";
    case TypeNameKind::Array: return print_type(*t.element) + "[]";
  }
  return "";
}

std::string print_expr(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Identifier: return e.name;
    case ExprKind::Number: return e.str;
    case ExprKind::Bool: return e.boolean ? "true" : "false";
    case ExprKind::String: return quote(e.str);
    case ExprKind::Unary: {
      if (e.name == "post++" || e.name == "post--") return wrap(*e.operands[0], 13) + e.name.substr(4);
      std::string op = e.name == "delete" ? "delete " : e.name;
      // avoid `- -x` lexing as `--x`
      std::string inner = wrap(*e.operands[0], 12);
      if ((op == "-" && inner.rfind('-', 0) == 0) || (op == "!" && false)) inner = "(" + inner + ")";
      return op + inner;
    }
    case ExprKind::Binary: {
      int p = binary_precedence(e.name);
      bool right_assoc = e.name == "**";
      std::string lhs = wrap(*e.operands[0], right_assoc ? p + 1 : p);
      std::string rhs = wrap(*e.operands[1], right_assoc ? p : p + 1);
      return lhs + " " + e.name + " " + rhs;
    }
    case ExprKind::Assign:
      return wrap(*e.operands[0], 0) + " " + e.name + " " + wrap(*e.operands[1], -2);
    case ExprKind::Ternary:
      return wrap(*e.operands[0], 1) + " ? " + wrap(*e.operands[1], -2) + " : " + wrap(*e.operands[2], -2);
    case ExprKind::Index: return wrap(*e.operands[0], 13) + "[" + print_expr(*e.operands[1]) + "]";
    case ExprKind::Member: {
      std::string base = wrap(*e.operands[0], 13);
      // a bare number followed by '.' would lex as a malformed literal
      if (e.operands[0]->kind == ExprKind::Number) base = "(" + base + ")";
      return base + "." + e.name;
    }
    case ExprKind::Call: {
      std::string out = wrap(*e.operands[0], 13);
      if (!e.options.empty()) {
        out += "{";
        for (size_t i = 0; i < e.options.size(); ++i) {
          if (i) out += ", ";
          out += e.options[i].name + ": " + print_expr(*e.options[i].value);
        }
        out += "}";
      }
      return out + "(" + join_args(e.operands, 1) + ")";
    }
    case ExprKind::Old: return "old(" + print_expr(*e.operands[0]) + ")";  // `__old__` normalizes to `old`
    case ExprKind::New: return "new " + print_type(*e.type_name) + "(" + join_args(e.operands) + ")";
    case ExprKind::ElementaryType:
      if (e.type_name->payable && e.type_name->name == "address") return "payable";
      return print_type(*e.type_name);
    case ExprKind::Tuple: {
      std::string out = "(";
      for (size_t i = 0; i < e.operands.size(); ++i) {
        if (i) out += ", ";
        if (e.operands[i]) out += print_expr(*e.operands[i]);
      }
      return out + ")";
    }
  }
  return "";
}

std::string print_stmt(const Stmt& s, int indent) {
  std::string p = pad(indent);
  switch (s.kind) {
    case StmtKind::Block:
    case StmtKind::Unchecked: {
      std::string out = p + (s.kind == StmtKind::Unchecked ? "unchecked {\n" : "{\n");
      for (const auto& c : s.children) out += print_stmt(*c, indent + 1) + "\n";
      return out + p + "}";
    }
    case StmtKind::VarDecl:
    case StmtKind::Expr: return p + print_simple(s) + ";";
    case StmtKind::If: {
      std::string out = p + "if (" + print_expr(*s.expr) + ")" + print_body_stmt(*s.children[0], indent);
      if (s.children[1]) {
        out += s.children[0]->kind == StmtKind::Block ? " else" : "\n" + p + "else";
        if (s.children[1]->kind == StmtKind::If)
          out += " " + print_stmt(*s.children[1], indent).substr(p.size());
        else
          out += print_body_stmt(*s.children[1], indent);
      }
      return out;
    }
    case StmtKind::For: {
      std::string out = p + "for (";
      out += s.children[0] ? print_simple(*s.children[0]) : "";
      out += "; ";
      out += s.expr ? print_expr(*s.expr) : "";
      out += "; ";
      out += s.expr2 ? print_expr(*s.expr2) : "";
      return out + ")" + print_body_stmt(*s.children[1], indent);
    }
    case StmtKind::While: return p + "while (" + print_expr(*s.expr) + ")" + print_body_stmt(*s.children[0], indent);
    case StmtKind::Return: return p + (s.expr ? "return " + print_expr(*s.expr) + ";" : "return;");
    case StmtKind::Emit: return p + "emit " + print_expr(*s.expr) + ";";
    case StmtKind::Placeholder: return p + "_;";
    case StmtKind::Break: return p + "break;";
    case StmtKind::Continue: return p + "continue;";
  }
  return "";
}

namespace {

std::string print_function(const FunctionDef& f, int indent) {
  std::string p = pad(indent);
  std::string out = p;
  switch (f.kind) {
    case FunctionKind::Function: out += "function " + f.name + print_params(f.params); break;
    case FunctionKind::Modifier: out += "modifier " + f.name + print_params(f.params); break;
    default: out += f.name + print_params(f.params); break;
  }
  if (f.visibility != Visibility::Default) out += std::string(" ") + to_string(f.visibility);
  switch (f.mutability) {
    case Mutability::View: out += " view"; break;
    case Mutability::Pure: out += " pure"; break;
    case Mutability::Payable: out += " payable"; break;
    default: break;
  }
  if (f.is_virtual) out += " virtual";
  if (f.is_override) out += " override";
  for (const auto& m : f.modifiers) {
    out += " " + m.name;
    if (m.has_parens) out += "(" + join_args(m.args) + ")";
  }
  if (!f.returns.empty()) out += " returns " + print_params(f.returns);
  if (!f.body) return out + ";";
  return out + " " + print_stmt(*f.body, indent).substr(p.size());
}

}  // namespace

std::string print_unit(const SourceUnit& unit) {
  std::string out;
  for (const auto& pr : unit.pragmas) out += "pragma " + pr + ";\n";
  for (const auto& c : unit.contracts) {
    if (!out.empty()) out += "\n";
    out += c.kind == ContractKind::Interface  ? "interface "
           : c.kind == ContractKind::Abstract ? "abstract contract "
                                              : "contract ";
    out += c.name;
    if (!c.bases.empty()) {
      out += " is ";
      for (size_t i = 0; i < c.bases.size(); ++i) {
        if (i) out += ", ";
        out += c.bases[i].name;
        if (!c.bases[i].args.empty()) out += "(" + join_args(c.bases[i].args) + ")";
      }
    }
    out += " {\n";
    for (const auto& s : c.structs) {
      out += "    struct " + s.name + " {\n";
      for (const auto& f : s.fields) out += "        " + print_param(f) + ";\n";
      out += "    }\n";
    }
    for (const auto& e : c.events) out += "    event " + e.name + print_params(e.params) + ";\n";
    for (const auto& v : c.state_vars) {
      out += "    " + print_type(*v.type);
      if (v.visibility != Visibility::Default) out += std::string(" ") + to_string(v.visibility);
      if (v.constant) out += " constant";
      if (v.immutable) out += " immutable";
      out += " " + v.name;
      if (v.init) out += " = " + print_expr(*v.init);
      out += ";\n";
    }
    for (const auto& m : c.modifiers) out += print_function(m, 1) + "\n";
    for (const auto& f : c.functions) out += print_function(f, 1) + "\n";
    out += "}\n";
  }
  return out;
}

std::string print_spec(const SpecUnit& u) {
  std::string out;
  auto block = [&](const char* kw, const std::vector<ExprPtr>& es, int indent) {
    std::string p = pad(indent);
    std::string r = p + kw + " {\n";
    for (const auto& e : es) r += p + "    " + print_expr(*e) + ";\n";
    return r + p + "}\n";
  };
  switch (u.kind) {
    case SpecKind::Invariant:
      out = "invariant " + u.name + (u.has_params ? "()" : "") + " {\n";
      for (const auto& e : u.exprs) out += "    " + print_expr(*e) + ";\n";
      return out + "}\n";
    case SpecKind::Rule:
      out = "rule " + u.name + print_params(u.params) + " {\n";
      for (const auto& s : u.body) out += print_stmt(*s, 1) + "\n";
      return out + "}\n";
    case SpecKind::FunctionSpec: {
      out = "function " + u.name + (u.has_params ? print_params(u.params) : "");
      int indent = u.braced ? 1 : 0;
      out += u.braced ? " {\n" : "\n";
      if (u.has_pre) out += block("precondition", u.pre, indent);
      if (u.has_post) out += block("postcondition", u.post, indent);
      if (u.braced) out += "}\n";
      return out;
    }
  }
  return out;
}

std::string print_specs(const SpecFile& file) {
  std::string out;
  for (size_t i = 0; i < file.units.size(); ++i) {
    if (i) out += "\n";
    out += print_spec(file.units[i]);
  }
  return out;
}

// ---- dumps -----------------------------------------------------------------

namespace {

void dump_type(std::ostream& os, const TypeName* t) {
  if (!t) {
    os << "_";
    return;
  }
  switch (t->kind) {
    case TypeNameKind::Elementary: os << "(elem " << t->name << (t->payable ? " payable" : "") << ")"; break;
    case TypeNameKind::UserDefined: os << "(user " << t->name << ")"; break;
    case TypeNameKind::Mapping:
      os << "(mapping ";
      dump_type(os, t->key.get());
      os << " ";
      dump_type(os, t->element.get());
      os << ")";
      break;
    case TypeNameKind::Array:
      os << "(array ";
      dump_type(os, t->element.get());
      os << ")";
      break;
  }
}

void dump_e(std::ostream& os, const Expr* e) {
  if (!e) {
    os << "_";
    return;
  }
  os << "(" << static_cast<int>(e->kind) << " ";
  switch (e->kind) {
    case ExprKind::Number: os << e->number; break;
    case ExprKind::Bool: os << (e->boolean ? "true" : "false"); break;
    case ExprKind::String: os << quote(e->str); break;
    default: os << "'" << e->name << "'";
  }
  for (const auto& o : e->operands) {
    os << " ";
    dump_e(os, o.get());
  }
  for (const auto& o : e->options) {
    os << " {" << o.name << " ";
    dump_e(os, o.value.get());
    os << "}";
  }
  if (e->type_name) {
    os << " ";
    dump_type(os, e->type_name.get());
  }
  os << ")";
}

void dump_decl(std::ostream& os, const VarDecl& d) {
  os << "(decl ";
  dump_type(os, d.type.get());
  os << " " << static_cast<int>(d.location) << " " << d.name << ")";
}

void dump_s(std::ostream& os, const Stmt* s) {
  if (!s) {
    os << "_";
    return;
  }
  os << "[" << static_cast<int>(s->kind);
  for (const auto& d : s->decls) {
    os << " ";
    if (d)
      dump_decl(os, *d);
    else
      os << "_";
  }
  os << " ";
  dump_e(os, s->expr.get());
  os << " ";
  dump_e(os, s->expr2.get());
  for (const auto& c : s->children) {
    os << " ";
    dump_s(os, c.get());
  }
  os << "]";
}

void dump_params(std::ostream& os, const std::vector<Param>& ps) {
  os << "(params";
  for (const auto& p : ps) {
    os << " (";
    dump_type(os, p.type.get());
    os << " " << static_cast<int>(p.location) << " " << p.name << ")";
  }
  os << ")";
}

void dump_fn(std::ostream& os, const FunctionDef& f) {
  os << "(fn " << static_cast<int>(f.kind) << " " << f.name << " " << static_cast<int>(f.visibility) << " "
     << static_cast<int>(f.mutability) << " " << f.is_virtual << f.is_override << " ";
  dump_params(os, f.params);
  dump_params(os, f.returns);
  for (const auto& m : f.modifiers) {
    os << " (mod " << m.name << " " << m.has_parens;
    for (const auto& a : m.args) {
      os << " ";
      dump_e(os, a.get());
    }
    os << ")";
  }
  os << " ";
  dump_s(os, f.body.get());
  os << ")";
}

}  // namespace

std::string dump_expr(const Expr& e) {
  std::ostringstream os;
  dump_e(os, &e);
  return os.str();
}

std::string dump_unit(const SourceUnit& unit) {
  std::ostringstream os;
  for (const auto& p : unit.pragmas) os << "(pragma " << p << ")\n";
  for (const auto& c : unit.contracts) {
    os << "(contract " << static_cast<int>(c.kind) << " " << c.name;
    for (const auto& b : c.bases) {
      os << " (base " << b.name;
      for (const auto& a : b.args) {
        os << " ";
        dump_e(os, a.get());
      }
      os << ")";
    }
    os << "\n";
    for (const auto& s : c.structs) {
      os << " (struct " << s.name << " ";
      dump_params(os, s.fields);
      os << ")\n";
    }
    for (const auto& e : c.events) {
      os << " (event " << e.name << " ";
      dump_params(os, e.params);
      os << ")\n";
    }
    for (const auto& v : c.state_vars) {
      os << " (var ";
      dump_type(os, v.type.get());
      os << " " << v.name << " " << static_cast<int>(v.visibility) << v.constant << v.immutable << " ";
      dump_e(os, v.init.get());
      os << ")\n";
    }
    for (const auto& m : c.modifiers) {
      os << " ";
      dump_fn(os, m);
      os << "\n";
    }
    for (const auto& f : c.functions) {
      os << " ";
      dump_fn(os, f);
      os << "\n";
    }
    os << ")\n";
  }
  return os.str();
}

std::string dump_specs(const SpecFile& file) {
  std::ostringstream os;
  for (const auto& u : file.units) {
    os << "(spec " << static_cast<int>(u.kind) << " " << u.name << " " << u.has_params << u.braced << u.has_pre
       << u.has_post << " ";
    dump_params(os, u.params);
    for (const auto* list : {&u.exprs, &u.pre, &u.post}) {
      os << " (";
      for (const auto& e : *list) dump_e(os, e.get());
      os << ")";
    }
    for (const auto& s : u.body) {
      os << " ";
      dump_s(os, s.get());
    }
    os << ")\n";
  }
  return os.str();
}

}  // namespace ppgpt::frontend
