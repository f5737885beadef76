#include "ppgpt/frontend/parser.hpp"

#include <array>
#include <charconv>
#include <set>

#include "ppgpt/frontend/lexer.hpp"

namespace ppgpt::frontend {
namespace {

struct SyntaxError {
  Diagnostic diag;
};

const std::set<std::string, std::less<>> kReserved = {
    "contract", "interface", "library", "abstract", "function", "modifier", "constructor", "event",
    "struct",   "mapping",   "returns", "return",   "if",       "else",     "for",         "while",
    "do",       "break",     "continue", "emit",    "new",      "delete",   "true",        "false",
    "public",   "external",  "internal", "private", "view",     "pure",     "payable",     "virtual",
    "override", "memory",    "storage", "calldata", "constant", "immutable", "unchecked",  "using",
    "import",   "pragma",    "enum",     "is",      "invariant", "rule",    "precondition", "postcondition"};

bool is_location(std::string_view w) { return w == "memory" || w == "storage" || w == "calldata"; }

DataLocation location_of(std::string_view w) {
  if (w == "memory") return DataLocation::Memory;
  if (w == "storage") return DataLocation::Storage;
  if (w == "calldata") return DataLocation::Calldata;
  return DataLocation::Default;
}

bool valid_width(std::string_view digits, int lo, int hi, int step) {
  if (digits.empty() || digits.front() == '0') return false;
  int v = 0;
  auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
  if (ec != std::errc() || p != digits.data() + digits.size()) return false;
  return v >= lo && v <= hi && v % step == 0;
}

int precedence(std::string_view op) {
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

bool is_assign_op(std::string_view op) {
  return op == "=" || op == "+=" || op == "-=" || op == "*=" || op == "/=" || op == "%=" || op == "|=" ||
         op == "&=" || op == "^=";
}

BigInt parse_decimal(std::string_view spelling) {
  BigInt v = 0;
  size_t i = 0;
  for (; i < spelling.size(); ++i) {
    char c = spelling[i];
    if (c == '_') continue;
    if (c == 'e' || c == 'E') break;
    v = v * 10 + (c - '0');
  }
  if (i < spelling.size()) {
    unsigned exp = 0;
    for (++i; i < spelling.size(); ++i) exp = exp * 10 + static_cast<unsigned>(spelling[i] - '0');
    for (unsigned k = 0; k < exp; ++k) v *= 10;
  }
  return v;
}

BigInt parse_hex(std::string_view spelling) {
  BigInt v = 0;
  for (size_t i = 2; i < spelling.size(); ++i) {
    char c = spelling[i];
    if (c == '_') continue;
    int d = (c >= '0' && c <= '9') ? c - '0' : (c >= 'a' && c <= 'f') ? c - 'a' + 10 : c - 'A' + 10;
    v = v * 16 + d;
  }
  return v;
}

std::optional<BigInt> unit_multiplier(std::string_view unit) {
  if (unit == "wei" || unit == "seconds") return BigInt(1);
  if (unit == "gwei") return BigInt(1000000000);
  if (unit == "ether") return BigInt("1000000000000000000");
  if (unit == "minutes") return BigInt(60);
  if (unit == "hours") return BigInt(3600);
  if (unit == "days") return BigInt(86400);
  if (unit == "weeks") return BigInt(604800);
  return std::nullopt;
}

class Parser {
 public:
  Parser(const SourceFile& source, std::vector<Token> tokens) : src_(source), toks_(std::move(tokens)) {}

  std::shared_ptr<SourceUnit> parse_unit(SourcePtr ptr) {
    auto unit = std::make_shared<SourceUnit>();
    unit->source = std::move(ptr);
    while (!at_end()) {
      if (peek().is_ident("pragma")) {
        size_t b = peek().span.begin;
        advance();
        std::string text;
        while (!at_end() && !peek().is_punct(";")) {
          if (!text.empty()) text += ' ';
          text += peek().text;
          advance();
        }
        uint32_t e = expect_punct(";").span.end;
        (void)b;
        (void)e;
        unit->pragmas.push_back(text);
        continue;
      }
      if (peek().is_ident("import") || peek().is_ident("library") || peek().is_ident("using") ||
          peek().is_ident("enum")) {
        unsupported(peek(), "'" + peek().text + "' declarations are outside the supported subset");
      }
      unit->contracts.push_back(parse_contract_def());
    }
    return unit;
  }

  std::shared_ptr<SpecFile> parse_specs(SourcePtr ptr) {
    auto file = std::make_shared<SpecFile>();
    file->source = std::move(ptr);
    while (!at_end()) file->units.push_back(parse_spec_unit());
    return file;
  }

  std::vector<Diagnostic> take_form_errors() { return std::move(form_errors_); }

 private:
  // ---- token helpers -------------------------------------------------------
  const Token& peek(size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  bool at_end() const { return peek().kind == TokenKind::End; }
  const Token& advance() {
    const Token& t = toks_[pos_];
    if (pos_ + 1 < toks_.size()) ++pos_;
    return t;
  }
  uint32_t prev_end() const { return pos_ == 0 ? 0 : toks_[pos_ - 1].span.end; }

  [[noreturn]] void fail(const Token& at, const std::string& message) {
    throw SyntaxError{make_diagnostic(src_, at.span, codes::kSyntax, message)};
  }
  [[noreturn]] void unsupported(const Token& at, const std::string& message) {
    throw SyntaxError{make_diagnostic(src_, at.span, codes::kUnsupported, message)};
  }
  std::string describe(const Token& t) const {
    if (t.kind == TokenKind::End) return "end of input";
    if (t.kind == TokenKind::String) return "string literal";
    return "'" + t.text + "'";
  }
  const Token& expect_punct(std::string_view p) {
    if (!peek().is_punct(p)) fail(peek(), "expected '" + std::string(p) + "' but found " + describe(peek()));
    return advance();
  }
  bool accept_punct(std::string_view p) {
    if (peek().is_punct(p)) {
      advance();
      return true;
    }
    return false;
  }
  bool accept_ident(std::string_view w) {
    if (peek().is_ident(w)) {
      advance();
      return true;
    }
    return false;
  }
  const Token& expect_keyword(std::string_view w) {
    if (!peek().is_ident(w)) fail(peek(), "expected '" + std::string(w) + "' but found " + describe(peek()));
    return advance();
  }
  const Token& expect_name(const char* what) {
    const Token& t = peek();
    if (t.kind != TokenKind::Identifier || kReserved.count(t.text))
      fail(t, std::string("expected ") + what + " but found " + describe(t));
    return advance();
  }

  // ---- types ---------------------------------------------------------------
  bool starts_type(size_t k = 0) const {
    const Token& t = peek(k);
    if (t.kind != TokenKind::Identifier) return false;
    return is_elementary_type_name(t.text) || t.text == "mapping";
  }

  TypeNamePtr parse_type() {
    auto t = std::make_shared<TypeName>();
    const Token& first = peek();
    t->span.begin = first.span.begin;
    if (first.is_ident("mapping")) {
      advance();
      expect_punct("(");
      t->kind = TypeNameKind::Mapping;
      t->key = parse_type();
      if (peek().kind == TokenKind::Identifier && !peek().is_punct("=>") && !kReserved.count(peek().text)) advance();
      expect_punct("=>");
      t->element = parse_type();
      if (peek().kind == TokenKind::Identifier && !kReserved.count(peek().text)) advance();
      expect_punct(")");
    } else if (first.kind == TokenKind::Identifier && is_elementary_type_name(first.text)) {
      advance();
      t->kind = TypeNameKind::Elementary;
      t->name = canonical_type_name(first.text);
      if (t->name == "address" && accept_ident("payable")) t->payable = true;
    } else if (first.kind == TokenKind::Identifier && !kReserved.count(first.text)) {
      advance();
      t->kind = TypeNameKind::UserDefined;
      t->name = first.text;
      if (peek().is_punct(".")) unsupported(peek(), "qualified type names are outside the supported subset");
    } else {
      fail(first, "expected type name but found " + describe(first));
    }
    t->span.end = prev_end();
    TypeNamePtr result = t;
    while (peek().is_punct("[")) {
      if (!peek(1).is_punct("]")) unsupported(peek(), "fixed-size arrays are outside the supported subset");
      advance();
      advance();
      auto arr = std::make_shared<TypeName>();
      arr->kind = TypeNameKind::Array;
      arr->element = result;
      arr->span = {t->span.begin, prev_end()};
      result = arr;
    }
    return result;
  }

  Param parse_param(bool name_required) {
    Param p;
    uint32_t b = peek().span.begin;
    p.type = parse_type();
    if (peek().kind == TokenKind::Identifier && is_location(peek().text)) p.location = location_of(advance().text);
    if (peek().kind == TokenKind::Identifier && !kReserved.count(peek().text)) {
      p.name = advance().text;
    } else if (name_required) {
      fail(peek(), "expected parameter name but found " + describe(peek()));
    }
    p.span = {b, prev_end()};
    return p;
  }

  std::vector<Param> parse_param_list(bool names_required) {
    std::vector<Param> out;
    expect_punct("(");
    if (accept_punct(")")) return out;
    do {
      out.push_back(parse_param(names_required));
    } while (accept_punct(","));
    expect_punct(")");
    return out;
  }

  // ---- contracts -----------------------------------------------------------
  ContractDef parse_contract_def() {
    ContractDef c;
    c.span.begin = peek().span.begin;
    if (accept_ident("abstract")) {
      expect_keyword("contract");
      c.kind = ContractKind::Abstract;
    } else if (accept_ident("interface")) {
      c.kind = ContractKind::Interface;
    } else if (peek().is_ident("contract")) {
      advance();
    } else {
      fail(peek(), "expected 'contract' or 'interface' but found " + describe(peek()));
    }
    const Token& name = expect_name("contract name");
    c.name = name.text;
    c.name_span = name.span;
    if (accept_ident("is")) {
      do {
        BaseSpecifier base;
        const Token& bn = expect_name("base contract name");
        base.name = bn.text;
        base.span.begin = bn.span.begin;
        if (peek().is_punct("(")) base.args = parse_call_args();
        base.span.end = prev_end();
        c.bases.push_back(std::move(base));
      } while (accept_punct(","));
    }
    expect_punct("{");
    while (!peek().is_punct("}")) {
      if (at_end()) fail(peek(), "expected '}' but found end of input");
      parse_member(c);
    }
    advance();
    c.span.end = prev_end();
    return c;
  }

  void parse_member(ContractDef& c) {
    const Token& t = peek();
    if (t.is_ident("struct")) {
      StructDef s;
      s.span.begin = advance().span.begin;
      s.name = expect_name("struct name").text;
      expect_punct("{");
      while (!accept_punct("}")) {
        s.fields.push_back(parse_param(true));
        expect_punct(";");
      }
      s.span.end = prev_end();
      c.structs.push_back(std::move(s));
      return;
    }
    if (t.is_ident("event")) {
      EventDef e;
      e.span.begin = advance().span.begin;
      e.name = expect_name("event name").text;
      expect_punct("(");
      if (!accept_punct(")")) {
        do {
          Param p;
          uint32_t b = peek().span.begin;
          p.type = parse_type();
          accept_ident("indexed");
          if (peek().kind == TokenKind::Identifier && !kReserved.count(peek().text)) p.name = advance().text;
          p.span = {b, prev_end()};
          e.params.push_back(std::move(p));
        } while (accept_punct(","));
        expect_punct(")");
      }
      accept_ident("anonymous");
      expect_punct(";");
      e.span.end = prev_end();
      c.events.push_back(std::move(e));
      return;
    }
    if (t.is_ident("function") || t.is_ident("constructor") || t.is_ident("modifier") || t.is_ident("receive") ||
        t.is_ident("fallback")) {
      FunctionDef f = parse_function();
      if (f.kind == FunctionKind::Modifier)
        c.modifiers.push_back(std::move(f));
      else
        c.functions.push_back(std::move(f));
      return;
    }
    if (t.is_ident("using") || t.is_ident("enum") || t.is_ident("error") || t.is_ident("library"))
      unsupported(t, "'" + t.text + "' declarations are outside the supported subset");
    c.state_vars.push_back(parse_state_var());
  }

  StateVarDef parse_state_var() {
    StateVarDef v;
    v.span.begin = peek().span.begin;
    v.type = parse_type();
    for (;;) {
      const Token& t = peek();
      if (t.is_ident("public")) v.visibility = Visibility::Public;
      else if (t.is_ident("private")) v.visibility = Visibility::Private;
      else if (t.is_ident("internal")) v.visibility = Visibility::Internal;
      else if (t.is_ident("constant")) v.constant = true;
      else if (t.is_ident("immutable")) v.immutable = true;
      else if (t.is_ident("override")) {}
      else break;
      advance();
    }
    v.name = expect_name("state variable name").text;
    if (accept_punct("=")) v.init = parse_expr();
    expect_punct(";");
    v.span.end = prev_end();
    return v;
  }

  FunctionDef parse_function() {
    FunctionDef f;
    const Token& kw = advance();
    f.span.begin = kw.span.begin;
    if (kw.text == "function") {
      const Token& n = expect_name("function name");
      f.name = n.text;
      f.name_span = n.span;
    } else if (kw.text == "modifier") {
      f.kind = FunctionKind::Modifier;
      const Token& n = expect_name("modifier name");
      f.name = n.text;
      f.name_span = n.span;
    } else {
      f.kind = kw.text == "constructor" ? FunctionKind::Constructor
               : kw.text == "receive"   ? FunctionKind::Receive
                                        : FunctionKind::Fallback;
      f.name = kw.text;
      f.name_span = kw.span;
    }
    if (f.kind != FunctionKind::Modifier || peek().is_punct("(")) f.params = parse_param_list(false);
    for (;;) {
      const Token& t = peek();
      if (t.is_ident("public")) { f.visibility = Visibility::Public; advance(); }
      else if (t.is_ident("external")) { f.visibility = Visibility::External; advance(); }
      else if (t.is_ident("internal")) { f.visibility = Visibility::Internal; advance(); }
      else if (t.is_ident("private")) { f.visibility = Visibility::Private; advance(); }
      else if (t.is_ident("view")) { f.mutability = Mutability::View; advance(); }
      else if (t.is_ident("pure")) { f.mutability = Mutability::Pure; advance(); }
      else if (t.is_ident("payable")) { f.mutability = Mutability::Payable; advance(); }
      else if (t.is_ident("virtual")) { f.is_virtual = true; advance(); }
      else if (t.is_ident("override")) {
        f.is_override = true;
        advance();
        if (accept_punct("(")) {
          while (!accept_punct(")")) {
            if (at_end()) fail(peek(), "expected ')'");
            advance();
          }
        }
      } else if (t.is_ident("returns")) {
        advance();
        f.returns = parse_param_list(false);
      } else if (t.kind == TokenKind::Identifier && !kReserved.count(t.text)) {
        ModifierInvocation m;
        m.span.begin = t.span.begin;
        m.name = advance().text;
        if (peek().is_punct("(")) {
          m.has_parens = true;
          m.args = parse_call_args();
        }
        m.span.end = prev_end();
        f.modifiers.push_back(std::move(m));
      } else {
        break;
      }
    }
    if (accept_punct(";")) {
      f.span.end = prev_end();
      return f;
    }
    f.body = parse_block();
    f.span.end = prev_end();
    return f;
  }

  // ---- statements ----------------------------------------------------------
  StmtPtr parse_block() {
    auto b = std::make_shared<Stmt>();
    b->kind = StmtKind::Block;
    b->span.begin = expect_punct("{").span.begin;
    while (!peek().is_punct("}")) {
      if (at_end()) fail(peek(), "expected '}' but found end of input");
      b->children.push_back(parse_statement());
    }
    advance();
    b->span.end = prev_end();
    return b;
  }

  bool looks_like_decl() const {
    const Token& t = peek();
    if (t.kind != TokenKind::Identifier) return false;
    if (t.is_ident("mapping")) return true;
    if (is_elementary_type_name(t.text)) {
      // `address(x).call(...)` and `uint256(x)` are expressions
      return !peek(1).is_punct("(");
    }
    if (kReserved.count(t.text)) return false;
    // `T x`, `T storage x`, `T[] memory x`
    const Token& n = peek(1);
    if (n.kind == TokenKind::Identifier && !n.is_ident("is")) return true;
    if (n.is_punct("[") && peek(2).is_punct("]")) return true;
    return false;
  }

  bool looks_like_tuple_decl() const {
    if (!peek().is_punct("(")) return false;
    size_t k = 1;
    while (peek(k).is_punct(",")) ++k;
    const Token& t = peek(k);
    if (t.kind != TokenKind::Identifier) return false;
    if (is_elementary_type_name(t.text) || t.text == "mapping") return !peek(k + 1).is_punct("(");
    const Token& n = peek(k + 1);
    return !kReserved.count(t.text) && n.kind == TokenKind::Identifier;
  }

  VarDecl parse_var_decl_item() {
    VarDecl d;
    uint32_t b = peek().span.begin;
    d.type = parse_type();
    if (peek().kind == TokenKind::Identifier && is_location(peek().text)) d.location = location_of(advance().text);
    const Token& n = expect_name("variable name");
    d.name = n.text;
    d.span = {b, prev_end()};
    return d;
  }

  StmtPtr parse_statement() {
    const Token& t = peek();
    auto s = std::make_shared<Stmt>();
    s->span.begin = t.span.begin;
    if (t.is_punct("{")) return parse_block();
    if (t.is_ident("if")) {
      advance();
      s->kind = StmtKind::If;
      expect_punct("(");
      s->expr = parse_expr();
      expect_punct(")");
      s->children.push_back(parse_statement());
      s->children.push_back(accept_ident("else") ? parse_statement() : nullptr);
    } else if (t.is_ident("for")) {
      advance();
      s->kind = StmtKind::For;
      expect_punct("(");
      if (accept_punct(";")) {
        s->children.push_back(nullptr);
      } else {
        s->children.push_back(parse_simple_statement());
      }
      if (!peek().is_punct(";")) s->expr = parse_expr();
      expect_punct(";");
      if (!peek().is_punct(")")) s->expr2 = parse_expr();
      expect_punct(")");
      s->children.push_back(parse_statement());
    } else if (t.is_ident("while")) {
      advance();
      s->kind = StmtKind::While;
      expect_punct("(");
      s->expr = parse_expr();
      expect_punct(")");
      s->children.push_back(parse_statement());
    } else if (t.is_ident("do")) {
      unsupported(t, "do-while loops are outside the supported subset");
    } else if (t.is_ident("return")) {
      advance();
      s->kind = StmtKind::Return;
      if (!peek().is_punct(";")) s->expr = parse_expr();
      expect_punct(";");
    } else if (t.is_ident("emit")) {
      advance();
      s->kind = StmtKind::Emit;
      s->expr = parse_expr();
      if (s->expr->kind != ExprKind::Call) fail(t, "expected event invocation after 'emit'");
      expect_punct(";");
    } else if (t.is_ident("break")) {
      advance();
      s->kind = StmtKind::Break;
      expect_punct(";");
    } else if (t.is_ident("continue")) {
      advance();
      s->kind = StmtKind::Continue;
      expect_punct(";");
    } else if (t.is_ident("unchecked")) {
      advance();
      s->kind = StmtKind::Unchecked;
      auto block = parse_block();
      s->children = block->children;
    } else if (t.is_ident("_") && peek(1).is_punct(";")) {
      advance();
      advance();
      s->kind = StmtKind::Placeholder;
    } else if (t.is_ident("assembly")) {
      unsupported(t, "inline assembly is outside the supported subset");
    } else if (t.is_ident("try")) {
      unsupported(t, "try/catch is outside the supported subset");
    } else {
      return parse_simple_statement();
    }
    s->span.end = prev_end();
    return s;
  }

  // declaration or expression statement, terminated by ';'
  StmtPtr parse_simple_statement() {
    auto s = std::make_shared<Stmt>();
    s->span.begin = peek().span.begin;
    if (looks_like_tuple_decl()) {
      s->kind = StmtKind::VarDecl;
      advance();  // '('
      for (;;) {
        if (peek().is_punct(",")) {
          s->decls.push_back(std::nullopt);
          advance();
          continue;
        }
        if (peek().is_punct(")")) {
          s->decls.push_back(std::nullopt);
          break;
        }
        s->decls.push_back(parse_var_decl_item());
        if (!accept_punct(",")) break;
        if (peek().is_punct(")")) {
          s->decls.push_back(std::nullopt);
          break;
        }
      }
      expect_punct(")");
      expect_punct("=");
      s->expr = parse_expr();
    } else if (looks_like_decl()) {
      s->kind = StmtKind::VarDecl;
      s->decls.push_back(parse_var_decl_item());
      if (accept_punct("=")) s->expr = parse_expr();
    } else {
      s->kind = StmtKind::Expr;
      s->expr = parse_expr();
    }
    expect_punct(";");
    s->span.end = prev_end();
    return s;
  }

  // ---- expressions ---------------------------------------------------------
  ExprPtr make(ExprKind kind, uint32_t begin) {
    auto e = std::make_shared<Expr>();
    e->kind = kind;
    e->span = {begin, prev_end()};
    return e;
  }

  ExprPtr parse_expr() { return parse_assignment(); }

  ExprPtr parse_assignment() {
    uint32_t b = peek().span.begin;
    ExprPtr lhs = parse_ternary();
    if (peek().kind == TokenKind::Punct && is_assign_op(peek().text)) {
      std::string op = advance().text;
      ExprPtr rhs = parse_assignment();
      auto e = std::make_shared<Expr>();
      e->kind = ExprKind::Assign;
      e->name = op;
      e->operands = {lhs, rhs};
      e->span = {b, prev_end()};
      return e;
    }
    return lhs;
  }

  ExprPtr parse_ternary() {
    uint32_t b = peek().span.begin;
    ExprPtr cond = parse_binary(1);
    if (accept_punct("?")) {
      ExprPtr t = parse_assignment();
      expect_punct(":");
      ExprPtr f = parse_assignment();
      auto e = std::make_shared<Expr>();
      e->kind = ExprKind::Ternary;
      e->operands = {cond, t, f};
      e->span = {b, prev_end()};
      return e;
    }
    return cond;
  }

  ExprPtr parse_binary(int min_prec) {
    uint32_t b = peek().span.begin;
    ExprPtr lhs = parse_unary();
    for (;;) {
      const Token& t = peek();
      if (t.kind != TokenKind::Punct) break;
      int p = precedence(t.text);
      if (p == 0 || p < min_prec) break;
      std::string op = advance().text;
      // `**` is right-associative
      ExprPtr rhs = parse_binary(op == "**" ? p : p + 1);
      auto e = std::make_shared<Expr>();
      e->kind = ExprKind::Binary;
      e->name = op;
      e->operands = {lhs, rhs};
      e->span = {b, prev_end()};
      lhs = e;
    }
    return lhs;
  }

  ExprPtr parse_unary() {
    const Token& t = peek();
    uint32_t b = t.span.begin;
    if (t.is_punct("!") || t.is_punct("-") || t.is_punct("++") || t.is_punct("--") || t.is_punct("~") ||
        t.is_ident("delete")) {
      std::string op = advance().text;
      ExprPtr operand = parse_unary();
      auto e = std::make_shared<Expr>();
      e->kind = ExprKind::Unary;
      e->name = op;
      e->operands = {operand};
      e->span = {b, prev_end()};
      return e;
    }
    return parse_postfix();
  }

  std::vector<ExprPtr> parse_call_args() {
    std::vector<ExprPtr> args;
    expect_punct("(");
    if (peek().is_punct("{")) unsupported(peek(), "named call arguments are outside the supported subset");
    if (accept_punct(")")) return args;
    do {
      args.push_back(parse_expr());
    } while (accept_punct(","));
    expect_punct(")");
    return args;
  }

  ExprPtr parse_postfix() {
    uint32_t b = peek().span.begin;
    ExprPtr e = parse_primary();
    for (;;) {
      if (peek().is_punct(".")) {
        advance();
        const Token& m = peek();
        if (m.kind != TokenKind::Identifier) fail(m, "expected member name but found " + describe(m));
        advance();
        auto n = std::make_shared<Expr>();
        n->kind = ExprKind::Member;
        n->name = m.text;
        n->operands = {e};
        n->span = {b, prev_end()};
        e = n;
      } else if (peek().is_punct("[")) {
        advance();
        if (peek().is_punct("]")) unsupported(peek(), "index range/empty index is outside the supported subset");
        ExprPtr idx = parse_expr();
        expect_punct("]");
        auto n = std::make_shared<Expr>();
        n->kind = ExprKind::Index;
        n->operands = {e, idx};
        n->span = {b, prev_end()};
        e = n;
      } else if (peek().is_punct("{") && peek(1).kind == TokenKind::Identifier && peek(2).is_punct(":")) {
        advance();
        std::vector<NamedArg> options;
        do {
          NamedArg a;
          a.name = expect_name("call option name").text;
          expect_punct(":");
          a.value = parse_expr();
          options.push_back(std::move(a));
        } while (accept_punct(","));
        expect_punct("}");
        if (!peek().is_punct("(")) fail(peek(), "expected '(' after call options");
        auto args = parse_call_args();
        auto n = std::make_shared<Expr>();
        n->kind = ExprKind::Call;
        n->operands.push_back(e);
        n->operands.insert(n->operands.end(), args.begin(), args.end());
        n->options = std::move(options);
        n->span = {b, prev_end()};
        e = n;
      } else if (peek().is_punct("(")) {
        auto args = parse_call_args();
        auto n = std::make_shared<Expr>();
        n->kind = ExprKind::Call;
        n->operands.push_back(e);
        n->operands.insert(n->operands.end(), args.begin(), args.end());
        n->span = {b, prev_end()};
        e = n;
      } else if (peek().is_punct("++") || peek().is_punct("--")) {
        std::string op = "post" + advance().text;
        auto n = std::make_shared<Expr>();
        n->kind = ExprKind::Unary;
        n->name = op;
        n->operands = {e};
        n->span = {b, prev_end()};
        e = n;
      } else {
        break;
      }
    }
    return e;
  }

  ExprPtr parse_primary() {
    const Token& t = peek();
    uint32_t b = t.span.begin;
    if (t.kind == TokenKind::Number || t.kind == TokenKind::HexNumber) {
      auto e = std::make_shared<Expr>();
      e->kind = ExprKind::Number;
      e->str = t.text;
      e->number = t.kind == TokenKind::Number ? parse_decimal(t.text) : parse_hex(t.text);
      advance();
      if (peek().kind == TokenKind::Identifier) {
        if (auto mult = unit_multiplier(peek().text)) {
          e->str += " " + advance().text;
          e->number *= *mult;
        }
      }
      e->span = {b, prev_end()};
      return e;
    }
    if (t.kind == TokenKind::String) {
      auto e = std::make_shared<Expr>();
      e->kind = ExprKind::String;
      e->str = t.text;
      advance();
      while (peek().kind == TokenKind::String) e->str += advance().text;
      e->span = {b, prev_end()};
      return e;
    }
    if (t.is_punct("(")) {
      advance();
      std::vector<ExprPtr> items;
      bool tuple = false;
      if (peek().is_punct(")")) fail(peek(), "expected expression but found ')'");
      for (;;) {
        if (peek().is_punct(",")) {
          items.push_back(nullptr);
          tuple = true;
          advance();
          continue;
        }
        if (peek().is_punct(")")) {
          items.push_back(nullptr);
          break;
        }
        items.push_back(parse_expr());
        if (!accept_punct(",")) break;
        tuple = true;
        if (peek().is_punct(")")) items.push_back(nullptr);
      }
      expect_punct(")");
      if (!tuple && items.size() == 1) {
        // keep the parenthesised span so children stay inside their parent
        auto inner = std::make_shared<Expr>(*items.front());
        inner->span = {b, prev_end()};
        return inner;
      }
      auto e = std::make_shared<Expr>();
      e->kind = ExprKind::Tuple;
      e->operands = std::move(items);
      e->span = {b, prev_end()};
      return e;
    }
    if (t.kind == TokenKind::Identifier) {
      if (t.is_ident("true") || t.is_ident("false")) {
        auto e = std::make_shared<Expr>();
        e->kind = ExprKind::Bool;
        e->boolean = t.text == "true";
        advance();
        e->span = {b, prev_end()};
        return e;
      }
      if ((t.is_ident("old") || t.is_ident("__old__")) && peek(1).is_punct("(")) {
        std::string spelling = advance().text;
        expect_punct("(");
        ExprPtr inner = parse_expr();
        expect_punct(")");
        auto e = std::make_shared<Expr>();
        e->kind = ExprKind::Old;
        e->str = spelling;
        e->operands = {inner};
        e->span = {b, prev_end()};
        return e;
      }
      if (t.is_ident("new")) {
        advance();
        auto e = std::make_shared<Expr>();
        e->kind = ExprKind::New;
        e->type_name = parse_type();
        if (e->type_name->kind != TypeNameKind::Array)
          unsupported(t, "'new' is only supported for dynamic arrays");
        e->operands = parse_call_args();
        e->span = {b, prev_end()};
        return e;
      }
      if (t.is_ident("payable") && peek(1).is_punct("(")) {
        advance();
        auto tn = std::make_shared<TypeName>();
        tn->kind = TypeNameKind::Elementary;
        tn->name = "address";
        tn->payable = true;
        tn->span = t.span;
        auto e = std::make_shared<Expr>();
        e->kind = ExprKind::ElementaryType;
        e->type_name = tn;
        e->span = {b, prev_end()};
        return e;
      }
      if (t.is_ident("type")) unsupported(t, "type(...) expressions are outside the supported subset");
      if (is_elementary_type_name(t.text)) {
        auto e = std::make_shared<Expr>();
        e->kind = ExprKind::ElementaryType;
        e->type_name = parse_type();
        e->span = {b, prev_end()};
        return e;
      }
      if (kReserved.count(t.text) && !t.is_ident("payable"))
        fail(t, "expected expression but found " + describe(t));
      auto e = std::make_shared<Expr>();
      e->kind = ExprKind::Identifier;
      e->name = t.text;
      advance();
      e->span = {b, prev_end()};
      return e;
    }
    fail(t, "expected expression but found " + describe(t));
  }

  // ---- specifications ------------------------------------------------------
  SpecUnit parse_spec_unit() {
    SpecUnit u;
    const Token& kw = peek();
    u.span.begin = kw.span.begin;
    if (kw.is_ident("invariant")) {
      advance();
      u.kind = SpecKind::Invariant;
      const Token& n = expect_name("invariant name");
      u.name = n.text;
      u.name_span = n.span;
      if (accept_punct("(")) {
        u.has_params = true;
        expect_punct(")");
      }
      u.exprs = parse_condition_block("invariant");
    } else if (kw.is_ident("rule")) {
      advance();
      u.kind = SpecKind::Rule;
      const Token& n = expect_name("rule name");
      u.name = n.text;
      u.name_span = n.span;
      u.has_params = true;
      u.params = parse_param_list(true);
      auto block = parse_block();
      u.body = block->children;
    } else if (kw.is_ident("function")) {
      advance();
      u.kind = SpecKind::FunctionSpec;
      const Token& n = expect_name("function name");
      u.name = n.text;
      u.name_span = n.span;
      if (peek().is_punct("(")) {
        u.has_params = true;
        u.params = parse_param_list(false);
      }
      // tolerate the usual function header words in a copied signature
      while (peek().kind == TokenKind::Identifier &&
             (peek().text == "external" || peek().text == "public" || peek().text == "internal" ||
              peek().text == "view" || peek().text == "payable" || peek().text == "virtual" ||
              peek().text == "override" || peek().text == "pure"))
        advance();
      u.braced = accept_punct("{");
      parse_condition_sections(u);
      if (u.braced) expect_punct("}");
    } else {
      fail(kw, "expected 'invariant', 'rule' or 'function' but found " + describe(kw));
    }
    u.span.end = prev_end();
    return u;
  }

  void parse_condition_sections(SpecUnit& u) {
    bool any = false;
    for (;;) {
      if (peek().is_ident("precondition")) {
        if (u.has_pre) fail(peek(), "duplicate precondition block");
        advance();
        u.has_pre = true;
        u.pre = parse_condition_block("precondition");
        any = true;
      } else if (peek().is_ident("postcondition")) {
        if (u.has_post) fail(peek(), "duplicate postcondition block");
        advance();
        u.has_post = true;
        u.post = parse_condition_block("postcondition");
        any = true;
      } else {
        break;
      }
    }
    if (!any) fail(peek(), "expected 'precondition' or 'postcondition' but found " + describe(peek()));
  }

  static bool has_side_effect(const Expr& e) {
    if (e.kind == ExprKind::Assign) return true;
    if (e.kind == ExprKind::Unary && (e.name == "++" || e.name == "--" || e.name == "post++" ||
                                      e.name == "post--" || e.name == "delete"))
      return true;
    for (const auto& op : e.operands)
      if (op && has_side_effect(*op)) return true;
    return false;
  }

  std::vector<ExprPtr> parse_condition_block(const char* what) {
    std::vector<ExprPtr> out;
    expect_punct("{");
    while (!peek().is_punct("}")) {
      if (at_end()) fail(peek(), "expected '}' but found end of input");
      StmtPtr s = parse_statement();
      if (s->kind != StmtKind::Expr) {
        form_errors_.push_back(make_diagnostic(src_, s->span, codes::kStatementForm,
                                               std::string("only expression statements are permitted in ") + what));
        continue;
      }
      if (has_side_effect(*s->expr)) {
        form_errors_.push_back(make_diagnostic(
            src_, s->span, codes::kStatementForm,
            std::string("only expression statements are permitted in ") + what + "; found a state-changing expression"));
        continue;
      }
      out.push_back(s->expr);
    }
    advance();
    return out;
  }

  const SourceFile& src_;
  std::vector<Token> toks_;
  size_t pos_ = 0;
  std::vector<Diagnostic> form_errors_;
};

template <class T, class Fn>
Parsed<T> run_parser(SourcePtr source, Fn&& fn) {
  Parsed<T> result;
  auto tokens = tokenize(*source, result.diagnostics);
  if (has_errors(result.diagnostics)) return result;
  Parser parser(*source, std::move(tokens));
  try {
    auto value = fn(parser, source);
    auto form = parser.take_form_errors();
    if (!form.empty()) {
      result.diagnostics.insert(result.diagnostics.end(), form.begin(), form.end());
      return result;
    }
    result.value = std::move(value);
  } catch (const SyntaxError& e) {
    auto form = parser.take_form_errors();
    result.diagnostics.insert(result.diagnostics.end(), form.begin(), form.end());
    result.diagnostics.push_back(e.diag);
  }
  return result;
}

}  // namespace

bool is_elementary_type_name(std::string_view w) {
  if (w == "bool" || w == "address" || w == "string" || w == "bytes" || w == "uint" || w == "int" || w == "byte")
    return true;
  if (w.rfind("uint", 0) == 0) return valid_width(w.substr(4), 8, 256, 8);
  if (w.rfind("int", 0) == 0) return valid_width(w.substr(3), 8, 256, 8);
  if (w.rfind("bytes", 0) == 0) return valid_width(w.substr(5), 1, 32, 1);
  return false;
}

std::string canonical_type_name(std::string_view w) {
  if (w == "uint") return "uint256";
  if (w == "int") return "int256";
  if (w == "byte") return "bytes1";
  return std::string(w);
}

Parsed<SourceUnit> parse_contract(SourcePtr source) {
  return run_parser<SourceUnit>(std::move(source), [](Parser& p, SourcePtr s) { return p.parse_unit(std::move(s)); });
}

Parsed<SourceUnit> parse_contract(std::string name, std::string text) {
  return parse_contract(make_source(std::move(name), std::move(text)));
}

Parsed<SpecFile> parse_spec(SourcePtr source) {
  return run_parser<SpecFile>(std::move(source), [](Parser& p, SourcePtr s) { return p.parse_specs(std::move(s)); });
}

Parsed<SpecFile> parse_spec(std::string name, std::string text) {
  return parse_spec(make_source(std::move(name), std::move(text)));
}

const char* to_string(SpecKind kind) {
  switch (kind) {
    case SpecKind::Invariant: return "invariant";
    case SpecKind::FunctionSpec: return "condition";
    case SpecKind::Rule: return "rule";
  }
  return "?";
}

const char* to_string(Visibility v) {
  switch (v) {
    case Visibility::Public: return "public";
    case Visibility::External: return "external";
    case Visibility::Internal: return "internal";
    case Visibility::Private: return "private";
    case Visibility::Default: return "";
  }
  return "";
}

const char* to_string(DataLocation loc) {
  switch (loc) {
    case DataLocation::Memory: return "memory";
    case DataLocation::Storage: return "storage";
    case DataLocation::Calldata: return "calldata";
    case DataLocation::Default: return "";
  }
  return "";
}

}  // namespace ppgpt::frontend
