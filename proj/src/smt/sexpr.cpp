#include "ppgpt/smt/sexpr.hpp"

#include <cctype>

#include "ppgpt/common/error.hpp"

namespace ppgpt::smt {

namespace {

struct Reader {
  const std::string& s;
  size_t i = 0;

  void skip() {
    while (i < s.size()) {
      if (std::isspace(static_cast<unsigned char>(s[i]))) {
        ++i;
      } else if (s[i] == ';') {
        while (i < s.size() && s[i] != '\n') ++i;
      } else {
        break;
      }
    }
  }

  SExprPtr read() {
    skip();
    if (i >= s.size()) throw SolverError("unexpected end of solver output");
    auto e = std::make_shared<SExpr>();
    char c = s[i];
    if (c == '(') {
      ++i;
      e->atom = false;
      for (;;) {
        skip();
        if (i >= s.size()) throw SolverError("unbalanced parenthesis in solver output");
        if (s[i] == ')') {
          ++i;
          break;
        }
        e->items.push_back(read());
      }
      return e;
    }
    if (c == ')') throw SolverError("unexpected ')' in solver output");
    if (c == '|') {
      size_t end = s.find('|', i + 1);
      if (end == std::string::npos) throw SolverError("unterminated quoted symbol in solver output");
      e->text = s.substr(i + 1, end - i - 1);
      i = end + 1;
      return e;
    }
    if (c == '"') {
      std::string out = "\"";
      ++i;
      for (;;) {
        if (i >= s.size()) throw SolverError("unterminated string in solver output");
        if (s[i] == '"') {
          if (i + 1 < s.size() && s[i + 1] == '"') {
            out += "\"\"";
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        out += s[i++];
      }
      e->text = out + "\"";
      return e;
    }
    size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) && s[i] != '(' && s[i] != ')') ++i;
    e->text = s.substr(start, i - start);
    return e;
  }
};

}  // namespace

std::vector<SExprPtr> parse_sexprs(const std::string& text) {
  Reader r{text};
  std::vector<SExprPtr> out;
  for (;;) {
    r.skip();
    if (r.i >= text.size()) break;
    out.push_back(r.read());
  }
  return out;
}

std::string to_string(const SExpr& e) {
  if (e.atom) return e.text;
  std::string out = "(";
  for (size_t k = 0; k < e.items.size(); ++k) {
    if (k) out += " ";
    out += to_string(*e.items[k]);
  }
  return out + ")";
}

}  // namespace ppgpt::smt
