#pragma once

#include <memory>
#include <string>
#include <vector>

namespace ppgpt::smt {

struct SExpr {
  bool atom = true;
  std::string text;  // atom spelling; quoted symbols are unquoted
  std::vector<std::shared_ptr<const SExpr>> items;

  bool is(const std::string& s) const { return atom && text == s; }
  const SExpr& at(size_t i) const { return *items.at(i); }
  size_t size() const { return items.size(); }
};
using SExprPtr = std::shared_ptr<const SExpr>;

// Parses all top-level S-expressions in `text`. Throws SolverError on malformed input.
std::vector<SExprPtr> parse_sexprs(const std::string& text);
std::string to_string(const SExpr& e);

}  // namespace ppgpt::smt
