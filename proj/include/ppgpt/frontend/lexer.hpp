#pragma once

#include <string>
#include <vector>

#include "ppgpt/frontend/diagnostic.hpp"
#include "ppgpt/frontend/source.hpp"

namespace ppgpt::frontend {

enum class TokenKind { Identifier, Number, HexNumber, String, Punct, End };

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;  // identifiers, punctuation and raw number spelling; decoded bytes for strings
  Span span;

  bool is(TokenKind k, std::string_view t) const { return kind == k && text == t; }
  bool is_punct(std::string_view t) const { return is(TokenKind::Punct, t); }
  bool is_ident(std::string_view t) const { return is(TokenKind::Identifier, t); }
};

/// Tokenizes MiniSol/PSL text. Identifiers may start with `$` (symbolic rule variables).
/// Lexical errors are appended to `diags`; lexing continues past them.
std::vector<Token> tokenize(const SourceFile& source, std::vector<Diagnostic>& diags);

}  // namespace ppgpt::frontend
