#include "ppgpt/frontend/lexer.hpp"

#include <array>
#include <cctype>

namespace ppgpt::frontend {
namespace {

constexpr std::array<std::string_view, 24> kMultiPunct = {
    "**", "=>", "==", "!=", "<=", ">=", "&&", "||", "+=", "-=", "*=", "/=",
    "%=", "++", "--", "<<", ">>", "|=", "&=", "^=", "->", "::", "..", ":="};

constexpr std::string_view kSinglePunct = "(){}[];,.?:=<>+-*/%!&|^~";

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$'; }
bool ident_part(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$'; }

}  // namespace

std::vector<Token> tokenize(const SourceFile& source, std::vector<Diagnostic>& diags) {
  const std::string& s = source.text();
  std::vector<Token> out;
  size_t i = 0;
  auto span = [](size_t b, size_t e) { return Span{static_cast<uint32_t>(b), static_cast<uint32_t>(e)}; };

  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '/' && i + 1 < s.size() && s[i + 1] == '/') {
      while (i < s.size() && s[i] != '\n') ++i;
      continue;
    }
    if (c == '/' && i + 1 < s.size() && s[i + 1] == '*') {
      size_t close = s.find("*/", i + 2);
      if (close == std::string::npos) {
        diags.push_back(make_diagnostic(source, span(i, i + 2), codes::kUnterminatedComment, "unterminated block comment"));
        i = s.size();
        break;
      }
      i = close + 2;
      continue;
    }
    size_t start = i;
    if (ident_start(c)) {
      while (i < s.size() && ident_part(s[i])) ++i;
      std::string word = s.substr(start, i - start);
      bool pragma = word == "pragma" && (out.empty() || out.back().is_punct(";") || out.back().is_punct("}"));
      out.push_back({TokenKind::Identifier, std::move(word), span(start, i)});
      if (pragma) {
        // version expressions like ^0.8.0 are kept verbatim
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        size_t b = i;
        while (i < s.size() && s[i] != ';') ++i;
        size_t e = i;
        while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
        out.push_back({TokenKind::String, s.substr(b, e - b), span(b, e)});
      }
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      if (c == '0' && i + 1 < s.size() && (s[i + 1] == 'x' || s[i + 1] == 'X')) {
        i += 2;
        size_t digits = i;
        while (i < s.size() && (std::isxdigit(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
        if (i == digits || (i < s.size() && ident_part(s[i]))) {
          while (i < s.size() && ident_part(s[i])) ++i;
          diags.push_back(make_diagnostic(source, span(start, i), codes::kMalformedNumber, "malformed hex literal"));
          continue;
        }
        out.push_back({TokenKind::HexNumber, s.substr(start, i - start), span(start, i)});
        continue;
      }
      while (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
      if (i < s.size() && (s[i] == 'e' || s[i] == 'E') && i + 1 < s.size() &&
          std::isdigit(static_cast<unsigned char>(s[i + 1]))) {
        ++i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
      }
      if (i < s.size() && (ident_part(s[i]) || s[i] == '.')) {
        while (i < s.size() && (ident_part(s[i]) || s[i] == '.')) ++i;
        diags.push_back(make_diagnostic(source, span(start, i), codes::kMalformedNumber, "malformed number literal"));
        continue;
      }
      out.push_back({TokenKind::Number, s.substr(start, i - start), span(start, i)});
      continue;
    }
    if (c == '"' || c == '\'') {
      char quote = c;
      ++i;
      std::string value;
      bool closed = false;
      while (i < s.size()) {
        char d = s[i];
        if (d == '\n') break;
        if (d == quote) {
          closed = true;
          ++i;
          break;
        }
        if (d == '\\' && i + 1 < s.size()) {
          char e = s[i + 1];
          switch (e) {
            case 'n': value.push_back('\n'); break;
            case 't': value.push_back('\t'); break;
            case 'r': value.push_back('\r'); break;
            case '0': value.push_back('\0'); break;
            default: value.push_back(e); break;
          }
          i += 2;
          continue;
        }
        value.push_back(d);
        ++i;
      }
      if (!closed) {
        diags.push_back(make_diagnostic(source, span(start, i), codes::kUnterminatedString, "unterminated string literal"));
        continue;
      }
      out.push_back({TokenKind::String, std::move(value), span(start, i)});
      continue;
    }
    bool matched = false;
    for (auto p : kMultiPunct) {
      if (s.compare(i, p.size(), p) == 0) {
        out.push_back({TokenKind::Punct, std::string(p), span(i, i + p.size())});
        i += p.size();
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (kSinglePunct.find(c) != std::string_view::npos) {
      out.push_back({TokenKind::Punct, std::string(1, c), span(i, i + 1)});
      ++i;
      continue;
    }
    diags.push_back(make_diagnostic(source, span(i, i + 1), codes::kUnexpectedChar,
                                    std::string("unexpected character '") + c + "'"));
    ++i;
  }
  out.push_back({TokenKind::End, "", span(s.size(), s.size())});
  return out;
}

}  // namespace ppgpt::frontend
