#pragma once

#include <string>
#include <vector>

#include "ppgpt/frontend/source.hpp"

namespace ppgpt::frontend {

enum class Severity { Error, Warning };

/// Stable error codes. Lexical 1xxx, syntax 2xxx, resolution 3xxx, spec checks 4xxx.
namespace codes {
inline constexpr const char* kUnexpectedChar = "E1001";
inline constexpr const char* kUnterminatedString = "E1002";
inline constexpr const char* kUnterminatedComment = "E1003";
inline constexpr const char* kMalformedNumber = "E1004";
inline constexpr const char* kSyntax = "E2001";
inline constexpr const char* kUnsupported = "E2002";
inline constexpr const char* kStatementForm = "E2003";
inline constexpr const char* kUndeclared = "E3001";
inline constexpr const char* kAmbiguousOverride = "E3002";
inline constexpr const char* kTypeMismatch = "E3003";
inline constexpr const char* kDuplicate = "E3004";
inline constexpr const char* kInheritance = "E3005";
inline constexpr const char* kArgumentCount = "E3006";
inline constexpr const char* kInvalidOld = "E3007";
inline constexpr const char* kUnknownFunction = "E3008";
inline constexpr const char* kCallInCondition = "E3009";
inline constexpr const char* kUnknownMember = "E3010";
inline constexpr const char* kSymbolicOutsideRule = "E4001";
inline constexpr const char* kNotBoolean = "E4002";
inline constexpr const char* kTargetNotCovered = "E4003";
inline constexpr const char* kKindMismatch = "E4004";
inline constexpr const char* kWrongTarget = "E4005";
}  // namespace codes

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string code;
  std::string message;
  std::string file;
  Span span;
  uint32_t line = 1;
  uint32_t col = 1;
};

Diagnostic make_diagnostic(const SourceFile& source, Span span, std::string code, std::string message,
                           Severity severity = Severity::Error);

bool has_errors(const std::vector<Diagnostic>& diags);

/// One line per diagnostic, `CODE file:line:col: message`, sorted by file then offset.
std::string render_diagnostics(std::vector<Diagnostic> diags);

/// Parse results carry either a value or the diagnostics explaining why there is none.
template <class T>
struct Parsed {
  std::shared_ptr<const T> value;
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return value != nullptr; }
};

}  // namespace ppgpt::frontend
