#include "ppgpt/frontend/source.hpp"

#include <algorithm>

#include "ppgpt/frontend/diagnostic.hpp"

namespace ppgpt::frontend {

SourceFile::SourceFile(std::string name, std::string text) : name_(std::move(name)), text_(std::move(text)) {
  line_starts_.push_back(0);
  for (uint32_t i = 0; i < text_.size(); ++i)
    if (text_[i] == '\n') line_starts_.push_back(i + 1);
}

LineCol SourceFile::location(uint32_t offset) const {
  auto it = std::upper_bound(line_starts_.begin(), line_starts_.end(), offset);
  auto line = static_cast<uint32_t>(it - line_starts_.begin());
  return {line, offset - line_starts_[line - 1] + 1};
}

std::string_view SourceFile::slice(Span span) const {
  auto end = std::min<size_t>(span.end, text_.size());
  auto begin = std::min<size_t>(span.begin, end);
  return std::string_view(text_).substr(begin, end - begin);
}

Diagnostic make_diagnostic(const SourceFile& source, Span span, std::string code, std::string message,
                           Severity severity) {
  Diagnostic d;
  d.severity = severity;
  d.code = std::move(code);
  d.message = std::move(message);
  d.file = source.name();
  d.span = span;
  auto lc = source.location(span.begin);
  d.line = lc.line;
  d.col = lc.col;
  return d;
}

bool has_errors(const std::vector<Diagnostic>& diags) {
  return std::any_of(diags.begin(), diags.end(), [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

std::string render_diagnostics(std::vector<Diagnostic> diags) {
  std::stable_sort(diags.begin(), diags.end(), [](const Diagnostic& a, const Diagnostic& b) {
    if (a.file != b.file) return a.file < b.file;
    return a.span.begin < b.span.begin;
  });
  std::string out;
  for (const auto& d : diags) {
    out += d.code;
    out += ' ';
    out += d.file;
    out += ':' + std::to_string(d.line) + ':' + std::to_string(d.col) + ": ";
    out += d.message;
    out += '\n';
  }
  return out;
}

}  // namespace ppgpt::frontend
