#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace ppgpt::frontend {

/// Half-open byte range [begin, end) into a SourceFile.
struct Span {
  uint32_t begin = 0;
  uint32_t end = 0;

  bool contains(const Span& other) const { return begin <= other.begin && other.end <= end; }
  static Span cover(const Span& a, const Span& b) { return {std::min(a.begin, b.begin), std::max(a.end, b.end)}; }
  bool operator==(const Span&) const = default;
};

struct LineCol {
  uint32_t line = 1;
  uint32_t col = 1;
};

class SourceFile {
 public:
  SourceFile(std::string name, std::string text);

  const std::string& name() const { return name_; }
  const std::string& text() const { return text_; }
  LineCol location(uint32_t offset) const;
  std::string_view slice(Span span) const;

 private:
  std::string name_;
  std::string text_;
  std::vector<uint32_t> line_starts_;
};

using SourcePtr = std::shared_ptr<const SourceFile>;

inline SourcePtr make_source(std::string name, std::string text) {
  return std::make_shared<const SourceFile>(std::move(name), std::move(text));
}

}  // namespace ppgpt::frontend
