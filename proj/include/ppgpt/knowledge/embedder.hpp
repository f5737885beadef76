#pragma once

#include <memory>
#include <string>
#include <vector>

namespace ppgpt::knowledge {

using Vector = std::vector<double>;

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  // Raw provider vector; the store normalizes it.
  virtual Vector embed(const std::string& text) = 0;
  virtual size_t dimension() const = 0;
  virtual std::string name() const = 0;
};

/// Offline embedder: hashed token and token-bigram frequencies (FNV-1a) in a
/// fixed number of buckets. Deterministic across platforms.
class LocalEmbedder : public EmbeddingProvider {
 public:
  explicit LocalEmbedder(size_t dimension = 256) : dim_(dimension) {}
  Vector embed(const std::string& text) override;
  size_t dimension() const override { return dim_; }
  std::string name() const override { return "local-fnv-" + std::to_string(dim_); }

 private:
  size_t dim_;
};

struct RemoteEmbedderOptions {
  std::string endpoint;  // http(s)://host[:port]/path
  std::string model;
  std::string api_key;
  size_t dimension = 0;  // 0: whatever the first answer has
  int timeout_ms = 30000;
};

/// POSTs {"text", "model"} and expects {"vector": [...]} back.
class RemoteEmbedder : public EmbeddingProvider {
 public:
  explicit RemoteEmbedder(RemoteEmbedderOptions options);
  Vector embed(const std::string& text) override;
  size_t dimension() const override { return options_.dimension; }
  std::string name() const override { return "remote:" + options_.model; }

 private:
  RemoteEmbedderOptions options_;
};

// Splits code into identifier, number and punctuation tokens; comments dropped.
std::vector<std::string> tokenize_code(const std::string& text);

uint64_t fnv1a(const std::string& s);

// Unit-norm copy; throws StoreError(InvalidEntry) on a zero or non-finite vector.
Vector normalize(const Vector& v);
double dot(const Vector& a, const Vector& b);

}  // namespace ppgpt::knowledge
