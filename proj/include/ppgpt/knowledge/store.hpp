#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ppgpt/knowledge/embedder.hpp"

namespace ppgpt::knowledge {

enum class EntryKind { Rule, Condition, Invariant };
const char* to_string(EntryKind k);
EntryKind parse_kind(const std::string& s);  // throws StoreError(InvalidEntry)

struct KnowledgeEntry {
  std::string id;
  std::string code;
  std::string code_summary;
  std::string property;
  std::string property_summary;
  EntryKind kind = EntryKind::Rule;
  std::string source;

  bool operator==(const KnowledgeEntry&) const = default;
};

// knowledge.jsonl: one {id, code, code_summary, property, property_summary, kind, source} per line.
std::vector<KnowledgeEntry> load_entries(const std::string& path);
std::vector<KnowledgeEntry> parse_entries(const std::string& text, const std::string& origin = "<text>");
void save_entries(const std::string& path, const std::vector<KnowledgeEntry>& entries);

struct QueryResult {
  KnowledgeEntry entry;
  double similarity = 0;
};

/// Code embeddings keyed by entry id. Only `code` is embedded.
class KnowledgeStore {
 public:
  explicit KnowledgeStore(size_t dimension = 256, std::string embedder = "") : dim_(dimension), embedder_(std::move(embedder)) {}

  // Re-ingesting an identical entry is a no-op; same id with other content is DuplicateId.
  void ingest(const std::vector<KnowledgeEntry>& entries, EmbeddingProvider& embedder);
  // Adds an entry with a precomputed vector (normalized here).
  void add(const KnowledgeEntry& entry, const Vector& vector);

  // Entries with similarity >= threshold, descending, ties by id; `max` caps the count.
  std::vector<QueryResult> retrieve(const std::string& code, EmbeddingProvider& embedder, double threshold = 0.8,
                                    std::optional<size_t> max = std::nullopt) const;
  std::vector<QueryResult> retrieve_vector(const Vector& query, double threshold = 0.8,
                                           std::optional<size_t> max = std::nullopt) const;

  void persist(const std::string& path) const;
  static KnowledgeStore load(const std::string& path);

  size_t size() const { return entries_.size(); }
  size_t dimension() const { return dim_; }
  const std::string& embedder() const { return embedder_; }
  const std::vector<KnowledgeEntry>& entries() const { return entries_; }
  const std::vector<Vector>& vectors() const { return vectors_; }
  const KnowledgeEntry* find(const std::string& id) const;

  static constexpr int kFormatVersion = 1;

 private:
  size_t dim_;
  std::string embedder_;
  std::vector<KnowledgeEntry> entries_;
  std::vector<Vector> vectors_;
};

}  // namespace ppgpt::knowledge
