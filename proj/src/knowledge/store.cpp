#include "ppgpt/knowledge/store.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "ppgpt/common/error.hpp"

namespace ppgpt::knowledge {

using nlohmann::json;
using Kind = StoreError::Kind;

const char* to_string(EntryKind k) {
  switch (k) {
    case EntryKind::Rule: return "rule";
    case EntryKind::Condition: return "condition";
    case EntryKind::Invariant: return "invariant";
  }
  return "?";
}

EntryKind parse_kind(const std::string& s) {
  if (s == "rule") return EntryKind::Rule;
  if (s == "condition") return EntryKind::Condition;
  if (s == "invariant") return EntryKind::Invariant;
  throw StoreError(Kind::InvalidEntry, "unknown property kind '" + s + "'");
}

namespace {

json entry_json(const KnowledgeEntry& e) {
  return json{{"id", e.id},
              {"code", e.code},
              {"code_summary", e.code_summary},
              {"property", e.property},
              {"property_summary", e.property_summary},
              {"kind", to_string(e.kind)},
              {"source", e.source}};
}

KnowledgeEntry entry_from(const json& j) {
  KnowledgeEntry e;
  e.id = j.at("id").get<std::string>();
  e.code = j.at("code").get<std::string>();
  e.code_summary = j.value("code_summary", "");
  e.property = j.at("property").get<std::string>();
  e.property_summary = j.value("property_summary", "");
  e.kind = parse_kind(j.at("kind").get<std::string>());
  e.source = j.value("source", "");
  return e;
}

void validate(const KnowledgeEntry& e) {
  if (e.id.empty()) throw StoreError(Kind::InvalidEntry, "entry without id");
  if (e.code.empty()) throw StoreError(Kind::InvalidEntry, "entry '" + e.id + "' has empty code");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::vector<KnowledgeEntry> parse_entries(const std::string& text, const std::string& origin) {
  std::vector<KnowledgeEntry> out;
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(entry_from(json::parse(line)));
      validate(out.back());
    } catch (const json::exception& e) {
      throw StoreError(Kind::InvalidEntry, origin + ":" + std::to_string(n) + ": " + e.what());
    } catch (const StoreError& e) {
      throw StoreError(e.kind(), origin + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

std::vector<KnowledgeEntry> load_entries(const std::string& path) { return parse_entries(read_file(path), path); }

void save_entries(const std::string& path, const std::vector<KnowledgeEntry>& entries) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  for (const auto& e : entries) out << entry_json(e).dump() << "\n";
}

const KnowledgeEntry* KnowledgeStore::find(const std::string& id) const {
  for (const auto& e : entries_)
    if (e.id == id) return &e;
  return nullptr;
}

void KnowledgeStore::add(const KnowledgeEntry& entry, const Vector& vector) {
  validate(entry);
  if (vector.size() != dim_)
    throw StoreError(Kind::DimensionMismatch, "embedding for '" + entry.id + "' has dimension " +
                                                  std::to_string(vector.size()) + ", store uses " + std::to_string(dim_));
  if (const auto* old = find(entry.id)) {
    if (*old == entry) return;
    throw StoreError(Kind::DuplicateId, "duplicate knowledge entry id '" + entry.id + "'");
  }
  entries_.push_back(entry);
  vectors_.push_back(normalize(vector));
}

void KnowledgeStore::ingest(const std::vector<KnowledgeEntry>& entries, EmbeddingProvider& embedder) {
  if (embedder_.empty()) embedder_ = embedder.name();
  // validate the whole batch before touching the store
  std::map<std::string, const KnowledgeEntry*> seen;
  for (const auto& e : entries) {
    validate(e);
    auto [it, fresh] = seen.emplace(e.id, &e);
    if (!fresh && !(*it->second == e)) throw StoreError(Kind::DuplicateId, "duplicate knowledge entry id '" + e.id + "'");
    if (const auto* old = find(e.id); old && !(*old == e))
      throw StoreError(Kind::DuplicateId, "duplicate knowledge entry id '" + e.id + "'");
  }
  for (const auto& e : entries) {
    if (find(e.id)) continue;
    add(e, embedder.embed(e.code));
  }
}

std::vector<QueryResult> KnowledgeStore::retrieve_vector(const Vector& query, double threshold,
                                                         std::optional<size_t> max) const {
  if (entries_.empty()) throw StoreError(Kind::Empty, "knowledge store is empty");
  Vector q = normalize(query);
  std::vector<std::pair<double, size_t>> hits;
  for (size_t i = 0; i < vectors_.size(); ++i) {
    double s = dot(q, vectors_[i]);
    if (s >= threshold) hits.push_back({s, i});
  }
  std::sort(hits.begin(), hits.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return entries_[a.second].id < entries_[b.second].id;
  });
  if (max && hits.size() > *max) hits.resize(*max);
  std::vector<QueryResult> out;
  for (const auto& [s, i] : hits) out.push_back({entries_[i], s});
  return out;
}

std::vector<QueryResult> KnowledgeStore::retrieve(const std::string& code, EmbeddingProvider& embedder,
                                                  double threshold, std::optional<size_t> max) const {
  if (entries_.empty()) throw StoreError(Kind::Empty, "knowledge store is empty");
  return retrieve_vector(embedder.embed(code), threshold, max);
}

void KnowledgeStore::persist(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  json header = {{"format", "ppgpt-knowledge-store"},
                 {"version", kFormatVersion},
                 {"dimension", dim_},
                 {"embedder", embedder_},
                 {"count", entries_.size()}};
  out << header.dump() << "\n";
  for (size_t i = 0; i < entries_.size(); ++i) {
    json j = entry_json(entries_[i]);
    j["vector"] = vectors_[i];
    out << j.dump() << "\n";
  }
  if (!out) throw Error("write to " + path + " failed");
}

KnowledgeStore KnowledgeStore::load(const std::string& path) {
  std::string text = read_file(path);
  std::istringstream in(text);
  std::string line;
  auto corrupt = [&](const std::string& why) { return StoreError(Kind::CorruptFile, path + ": " + why); };
  if (!std::getline(in, line)) throw corrupt("missing header");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception&) {
    throw corrupt("unreadable header");
  }
  if (!header.is_object() || header.value("format", "") != "ppgpt-knowledge-store") throw corrupt("not a knowledge store");
  int version = header.value("version", -1);
  if (version != kFormatVersion)
    throw StoreError(Kind::VersionMismatch, path + ": format version " + std::to_string(version) + " is not supported (expected " +
                                                std::to_string(kFormatVersion) + ")");
  KnowledgeStore s(header.value("dimension", size_t{0}), header.value("embedder", ""));
  size_t count = header.value("count", size_t{0});
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      KnowledgeEntry e = entry_from(j);
      Vector v = j.at("vector").get<Vector>();
      if (v.size() != s.dim_) throw corrupt("vector of '" + e.id + "' has the wrong dimension");
      if (s.find(e.id)) throw corrupt("duplicate id '" + e.id + "'");
      s.entries_.push_back(std::move(e));
      s.vectors_.push_back(std::move(v));  // stored already normalized; keep the exact bits
    } catch (const json::exception&) {
      throw corrupt("malformed record after " + std::to_string(s.entries_.size()) + " entries");
    }
  }
  if (s.entries_.size() != count)
    throw corrupt("expected " + std::to_string(count) + " entries, found " + std::to_string(s.entries_.size()));
  if (!text.empty() && text.back() != '\n') throw corrupt("file is truncated");
  return s;
}

}  // namespace ppgpt::knowledge
