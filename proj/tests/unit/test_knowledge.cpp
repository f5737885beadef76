#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ppgpt/common/error.hpp"
#include "ppgpt/knowledge/store.hpp"

using namespace ppgpt;
using namespace ppgpt::knowledge;
namespace fs = std::filesystem;

namespace {

KnowledgeEntry entry(const std::string& id, const std::string& code) {
  return {id, code, "summary of " + id, "rule r() { assert(true); }", "always true", EntryKind::Rule, "test"};
}

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path tmp(const std::string& name) { return fs::temp_directory_path() / ("ppgpt_kb_" + name); }

}  // namespace

TEST(Embedder, DeterministicAndSensitive) {
  LocalEmbedder e;
  auto a = e.embed("function f(uint x) { y = x + 1; }");
  auto b = e.embed("function f(uint x) { y = x + 1; }");
  auto c = e.embed("mapping(address => uint) balances; function withdraw() {}");
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.size(), 256u);
  EXPECT_LT(dot(normalize(a), normalize(c)), 0.9);
}

TEST(Embedder, TokenizerDropsComments) {
  auto t = tokenize_code("x = 1; // note\n/* block */ y");
  EXPECT_EQ(t, (std::vector<std::string>{"x", "=", "1", ";", "y"}));
}

TEST(Embedder, NormalizeRejectsZero) { EXPECT_THROW(normalize({0, 0, 0}), StoreError); }

TEST(Store, SelfRetrievalIsOne) {
  LocalEmbedder e;
  KnowledgeStore s(256, e.name());
  s.ingest({entry("a", "function deposit() payable { bal[msg.sender] += msg.value; }"),
            entry("b", "function owner() view returns (address) { return o; }")},
           e);
  auto r = s.retrieve("function deposit() payable { bal[msg.sender] += msg.value; }", e, 0.8);
  ASSERT_FALSE(r.empty());
  EXPECT_EQ(r[0].entry.id, "a");
  EXPECT_NEAR(r[0].similarity, 1.0, 1e-6);
}

TEST(Store, ThresholdFiltersAndOrders) {
  KnowledgeStore s(2);
  s.add(entry("hi", "x"), {1, 0});
  s.add(entry("lo", "y"), {0.7, std::sqrt(1 - 0.49)});
  s.add(entry("eq", "z"), {1, 0});
  auto r = s.retrieve_vector({1, 0}, 0.8);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].entry.id, "eq");  // tie broken by id
  EXPECT_EQ(r[1].entry.id, "hi");
  EXPECT_EQ(s.retrieve_vector({1, 0}, 0.6).size(), 3u);
  EXPECT_EQ(s.retrieve_vector({1, 0}, 0.0, 1).size(), 1u);
}

TEST(Store, EmptyStoreIsAnError) {
  KnowledgeStore s(2);
  try {
    s.retrieve_vector({1, 0});
    FAIL();
  } catch (const StoreError& e) {
    EXPECT_EQ(e.kind(), StoreError::Kind::Empty);
  }
}

TEST(Store, DuplicatesAndDimensions) {
  LocalEmbedder e(8);
  KnowledgeStore s(8);
  s.ingest({entry("a", "x = 1;")}, e);
  s.ingest({entry("a", "x = 1;")}, e);  // identical, no-op
  EXPECT_EQ(s.size(), 1u);
  try {
    s.ingest({entry("a", "x = 2;")}, e);
    FAIL();
  } catch (const StoreError& err) {
    EXPECT_EQ(err.kind(), StoreError::Kind::DuplicateId);
  }
  try {
    s.add(entry("b", "y"), {1, 2, 3});
    FAIL();
  } catch (const StoreError& err) {
    EXPECT_EQ(err.kind(), StoreError::Kind::DimensionMismatch);
  }
}

TEST(Store, PersistLoadRoundTripIsByteIdentical) {
  LocalEmbedder e;
  KnowledgeStore s(256, e.name());
  s.ingest({entry("a", "function a() { x = 1; }"), entry("b", "function b() { y = \"q\\n\"; }")}, e);
  auto p1 = tmp("rt1.jsonl"), p2 = tmp("rt2.jsonl");
  s.persist(p1.string());
  auto loaded = KnowledgeStore::load(p1.string());
  loaded.persist(p2.string());
  EXPECT_EQ(slurp(p1.string()), slurp(p2.string()));
  EXPECT_EQ(loaded.vectors(), s.vectors());
  EXPECT_EQ(loaded.entries(), s.entries());
  fs::remove(p1);
  fs::remove(p2);
}

TEST(Store, CorruptAndTruncatedFiles) {
  LocalEmbedder e(4);
  KnowledgeStore s(4, e.name());
  s.ingest({entry("a", "a"), entry("b", "b c")}, e);
  auto p = tmp("corrupt.jsonl");
  s.persist(p.string());
  std::string full = slurp(p.string());

  auto expect_kind = [&](const std::string& content, StoreError::Kind k) {
    std::ofstream(p, std::ios::binary) << content;
    try {
      KnowledgeStore::load(p.string());
      ADD_FAILURE() << "loaded";
    } catch (const StoreError& err) {
      EXPECT_EQ(err.kind(), k) << err.what();
    }
  };
  expect_kind(full.substr(0, full.size() - 5), StoreError::Kind::CorruptFile);
  expect_kind("not json\n", StoreError::Kind::CorruptFile);
  std::string v2 = full;
  v2.replace(v2.find("\"version\":1"), 11, "\"version\":2");
  expect_kind(v2, StoreError::Kind::VersionMismatch);
  fs::remove(p);
}

TEST(Entries, ParseAndValidate) {
  auto es = parse_entries(
      R"({"id":"x","code":"c","code_summary":"cs","property":"p","property_summary":"ps","kind":"condition","source":"s"})"
      "\n");
  ASSERT_EQ(es.size(), 1u);
  EXPECT_EQ(es[0].kind, EntryKind::Condition);
  EXPECT_THROW(parse_entries(R"({"id":"x","kind":"bogus"})"), StoreError);
}
