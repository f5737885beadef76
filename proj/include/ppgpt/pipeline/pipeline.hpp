#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ppgpt/gen/loop.hpp"
#include "ppgpt/knowledge/store.hpp"
#include "ppgpt/pipeline/config.hpp"
#include "ppgpt/ranking/ranking.hpp"
#include "ppgpt/verifier/verifier.hpp"

namespace ppgpt::pipeline {

struct Providers {
  std::shared_ptr<gen::LLMProvider> llm;
  std::shared_ptr<knowledge::EmbeddingProvider> embed;
};

// From provider.* and embed.*; the LLM side is built lazily only when asked for.
std::shared_ptr<knowledge::EmbeddingProvider> make_embedder(const Config& c);
std::shared_ptr<gen::LLMProvider> make_llm(const Config& c);
Providers make_providers(const Config& c);

// Weighted-sum weights used by the pipeline: the reference ones, normalized.
ranking::Weights default_weights();

verify::VerifyOptions verify_options(const Config& c);

// Parses and resolves a contract file and cuts out the target function's source.
gen::GenTarget load_target(const std::string& contract_path, const std::string& function);
std::shared_ptr<const frontend::ResolvedProgram> load_program(const std::string& contract_path);

// knowledgePath may hold entries (knowledge.jsonl) or a persisted store.
knowledge::KnowledgeStore load_knowledge(const Config& c, knowledge::EmbeddingProvider& embedder);

struct CandidateRecord {
  gen::CandidateProperty candidate;
  std::optional<ranking::FeatureVector> features;
  std::optional<double> score;
  std::optional<size_t> rank;  // 1-based among compilable candidates
  std::string verdict = "not-verified";  // or a VerdictKind name, or "not-compiled"
  std::string reason;
  std::optional<std::string> counterexample;
  std::optional<size_t> trace_length;
  double generation_ms = 0;
  double verification_ms = 0;
};

struct RunReport {
  std::string contract;
  std::string function;
  size_t retrieved = 0;
  std::vector<CandidateRecord> records;  // score descending, uncompiled last by id

  bool any_violated() const;
};

struct RunOptions {
  bool verify = true;     // false: stop after ranking (gen subcommand)
  bool features = true;
};

RunReport run_pipeline(const Config& c, const std::string& contract_path, const std::string& function,
                       Providers& providers, const RunOptions& options = {});

// One JSON object per candidate. Timings sit under "timings" only.
std::string report_jsonl(const RunReport& r, bool with_transcripts = false);
std::string report_summary(const RunReport& r);
// Reads back what report_jsonl wrote; transcripts are kept when present.
RunReport parse_report(const std::string& jsonl);

// Verify-only mode over a hand-written spec file.
struct SpecVerification {
  std::vector<verify::PropertyResult> results;
  bool any_violated() const;
};
SpecVerification verify_spec_file(const Config& c, const std::string& contract_path, const std::string& spec_path);
std::string verification_jsonl(const SpecVerification& v);
std::string verification_summary(const SpecVerification& v);

}  // namespace ppgpt::pipeline
