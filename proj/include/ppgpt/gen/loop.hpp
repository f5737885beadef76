#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ppgpt/frontend/resolver.hpp"
#include "ppgpt/gen/prompts.hpp"
#include "ppgpt/gen/provider.hpp"
#include "ppgpt/knowledge/store.hpp"

namespace ppgpt::gen {

enum class CandidateStatus { Compiling, Compilable, Failed };
const char* to_string(CandidateStatus s);

struct Exchange {
  PromptKind kind;
  std::string prompt;
  std::string response;
};

struct CandidateProperty {
  std::string id;
  std::string text;
  std::string ref_entry_id;
  knowledge::EntryKind kind = knowledge::EntryKind::Rule;
  int attempts = 0;  // revision calls, the initial generation excluded
  CandidateStatus status = CandidateStatus::Compiling;
  std::string reason;  // Failed only
  std::vector<Exchange> transcript;
};

struct GenTarget {
  std::string func_code;
  std::string contract_code;
  std::string function_name;
  std::shared_ptr<const frontend::ResolvedProgram> program;
};

// Cuts a response down to the property: the first fenced block if there is
// one, otherwise everything from the first line that starts a property.
std::string clean_response(const std::string& response);

struct CompileResult {
  bool ok = false;       // parses, resolves, checks, and has the requested kind
  bool covered = true;   // rules: every rule calls the target function
  std::vector<frontend::Diagnostic> diagnostics;
  std::string rendered;  // render_diagnostics(diagnostics)
};

CompileResult compile_candidate(const frontend::ResolvedProgram& program, const std::string& text,
                                knowledge::EntryKind kind, const std::string& function_name);

// Rule references use the rule template; conditions and invariants the condition one.
PromptKind generation_kind(knowledge::EntryKind k);

CandidateProperty generate_candidate(LLMProvider& provider, const knowledge::KnowledgeEntry& ref,
                                     const GenTarget& target, const LLMParams& params = {});

// Revises in place until the candidate compiles and covers the target, or
// `max_attempts` revision calls have been made.
void revise_until_compilable(LLMProvider& provider, CandidateProperty& candidate, const GenTarget& target,
                             int max_attempts = 9, const LLMParams& params = {},
                             const std::string& knowledge_rule = "");

enum class SummaryMode { Code, Property };
std::string summary_prompt(const std::string& text, SummaryMode mode);
std::string summarize(LLMProvider& provider, const std::string& text, SummaryMode mode, const LLMParams& params = {});

}  // namespace ppgpt::gen
