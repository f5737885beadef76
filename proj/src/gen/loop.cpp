#include "ppgpt/gen/loop.hpp"

#include <sstream>

#include "ppgpt/check/spec_checker.hpp"
#include "ppgpt/common/error.hpp"
#include "ppgpt/frontend/parser.hpp"

namespace ppgpt::gen {

using namespace frontend;
using knowledge::EntryKind;

const char* to_string(CandidateStatus s) {
  switch (s) {
    case CandidateStatus::Compiling: return "compiling";
    case CandidateStatus::Compilable: return "compilable";
    case CandidateStatus::Failed: return "failed";
  }
  return "?";
}

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool starts_property(const std::string& line) {
  std::string t = trim(line);
  for (const char* kw : {"rule ", "rule\t", "function ", "invariant ", "//", "/*"})
    if (t.rfind(kw, 0) == 0) return true;
  return false;
}

}  // namespace

std::string clean_response(const std::string& response) {
  size_t f = response.find("```");
  if (f != std::string::npos) {
    size_t body = response.find('\n', f);
    if (body != std::string::npos) {
      size_t end = response.find("```", body + 1);
      return trim(response.substr(body + 1, end == std::string::npos ? std::string::npos : end - body - 1)) + "\n";
    }
  }
  std::istringstream in(response);
  std::string line, out;
  bool on = false;
  while (std::getline(in, line)) {
    if (!on && starts_property(line)) on = true;
    if (on) out += line + "\n";
  }
  if (!on) out = response;
  return trim(out) + "\n";
}

CompileResult compile_candidate(const ResolvedProgram& program, const std::string& text, EntryKind kind,
                                const std::string& function_name) {
  CompileResult r;
  auto parsed = parse_spec("candidate.psl", text);
  if (!parsed.ok()) {
    r.diagnostics = parsed.diagnostics;
    r.rendered = render_diagnostics(r.diagnostics);
    return r;
  }
  const SpecFile& file = *parsed.value;
  bool rule = kind == EntryKind::Rule;
  auto report = check::check_spec_file(program, parsed.value, rule ? std::optional(function_name) : std::nullopt);
  r.diagnostics = report.issues;
  if (file.units.empty())
    r.diagnostics.push_back(make_diagnostic(*file.source, {0, 0}, codes::kKindMismatch, "no property found"));
  for (const auto& u : file.units) {
    if (rule && u.kind != SpecKind::Rule) {
      r.diagnostics.push_back(make_diagnostic(*file.source, u.span, codes::kKindMismatch,
                                              std::string("expected a rule, found ") + frontend::to_string(u.kind)));
    } else if (!rule && u.kind == SpecKind::Rule) {
      r.diagnostics.push_back(make_diagnostic(*file.source, u.span, codes::kKindMismatch,
                                              "expected preconditions and postconditions, found a rule"));
    } else if (u.kind == SpecKind::FunctionSpec && u.name != function_name) {
      r.diagnostics.push_back(make_diagnostic(*file.source, u.name_span, codes::kWrongTarget,
                                              "specification is for '" + u.name + "', expected '" + function_name + "'"));
    }
  }
  r.ok = !has_errors(r.diagnostics);
  if (r.ok && rule)
    for (const auto& [name, covers] : report.coverage)
      if (!covers) r.covered = false;
  r.rendered = render_diagnostics(r.diagnostics);
  return r;
}

PromptKind generation_kind(EntryKind k) { return k == EntryKind::Rule ? PromptKind::RuleGen : PromptKind::ConditionGen; }

CandidateProperty generate_candidate(LLMProvider& provider, const knowledge::KnowledgeEntry& ref, const GenTarget& target,
                                     const LLMParams& params) {
  CandidateProperty c;
  c.ref_entry_id = ref.id;
  c.kind = ref.kind;
  PromptKind pk = generation_kind(ref.kind);
  std::map<std::string, std::string> b = {{"func_code", target.func_code}, {"function_name", target.function_name}};
  if (pk == PromptKind::RuleGen) {
    b["contract_code"] = target.contract_code;
    b["rule_property"] = ref.property;
    b["spec_grammar"] = rule_grammar_example();
  } else {
    b["condition_property"] = ref.property;
  }
  std::string prompt = build_prompt(pk, b);
  std::string resp = provider.complete(prompt, params);
  c.transcript.push_back({pk, prompt, resp});
  c.text = clean_response(resp);
  return c;
}

void revise_until_compilable(LLMProvider& provider, CandidateProperty& c, const GenTarget& target, int max_attempts,
                             const LLMParams& params, const std::string& knowledge_rule) {
  if (!target.program) throw Error("revision needs the resolved target contract");
  bool rule = c.kind == EntryKind::Rule;
  for (;;) {
    CompileResult cr = compile_candidate(*target.program, c.text, c.kind, target.function_name);
    if (cr.ok && cr.covered) {
      c.status = CandidateStatus::Compilable;
      return;
    }
    if (c.attempts >= max_attempts) {
      c.status = CandidateStatus::Failed;
      c.reason = cr.ok ? "target function never called" : "still not compilable after " + std::to_string(c.attempts) + " revisions";
      return;
    }
    PromptKind pk;
    std::map<std::string, std::string> b = {{"spec_res", c.text},
                                            {"func_code", target.func_code},
                                            {"contract_code", target.contract_code},
                                            {"function_name", target.function_name}};
    if (!cr.ok) {
      pk = rule ? PromptKind::CommonRevise : PromptKind::ConditionRevise;
      b["error_info"] = cr.rendered;
    } else {
      pk = PromptKind::SpecialRevise;
      b["knowledge_rule"] = knowledge_rule;
    }
    std::string prompt = build_prompt(pk, b);
    std::string resp;
    try {
      resp = provider.complete(prompt, params);
    } catch (const ProviderError& e) {
      c.status = CandidateStatus::Failed;
      c.reason = std::string("provider failure: ") + e.what();
      return;
    }
    ++c.attempts;
    c.transcript.push_back({pk, prompt, resp});
    c.text = clean_response(resp);
  }
}

std::string summary_prompt(const std::string& text, SummaryMode mode) {
  std::string what = mode == SummaryMode::Code ? "smart contract code" : "contract property";
  return "Describe in two or three plain sentences what the following " + what +
         " does. Name the state it touches and the conditions it relies on. Do not repeat the code.\n\n" + text + "\n";
}

std::string summarize(LLMProvider& provider, const std::string& text, SummaryMode mode, const LLMParams& params) {
  if (trim(text).empty()) throw Error("nothing to summarize");
  std::string s = trim(provider.complete(summary_prompt(text, mode), params));
  if (s.empty()) throw ProviderError("provider returned an empty summary");
  return s;
}

}  // namespace ppgpt::gen
