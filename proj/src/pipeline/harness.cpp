#include "ppgpt/pipeline/harness.hpp"

#include <json.hpp>
#include <set>
#include <sstream>

#include "ppgpt/common/error.hpp"

namespace ppgpt::pipeline {

MatchStats match_stats(const std::string& jsonl) {
  MatchStats s;
  std::set<std::pair<std::string, std::string>> seen;
  std::istringstream in(jsonl);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::string id, role;
    bool matched;
    try {
      auto j = nlohmann::json::parse(line);
      id = j.at("id");
      role = j.at("role");
      matched = j.at("matched");
    } catch (const nlohmann::json::exception&) {
      throw Error("match file line " + std::to_string(n) + ": expected {id, role, matched}");
    }
    if (!seen.insert({role, id}).second) throw Error("match file line " + std::to_string(n) + ": duplicate " + role + " '" + id + "'");
    if (role == "generated") {
      ++s.generated;
      s.generated_matched += matched;
    } else if (role == "truth") {
      ++s.truth;
      s.truth_matched += matched;
    } else {
      throw Error("match file line " + std::to_string(n) + ": role must be generated or truth");
    }
  }
  return s;
}

CompileStats compile_stats(const RunReport& report, const gen::GenTarget& target) {
  CompileStats s;
  for (const auto& r : report.records) {
    const auto& c = r.candidate;
    if (c.transcript.empty()) throw Error("candidate " + c.id + " has no transcript");
    ++s.total;
    std::string text = gen::clean_response(c.transcript.back().response);
    auto cr = gen::compile_candidate(*target.program, text, c.kind, target.function_name);
    bool ok = cr.ok && cr.covered;
    // revisions = exchanges after the first generation prompt
    int revisions = 0;
    for (const auto& x : c.transcript)
      if (x.kind != gen::PromptKind::RuleGen && x.kind != gen::PromptKind::ConditionGen) ++revisions;
    if (ok) {
      ++s.compiled;
      ++s.attempts[revisions];
    }
    if (ok != (c.status == gen::CandidateStatus::Compilable) || revisions != c.attempts) ++s.disagreements;
  }
  return s;
}

}  // namespace ppgpt::pipeline
