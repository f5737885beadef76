#include "ppgpt/pipeline/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "ppgpt/common/error.hpp"
#include "ppgpt/frontend/parser.hpp"

namespace ppgpt::pipeline {

using nlohmann::ordered_json;
using namespace frontend;

namespace {

std::string read_file(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(std::string("cannot read ") + what + " " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

// Rethrows with the stage name in front.
template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const std::exception& e) {
    throw Error(std::string(name) + ": " + e.what());
  }
}

double cosine(knowledge::EmbeddingProvider& e, const std::string& a, const std::string& b) {
  return knowledge::dot(knowledge::normalize(e.embed(a)), knowledge::normalize(e.embed(b)));
}

}  // namespace

std::shared_ptr<knowledge::EmbeddingProvider> make_embedder(const Config& c) {
  if (c.embed_mode == "local") return std::make_shared<knowledge::LocalEmbedder>(c.embed_dimension);
  if (c.embed_endpoint.empty()) throw ConfigError("embed.endpoint is required when embed.mode=remote");
  knowledge::RemoteEmbedderOptions o;
  o.endpoint = c.embed_endpoint;
  o.model = c.embed_model;
  o.dimension = c.embed_dimension;
  if (const char* k = std::getenv("PROPGPT_LLM_KEY")) o.api_key = k;
  return std::make_shared<knowledge::RemoteEmbedder>(o);
}

std::shared_ptr<gen::LLMProvider> make_llm(const Config& c) {
  if (c.provider_mode == "replay") {
    if (c.provider_fixture.empty()) throw ConfigError("provider.fixture is required when provider.mode=replay");
    return gen::ReplayProvider::from_file(c.provider_fixture);
  }
  gen::RemoteProviderOptions o;
  o.endpoint = c.provider_endpoint;
  o.model = c.provider_model;
  o.max_concurrent = c.provider_max_concurrent;
  auto remote = std::make_shared<gen::RemoteProvider>(o);
  if (c.provider_mode == "remote") return remote;
  if (c.provider_fixture.empty()) throw ConfigError("provider.fixture is required when provider.mode=record");
  return std::make_shared<gen::RecordingProvider>(remote, c.provider_fixture);
}

Providers make_providers(const Config& c) { return {make_llm(c), make_embedder(c)}; }

ranking::Weights default_weights() { return ranking::Weights::reference().normalized(); }

verify::VerifyOptions verify_options(const Config& c) {
  verify::VerifyOptions o;
  o.exec.loop_bound = c.loop_bound;
  o.solver.command = c.solver_cmd;
  o.solver.timeout_ms = c.solver_timeout_ms;
  o.bmc_depth = c.bmc_depth;
  return o;
}

std::shared_ptr<const ResolvedProgram> load_program(const std::string& contract_path) {
  auto parsed = parse_contract(contract_path, read_file(contract_path, "contract"));
  if (!parsed.ok()) throw Error("contract does not parse:\n" + render_diagnostics(parsed.diagnostics));
  auto r = resolve({parsed.value});
  if (!r.ok()) throw Error("contract does not resolve:\n" + render_diagnostics(r.diagnostics));
  return r.value;
}

gen::GenTarget load_target(const std::string& contract_path, const std::string& function) {
  gen::GenTarget t;
  t.program = load_program(contract_path);
  t.function_name = function;
  const ContractInfo& main = t.program->main();
  t.contract_code = main.source->text();
  auto fns = t.program->functions_named(main, function);
  if (fns.empty()) throw Error("contract " + main.name + " has no function '" + function + "'");
  for (const auto* f : fns) {
    const auto& text = f->owner->source->text();
    if (!t.func_code.empty()) t.func_code += "\n";
    t.func_code += text.substr(f->def->span.begin, f->def->span.end - f->def->span.begin);
  }
  return t;
}

knowledge::KnowledgeStore load_knowledge(const Config& c, knowledge::EmbeddingProvider& embedder) {
  if (c.knowledge_path.empty()) throw ConfigError("knowledgePath is not set");
  std::ifstream in(c.knowledge_path);
  if (!in) throw Error("cannot read knowledge base " + c.knowledge_path);
  std::string first;
  std::getline(in, first);
  if (first.find("\"ppgpt-knowledge-store\"") != std::string::npos) {
    auto s = knowledge::KnowledgeStore::load(c.knowledge_path);
    if (s.embedder() != embedder.name())
      throw ConfigError("knowledge store was embedded with " + s.embedder() + ", configured embedder is " +
                        embedder.name());
    return s;
  }
  knowledge::KnowledgeStore s(embedder.dimension(), embedder.name());
  s.ingest(knowledge::load_entries(c.knowledge_path), embedder);
  return s;
}

bool RunReport::any_violated() const {
  for (const auto& r : records)
    if (r.verdict == verify::to_string(verify::VerdictKind::Violated)) return true;
  return false;
}

RunReport run_pipeline(const Config& c, const std::string& contract_path, const std::string& function,
                       Providers& pv, const RunOptions& opt) {
  RunReport report;
  report.contract = contract_path;
  report.function = function;
  if (!pv.embed) pv.embed = make_embedder(c);

  // 1: knowledge base
  auto store = stage("ingest", [&] { return load_knowledge(c, *pv.embed); });
  if (store.size() == 0) throw Error("ingest: no reference properties in " + c.knowledge_path);

  // 2-3: embed the subject and retrieve
  auto target = stage("load", [&] { return load_target(contract_path, function); });
  auto refs = stage("retrieve", [&] {
    return store.retrieve(target.func_code, *pv.embed, c.retrieve_threshold, c.retrieve_max);
  });
  report.retrieved = refs.size();
  if (refs.empty()) return report;
  if (!pv.llm) pv.llm = stage("provider", [&] { return make_llm(c); });

  gen::LLMParams params;
  params.temperature = c.provider_temperature;
  std::string code_summary;
  if (opt.features)
    code_summary = stage("summarize", [&] { return gen::summarize(*pv.llm, target.func_code, gen::SummaryMode::Code, params); });

  // 4-7: one loop per reference, bounded pool
  std::vector<CandidateRecord> recs(refs.size());
  std::vector<std::string> errors(refs.size());
  std::atomic<size_t> next{0};
  auto work = [&] {
    for (size_t i; (i = next++) < refs.size();) {
      const auto& ref = refs[i].entry;
      CandidateRecord& r = recs[i];
      auto t0 = std::chrono::steady_clock::now();
      try {
        try {
          r.candidate = gen::generate_candidate(*pv.llm, ref, target, params);
        } catch (const ProviderError& e) {
          r.candidate.ref_entry_id = ref.id;
          r.candidate.kind = ref.kind;
          r.candidate.status = gen::CandidateStatus::Failed;
          r.candidate.reason = std::string("generation failed: ") + e.what();
        }
        r.candidate.id = function + "#" + ref.id;
        if (r.candidate.status == gen::CandidateStatus::Compiling)
          gen::revise_until_compilable(*pv.llm, r.candidate, target, c.gen_max_attempts, params, ref.property);
        if (opt.features && r.candidate.status == gen::CandidateStatus::Compilable) {
          auto& e = *pv.embed;
          std::string ref_code_summary =
              ref.code_summary.empty() ? gen::summarize(*pv.llm, ref.code, gen::SummaryMode::Code, params) : ref.code_summary;
          std::string ref_prop_summary = ref.property_summary.empty()
                                             ? gen::summarize(*pv.llm, ref.property, gen::SummaryMode::Property, params)
                                             : ref.property_summary;
          std::string cand_summary = gen::summarize(*pv.llm, r.candidate.text, gen::SummaryMode::Property, params);
          ranking::FeatureVector f;
          f.x_raw = refs[i].similarity;
          f.x_summary = cosine(e, code_summary, ref_code_summary);
          f.y_raw = cosine(e, r.candidate.text, ref.property);
          f.y_summary = cosine(e, cand_summary, ref_prop_summary);
          r.features = f;
          r.score = ranking::score(f, default_weights());
        }
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
      r.generation_ms = ms_since(t0);
    }
  };
  {
    unsigned n = std::max(1u, std::min<unsigned>(c.gen_workers, unsigned(refs.size())));
    std::vector<std::thread> pool;
    for (unsigned k = 1; k < n; ++k) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
  }
  for (size_t i = 0; i < errors.size(); ++i)
    if (!errors[i].empty()) throw Error("generate: reference " + refs[i].entry.id + ": " + errors[i]);

  // 8: rank
  std::sort(recs.begin(), recs.end(), [](const CandidateRecord& a, const CandidateRecord& b) {
    if (a.score.has_value() != b.score.has_value()) return a.score.has_value();
    if (a.score && *a.score != *b.score) return *a.score > *b.score;
    return a.candidate.id < b.candidate.id;
  });
  size_t rank = 0;
  for (auto& r : recs) {
    if (r.candidate.status != gen::CandidateStatus::Compilable) {
      r.verdict = "not-compiled";
      r.reason = r.candidate.reason;
      continue;
    }
    if (r.score) r.rank = ++rank;
  }

  // verify top-K
  if (opt.verify) {
    auto vo = verify_options(c);
    for (auto& r : recs) {
      if (!r.rank || *r.rank > c.rank_k) continue;
      auto t0 = std::chrono::steady_clock::now();
      try {
        auto parsed = parse_spec(r.candidate.id, r.candidate.text);
        if (!parsed.ok()) throw Error(render_diagnostics(parsed.diagnostics));
        std::map<std::string, verify::Verdict> per_unit;
        for (size_t k = 0; k < parsed.value->units.size(); ++k) {
          auto rs = resolve_spec(*target.program, parsed.value, k);
          if (!rs->ok()) throw Error(render_diagnostics(rs->diagnostics));
          char key[16];
          std::snprintf(key, sizeof key, "%04zu", k);
          per_unit[key] = verify::verify_property(*target.program, *rs, vo);
        }
        verify::Verdict v = verify::combine(per_unit);
        r.verdict = verify::to_string(v.kind);
        r.reason = v.reason;
        if (v.trace) {
          r.counterexample = verify::render_trace(*v.trace);
          r.trace_length = v.trace->length();
        }
      } catch (const std::exception& e) {
        r.verdict = verify::to_string(verify::VerdictKind::Unknown);
        r.reason = std::string("error: ") + e.what();
      }
      r.verification_ms = ms_since(t0);
    }
  }
  report.records = std::move(recs);
  return report;
}

// ---- report I/O ----

namespace {

gen::PromptKind parse_prompt_kind(const std::string& s) {
  for (auto k : {gen::PromptKind::RuleGen, gen::PromptKind::ConditionGen, gen::PromptKind::CommonRevise,
                 gen::PromptKind::SpecialRevise, gen::PromptKind::ConditionRevise})
    if (s == gen::to_string(k)) return k;
  throw Error("unknown prompt kind '" + s + "'");
}

gen::CandidateStatus parse_status(const std::string& s) {
  for (auto k : {gen::CandidateStatus::Compiling, gen::CandidateStatus::Compilable, gen::CandidateStatus::Failed})
    if (s == gen::to_string(k)) return k;
  throw Error("unknown candidate status '" + s + "'");
}

}  // namespace

std::string report_jsonl(const RunReport& rep, bool with_transcripts) {
  std::string out;
  for (const auto& r : rep.records) {
    ordered_json j;
    j["id"] = r.candidate.id;
    j["refEntryId"] = r.candidate.ref_entry_id;
    j["kind"] = knowledge::to_string(r.candidate.kind);
    j["status"] = gen::to_string(r.candidate.status);
    j["attempts"] = r.candidate.attempts;
    j["rank"] = r.rank ? ordered_json(*r.rank) : ordered_json(nullptr);
    if (r.features)
      j["features"] = {{"xRaw", r.features->x_raw},
                       {"xSummary", r.features->x_summary},
                       {"yRaw", r.features->y_raw},
                       {"ySummary", r.features->y_summary}};
    else
      j["features"] = nullptr;
    j["score"] = r.score ? ordered_json(*r.score) : ordered_json(nullptr);
    j["verdict"] = r.verdict;
    if (!r.reason.empty()) j["reason"] = r.reason;
    if (r.counterexample) {
      j["counterexample"] = *r.counterexample;
      j["traceLength"] = *r.trace_length;
    }
    j["property"] = r.candidate.text;
    if (with_transcripts) {
      ordered_json t = ordered_json::array();
      for (const auto& x : r.candidate.transcript)
        t.push_back({{"prompt", gen::to_string(x.kind)}, {"request", x.prompt}, {"response", x.response}});
      j["transcript"] = t;
    }
    j["timings"] = {{"generationMs", r.generation_ms}, {"verificationMs", r.verification_ms}};
    out += j.dump() + "\n";
  }
  return out;
}

RunReport parse_report(const std::string& jsonl) {
  RunReport rep;
  std::istringstream in(jsonl);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      CandidateRecord r;
      r.candidate.id = j.at("id");
      r.candidate.ref_entry_id = j.at("refEntryId");
      r.candidate.kind = knowledge::parse_kind(j.at("kind"));
      r.candidate.status = parse_status(j.at("status"));
      r.candidate.attempts = j.at("attempts");
      r.candidate.text = j.value("property", "");
      if (!j.at("rank").is_null()) r.rank = j["rank"].get<size_t>();
      if (!j.at("features").is_null()) {
        const auto& f = j["features"];
        r.features = ranking::FeatureVector{f.at("xRaw"), f.at("xSummary"), f.at("yRaw"), f.at("ySummary")};
      }
      if (!j.at("score").is_null()) r.score = j["score"].get<double>();
      r.verdict = j.at("verdict");
      r.reason = j.value("reason", "");
      if (j.contains("counterexample")) {
        r.counterexample = j["counterexample"].get<std::string>();
        r.trace_length = j.value("traceLength", size_t(0));
      }
      if (j.contains("transcript"))
        for (const auto& x : j["transcript"])
          r.candidate.transcript.push_back({parse_prompt_kind(x.at("prompt")), x.at("request"), x.at("response")});
      if (j.contains("timings")) {
        r.generation_ms = j["timings"].value("generationMs", 0.0);
        r.verification_ms = j["timings"].value("verificationMs", 0.0);
      }
      rep.records.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw Error("report line " + std::to_string(n) + ": " + e.what());
    }
  }
  return rep;
}

std::string report_summary(const RunReport& rep) {
  std::ostringstream o;
  o << "contract " << rep.contract << ", function " << rep.function << "\n";
  o << rep.retrieved << " reference properties retrieved, " << rep.records.size() << " candidates\n";
  if (rep.retrieved == 0) o << "nothing above the similarity threshold\n";
  for (const auto& r : rep.records) {
    o << "\n";
    if (r.rank)
      o << "#" << *r.rank;
    else
      o << "-";
    o << " " << r.candidate.id << " [" << gen::to_string(r.candidate.status) << ", " << r.candidate.attempts
      << " revisions]";
    if (r.score) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.4f", *r.score);
      o << " score " << buf;
    }
    o << ": " << r.verdict;
    if (!r.reason.empty()) o << " (" << r.reason << ")";
    o << "\n";
    if (r.counterexample) o << *r.counterexample;
  }
  return o.str();
}

// ---- verify-only ----

bool SpecVerification::any_violated() const {
  for (const auto& r : results)
    if (r.verdict.kind == verify::VerdictKind::Violated) return true;
  return false;
}

SpecVerification verify_spec_file(const Config& c, const std::string& contract_path, const std::string& spec_path) {
  auto program = stage("load", [&] { return load_program(contract_path); });
  auto parsed = parse_spec(spec_path, read_file(spec_path, "spec"));
  if (!parsed.ok()) throw Error("spec does not parse:\n" + render_diagnostics(parsed.diagnostics));
  std::vector<verify::Job> jobs;
  std::vector<Diagnostic> diags;
  for (size_t k = 0; k < parsed.value->units.size(); ++k) {
    auto rs = resolve_spec(*program, parsed.value, k);
    diags.insert(diags.end(), rs->diagnostics.begin(), rs->diagnostics.end());
    char id[16];
    std::snprintf(id, sizeof id, "%04zu", k);
    jobs.push_back({id, rs});
  }
  if (has_errors(diags)) throw Error("spec does not check:\n" + render_diagnostics(diags));
  SpecVerification v;
  v.results = verify::verify_all(*program, jobs, verify_options(c), 1);
  return v;
}

std::string verification_jsonl(const SpecVerification& v) {
  std::string out;
  for (const auto& r : v.results) {
    ordered_json j;
    j["id"] = r.id;
    j["kind"] = frontend::to_string(r.kind);
    j["name"] = r.name;
    j["verdict"] = verify::to_string(r.verdict.kind);
    if (!r.verdict.reason.empty()) j["reason"] = r.verdict.reason;
    if (r.verdict.trace) {
      j["counterexample"] = verify::render_trace(*r.verdict.trace);
      j["traceLength"] = r.verdict.trace->length();
    }
    if (!r.per_function.empty()) {
      ordered_json pf = ordered_json::object();
      for (const auto& [fn, vd] : r.per_function) pf[fn] = verify::to_string(vd.kind);
      j["perFunction"] = pf;
    }
    j["timings"] = {{"verificationMs", r.seconds * 1000}};
    out += j.dump() + "\n";
  }
  return out;
}

std::string verification_summary(const SpecVerification& v) {
  std::ostringstream o;
  for (const auto& r : v.results) {
    o << frontend::to_string(r.kind) << " " << r.name << ": " << verify::to_string(r.verdict.kind);
    if (!r.verdict.reason.empty()) o << " (" << r.verdict.reason << ")";
    o << "\n";
    for (const auto& [fn, vd] : r.per_function) o << "  " << fn << ": " << verify::to_string(vd.kind) << "\n";
    if (r.verdict.trace) o << verify::render_trace(*r.verdict.trace);
  }
  return o.str();
}

}  // namespace ppgpt::pipeline
