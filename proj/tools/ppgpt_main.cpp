// ppgpt: property generation and verification for smart contracts.
#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ppgpt/check/spec_checker.hpp"
#include "ppgpt/common/error.hpp"
#include "ppgpt/frontend/parser.hpp"
#include "ppgpt/pipeline/harness.hpp"
#include "ppgpt/pipeline/pipeline.hpp"

using namespace ppgpt;
using namespace ppgpt::pipeline;

namespace {

constexpr int kOk = 0, kOperational = 1, kFindings = 2;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Config config_from(const std::string& path) { return path.empty() ? Config{} : load_config(path); }

// JSONL goes to --out when given (summary on stdout), otherwise to stdout.
void emit(const std::string& out, const std::string& jsonl, const std::string& summary) {
  if (out.empty()) {
    std::cout << jsonl;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw Error("cannot write " + out);
  f << jsonl;
  std::cout << summary;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate and verify smart contract properties"};
  app.require_subcommand(1);

  std::string config_path, contract, function, spec, out, candidates, fit, labels;
  size_t k = 0;

  auto* ingest = app.add_subcommand("ingest", "Embed knowledge.jsonl into a persisted store");
  ingest->add_option("--config", config_path, "config file")->required()->check(CLI::ExistingFile);
  ingest->add_option("--out", out, "store file")->required();

  auto* check = app.add_subcommand("check", "Compile a PSL file against a contract");
  check->add_option("--contract", contract)->required()->check(CLI::ExistingFile);
  check->add_option("--spec", spec)->required()->check(CLI::ExistingFile);
  check->add_option("--function", function, "rules must call this function");

  auto* gen = app.add_subcommand("gen", "Retrieve, generate, revise and rank candidates (no verification)");
  auto* rank = app.add_subcommand("rank", "Re-rank a gen report, or fit ranking weights");
  auto* verify = app.add_subcommand("verify", "Verify a hand-written PSL file");
  auto* pipe = app.add_subcommand("pipeline", "All stages, verification of the top-K included");
  for (auto* s : {gen, pipe}) {
    s->add_option("--config", config_path)->required()->check(CLI::ExistingFile);
    s->add_option("--contract", contract)->required()->check(CLI::ExistingFile);
    s->add_option("--function", function)->required();
    s->add_option("--out", out, "JSONL report");
  }
  verify->add_option("--config", config_path)->check(CLI::ExistingFile);
  verify->add_option("--contract", contract)->required()->check(CLI::ExistingFile);
  verify->add_option("--spec", spec)->required()->check(CLI::ExistingFile);
  verify->add_option("--out", out, "JSONL report");

  rank->add_option("--config", config_path)->check(CLI::ExistingFile);
  auto* rank_in = rank->add_option("--candidates", candidates, "report written by gen")->check(CLI::ExistingFile);
  auto* rank_fit = rank->add_option("--fit", fit, "training records to fit weights on")->check(CLI::ExistingFile);
  rank_in->excludes(rank_fit);
  rank->add_option("--k", k, "overrides rank.k");
  rank->add_option("--out", out);

  auto* eval = app.add_subcommand("eval", "Evaluation harnesses");
  eval->require_subcommand(1);
  auto* match = eval->add_subcommand("match", "Recall and precision from a labeled match file");
  match->add_option("--labels", labels)->required()->check(CLI::ExistingFile);
  auto* crate = eval->add_subcommand("compile-rate", "Recompute the compile-success rate from gen transcripts");
  crate->add_option("--contract", contract)->required()->check(CLI::ExistingFile);
  crate->add_option("--function", function)->required();
  crate->add_option("--candidates", candidates)->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kOperational;
  }

  try {
    if (*ingest) {
      Config c = load_config(config_path);
      auto e = make_embedder(c);
      auto store = load_knowledge(c, *e);
      store.persist(out);
      std::cout << store.size() << " entries embedded with " << store.embedder() << " into " << out << "\n";
      return kOk;
    }

    if (*check) {
      auto program = load_program(contract);
      auto parsed = frontend::parse_spec(spec, slurp(spec));
      if (!parsed.ok()) {
        std::cout << frontend::render_diagnostics(parsed.diagnostics);
        return kFindings;
      }
      auto rep = check::check_spec_file(*program, parsed.value,
                                        function.empty() ? std::nullopt : std::optional<std::string>(function));
      std::cout << frontend::render_diagnostics(rep.issues);
      bool covered = true;
      for (const auto& [rule, c] : rep.coverage) {
        std::cout << "rule " << rule << (c ? " calls " : " does not call ") << function << "\n";
        covered = covered && c;
      }
      if (rep.ok && covered) std::cout << "ok: " << parsed.value->units.size() << " properties\n";
      return rep.ok && covered ? kOk : kFindings;
    }

    if (*gen || *pipe) {
      Config c = load_config(config_path);
      Providers pv;
      RunOptions o;
      o.verify = bool(*pipe);
      RunReport r = run_pipeline(c, contract, function, pv, o);
      emit(out, report_jsonl(r, bool(*gen)), report_summary(r));
      return r.any_violated() ? kFindings : kOk;
    }

    if (*verify) {
      Config c = config_from(config_path);
      auto v = verify_spec_file(c, contract, spec);
      emit(out, verification_jsonl(v), verification_summary(v));
      return v.any_violated() ? kFindings : kOk;
    }

    if (*rank) {
      Config c = config_from(config_path);
      if (!fit.empty()) {
        auto f = ranking::fit_weights(ranking::load_training_records(fit));
        auto& m = f.metrics;
        std::printf("raw weights        alpha %.6f  beta %.6f  gamma %.6f  eta %.6f  (sum %.6f)\n", f.raw.alpha,
                    f.raw.beta, f.raw.gamma, f.raw.eta, f.raw.sum());
        std::printf("normalized weights alpha %.6f  beta %.6f  gamma %.6f  eta %.6f\n", f.normalized.alpha,
                    f.normalized.beta, f.normalized.gamma, f.normalized.eta);
        std::printf("n %zu  MAE %.4f  MSE %.4f  RMSE %.4f  R2 %.4f  MAPE %.4f  MDE %.4f\n", m.n, m.mae, m.mse, m.rmse,
                    m.r2, m.mape, m.mde);
        return kOk;
      }
      if (candidates.empty()) throw Error("rank needs --candidates or --fit");
      RunReport r = parse_report(slurp(candidates));
      std::vector<std::pair<std::string, ranking::FeatureVector>> cs;
      for (const auto& rec : r.records)
        if (rec.features && rec.candidate.status == gen::CandidateStatus::Compilable)
          cs.push_back({rec.candidate.id, *rec.features});
      auto top = ranking::rank_topk(cs, default_weights(), k ? k : c.rank_k);
      std::string jsonl;
      std::ostringstream summary;
      for (size_t i = 0; i < top.size(); ++i) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "{\"rank\":%zu,\"id\":\"%s\",\"score\":%.17g}\n", i + 1, top[i].id.c_str(),
                      top[i].score);
        jsonl += buf;
        std::snprintf(buf, sizeof buf, "#%zu %s %.4f\n", i + 1, top[i].id.c_str(), top[i].score);
        summary << buf;
      }
      emit(out, jsonl, summary.str());
      return kOk;
    }

    if (*match) {
      auto s = match_stats(slurp(labels));
      std::printf("generated %zu (matched %zu)  truth %zu (matched %zu)\nprecision %.4f  recall %.4f\n", s.generated,
                  s.generated_matched, s.truth, s.truth_matched, s.precision(), s.recall());
      return kOk;
    }

    if (*crate) {
      auto target = load_target(contract, function);
      auto s = compile_stats(parse_report(slurp(candidates)), target);
      std::printf("candidates %zu  compiled %zu  rate %.4f  disagreements %zu\n", s.total, s.compiled, s.rate(),
                  s.disagreements);
      for (const auto& [a, n] : s.attempts) std::printf("  %d revisions: %zu\n", a, n);
      return s.disagreements ? kFindings : kOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kOperational;
  }
  return kOperational;
}
