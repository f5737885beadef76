#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ppgpt/check/spec_checker.hpp"
#include "ppgpt/common/error.hpp"
#include "ppgpt/frontend/parser.hpp"
#include "ppgpt/knowledge/embedder.hpp"
#include "ppgpt/pipeline/config.hpp"
#include "ppgpt/pipeline/pipeline.hpp"
#include "ppgpt/ranking/ranking.hpp"

namespace py = pybind11;
using namespace ppgpt;

namespace {

using Quad = std::tuple<double, double, double, double>;

ranking::FeatureVector features(const Quad& q) { return {std::get<0>(q), std::get<1>(q), std::get<2>(q), std::get<3>(q)}; }
ranking::Weights weights(const Quad& q) { return {std::get<0>(q), std::get<1>(q), std::get<2>(q), std::get<3>(q)}; }
Quad quad(const ranking::Weights& w) { return {w.alpha, w.beta, w.gamma, w.eta}; }

py::dict diag_dict(const frontend::Diagnostic& d) {
  py::dict o;
  o["code"] = d.code;
  o["message"] = d.message;
  o["line"] = d.line;
  o["col"] = d.col;
  o["error"] = d.severity == frontend::Severity::Error;
  return o;
}

py::dict check_text(const std::string& contract, const std::string& spec, std::optional<std::string> target) {
  py::dict out;
  py::list diags;
  auto fail = [&](const std::vector<frontend::Diagnostic>& ds) {
    for (const auto& d : ds) diags.append(diag_dict(d));
    out["ok"] = false;
    out["diagnostics"] = diags;
    out["coverage"] = py::dict();
    return out;
  };
  auto cu = frontend::parse_contract("contract.msol", contract);
  if (!cu.ok()) return fail(cu.diagnostics);
  auto prog = frontend::resolve({cu.value});
  if (!prog.ok()) return fail(prog.diagnostics);
  auto su = frontend::parse_spec("spec.psl", spec);
  if (!su.ok()) return fail(su.diagnostics);
  auto r = check::check_spec_file(*prog.value, su.value, target);
  for (const auto& d : r.issues) diags.append(diag_dict(d));
  out["ok"] = r.ok;
  out["diagnostics"] = diags;
  out["coverage"] = r.coverage;
  return out;
}

pipeline::Config config_or_default(const std::optional<std::string>& path) {
  return path ? pipeline::load_config(*path) : pipeline::Config{};
}

struct Store {
  knowledge::KnowledgeStore store;
  knowledge::LocalEmbedder embedder;

  std::vector<std::pair<std::string, double>> retrieve(const std::string& code, double threshold, std::optional<size_t> max) {
    std::vector<std::pair<std::string, double>> out;
    for (const auto& r : store.retrieve(code, embedder, threshold, max)) out.push_back({r.entry.id, r.similarity});
    return out;
  }
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<ProviderError>(m, "ProviderError", base.ptr());
  py::register_exception<StoreError>(m, "StoreError", base.ptr());
  py::register_exception<SolverError>(m, "SolverError", base.ptr());

  m.def("check_spec", &check_text, py::arg("contract"), py::arg("spec"), py::arg("target") = py::none(),
        "Parse, resolve and check a spec against contract source text.");

  m.def(
      "verify_jsonl",
      [](const std::string& contract_path, const std::string& spec_path, std::optional<std::string> config) {
        auto c = config_or_default(config);
        pipeline::SpecVerification v;
        {
          py::gil_scoped_release nogil;
          v = pipeline::verify_spec_file(c, contract_path, spec_path);
        }
        return pipeline::verification_jsonl(v);
      },
      py::arg("contract_path"), py::arg("spec_path"), py::arg("config") = py::none());

  m.def(
      "pipeline_jsonl",
      [](const std::string& config, const std::string& contract_path, const std::string& function, bool verify) {
        auto c = pipeline::load_config(config);
        pipeline::RunReport r;
        {
          py::gil_scoped_release nogil;
          auto providers = pipeline::make_providers(c);
          pipeline::RunOptions o;
          o.verify = verify;
          r = pipeline::run_pipeline(c, contract_path, function, providers, o);
        }
        return pipeline::report_jsonl(r);
      },
      py::arg("config"), py::arg("contract_path"), py::arg("function"), py::arg("verify") = true);

  m.def("reference_weights", [] { return quad(ranking::Weights::reference()); });
  m.def("default_weights", [] { return quad(pipeline::default_weights()); });
  m.def(
      "score", [](const Quad& f, const Quad& w) { return ranking::score(features(f), weights(w)); }, py::arg("features"),
      py::arg("weights"));
  m.def(
      "rank_topk",
      [](const std::vector<std::pair<std::string, Quad>>& cands, const Quad& w, size_t k) {
        std::vector<std::pair<std::string, ranking::FeatureVector>> cs;
        for (const auto& [id, f] : cands) cs.push_back({id, features(f)});
        std::vector<std::pair<std::string, double>> out;
        for (const auto& r : ranking::rank_topk(cs, weights(w), k)) out.push_back({r.id, r.score});
        return out;
      },
      py::arg("candidates"), py::arg("weights"), py::arg("k") = 2);
  m.def(
      "fit_weights",
      [](const std::vector<std::pair<Quad, double>> rows) {
        std::vector<ranking::TrainingRecord> rs;
        for (const auto& [f, a] : rows) rs.push_back({features(f), a});
        auto fit = ranking::fit_weights(rs);
        const auto& mt = fit.metrics;
        py::dict metrics;
        metrics["mae"] = mt.mae;
        metrics["mse"] = mt.mse;
        metrics["rmse"] = mt.rmse;
        metrics["r2"] = mt.r2;
        metrics["mape"] = mt.mape;
        metrics["mde"] = mt.mde;
        metrics["n"] = mt.n;
        py::dict out;
        out["raw"] = quad(fit.raw);
        out["normalized"] = quad(fit.normalized);
        out["metrics"] = metrics;
        return out;
      },
      py::arg("rows"), "Least-squares weights from ((xRaw, xSummary, yRaw, ySummary), actual) rows.");

  py::class_<Store>(m, "KnowledgeStore")
      .def_static(
          "from_entries",
          [](const std::string& path, size_t dimension) {
            knowledge::LocalEmbedder e(dimension);
            Store s{knowledge::KnowledgeStore(dimension, e.name()), e};
            s.store.ingest(knowledge::load_entries(path), s.embedder);
            return s;
          },
          py::arg("path"), py::arg("dimension") = 256)
      .def_static(
          "load",
          [](const std::string& path) {
            auto st = knowledge::KnowledgeStore::load(path);
            size_t dim = st.dimension();
            return Store{std::move(st), knowledge::LocalEmbedder(dim)};
          },
          py::arg("path"))
      .def("retrieve", &Store::retrieve, py::arg("code"), py::arg("threshold") = 0.8, py::arg("max") = py::none())
      .def("persist", [](const Store& s, const std::string& path) { s.store.persist(path); })
      .def("ids",
           [](const Store& s) {
             std::vector<std::string> ids;
             for (const auto& e : s.store.entries()) ids.push_back(e.id);
             return ids;
           })
      .def("__len__", [](const Store& s) { return s.store.size(); });
}
