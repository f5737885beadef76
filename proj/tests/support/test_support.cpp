#include "test_support.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ppgpt::testing {

using namespace frontend;

std::string fixture_path(const std::string& rel) { return std::string(PPGPT_FIXTURE_DIR) + "/" + rel; }

std::string read_fixture(const std::string& rel) {
  std::ifstream in(fixture_path(rel), std::ios::binary);
  if (!in) throw std::runtime_error("missing fixture " + rel);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::shared_ptr<const SourceUnit> must_parse_contract(const std::string& name, const std::string& text) {
  auto r = parse_contract(name, text);
  if (!r.ok()) throw std::runtime_error("parse failed:\n" + render_diagnostics(r.diagnostics));
  return r.value;
}

std::shared_ptr<const SpecFile> must_parse_spec(const std::string& name, const std::string& text) {
  auto r = parse_spec(name, text);
  if (!r.ok()) throw std::runtime_error("spec parse failed:\n" + render_diagnostics(r.diagnostics));
  return r.value;
}

std::shared_ptr<const ResolvedProgram> must_resolve(const std::string& contract_text) {
  auto r = resolve({must_parse_contract("c.msol", contract_text)});
  if (!r.ok()) throw std::runtime_error("resolve failed:\n" + render_diagnostics(r.diagnostics));
  return r.value;
}

std::shared_ptr<const ResolvedProgram> must_resolve(const std::string& contract_text, const std::string& spec_text) {
  auto r = resolve({must_parse_contract("c.msol", contract_text)}, {must_parse_spec("s.psl", spec_text)});
  if (!r.ok()) throw std::runtime_error("resolve failed:\n" + render_diagnostics(r.diagnostics));
  return r.value;
}

}  // namespace ppgpt::testing
