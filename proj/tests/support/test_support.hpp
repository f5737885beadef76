#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ppgpt/frontend/parser.hpp"
#include "ppgpt/frontend/resolver.hpp"

namespace ppgpt::testing {

std::string fixture_path(const std::string& rel);
std::string read_fixture(const std::string& rel);

// Parse helpers that abort the test run with the rendered diagnostics on failure.
std::shared_ptr<const frontend::SourceUnit> must_parse_contract(const std::string& name, const std::string& text);
std::shared_ptr<const frontend::SpecFile> must_parse_spec(const std::string& name, const std::string& text);
std::shared_ptr<const frontend::ResolvedProgram> must_resolve(const std::string& contract_text);
std::shared_ptr<const frontend::ResolvedProgram> must_resolve(const std::string& contract_text,
                                                              const std::string& spec_text);

}  // namespace ppgpt::testing
