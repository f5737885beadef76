#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ppgpt/frontend/resolver.hpp"

namespace ppgpt::check {

struct CheckReport {
  bool ok = true;
  std::vector<frontend::Diagnostic> issues;
  std::map<std::string, bool> coverage;  // rule name -> calls the target function
};

/// Static well-formedness of one spec unit: resolution issues, expression-only
/// condition bodies, `$` variables confined to rules, boolean conditions.
/// When `target` is set, rules are also checked for calling it.
CheckReport check_spec(const frontend::ResolvedProgram& program, const frontend::ResolvedSpec& spec,
                       const std::optional<std::string>& target = std::nullopt);

/// Resolves and checks every unit of a spec file.
CheckReport check_spec_file(const frontend::ResolvedProgram& program, std::shared_ptr<const frontend::SpecFile> file,
                            const std::optional<std::string>& target = std::nullopt);

/// True iff the rule body directly calls `target` (resolved callee, any nesting depth).
/// Throws ppgpt::Error when the main contract has no function named `target`.
bool check_target_coverage(const frontend::ResolvedProgram& program, const frontend::ResolvedSpec& rule,
                           const std::string& target);

}  // namespace ppgpt::check
