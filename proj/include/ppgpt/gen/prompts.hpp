#pragma once

#include <map>
#include <string>
#include <vector>

namespace ppgpt::gen {

enum class PromptKind { RuleGen, ConditionGen, CommonRevise, SpecialRevise, ConditionRevise };
const char* to_string(PromptKind k);

// Template text; placeholders are {name}, literal braces are doubled.
const std::string& template_text(PromptKind k);
// Placeholders the template uses, in first-occurrence order.
std::vector<std::string> placeholders(PromptKind k);

// Substitutes every placeholder; throws ppgpt::Error naming the first missing one.
std::string build_prompt(PromptKind k, const std::map<std::string, std::string>& bindings);
std::string render_template(const std::string& text, const std::map<std::string, std::string>& bindings);

// Worked PSL rule used as the {spec_grammar} binding of rule generation.
const std::string& rule_grammar_example();

}  // namespace ppgpt::gen
