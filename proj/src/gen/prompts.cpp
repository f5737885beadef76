#include "ppgpt/gen/prompts.hpp"

#include "ppgpt/common/error.hpp"

namespace ppgpt::gen {

const char* to_string(PromptKind k) {
  switch (k) {
    case PromptKind::RuleGen: return "ruleGen";
    case PromptKind::ConditionGen: return "conditionGen";
    case PromptKind::CommonRevise: return "commonRevise";
    case PromptKind::SpecialRevise: return "specialRevise";
    case PromptKind::ConditionRevise: return "conditionRevise";
  }
  return "?";
}

namespace {

const std::string kRuleGen = R"(You write PSL rules for a smart contract. A reference rule written for other code is given below as a one-shot example, together with a worked example of the rule syntax. Write a rule of the same shape for the code under test.
1. Follow the structure of the reference rule, not its identifiers.
2. A name starting with $ is a symbolic variable; $x stands for the value of x.
3. Use only state variables, functions and types that exist in the contract under test.
4. State assumptions with assume(...) and the checked property with assert(...).
5. The rule body must call the function under test.
6. Do not add explanations; only the rule.

[function under test]:
{func_code}
[contract under test]:
{contract_code}
[reference rule]:
{rule_property}
[syntax example]:
{spec_grammar}

Answer with exactly one rule of the form:
rule [name of rule]() {{logic of rule}}
assert takes a bare comparison, without a message string.
)";

const std::string kConditionGen = R"(You write PSL function specifications. A reference specification written for other code is given below as a one-shot example. Write the precondition and postcondition of the function under test in the same style.
1. Conditions are plain boolean expressions, one per line, each ending with a semicolon.
2. old(x) denotes the value of x when the function is entered.
3. Do not use require, assert, statements or function calls inside the conditions.
4. Refer only to state variables and the parameters and named returns of {function_name}.
5. Leave out conditions on unnamed return values.

[function under test]:
{func_code}
[reference specification]:
{condition_property}

Answer in exactly this form:
function {function_name}(...) precondition {{ ... }} postcondition {{ ... }}
)";

const std::string kCommonRevise = R"(The following rule does not compile:
{spec_res}
Compiler output:
{error_info}

Fix the rule so that it compiles against the contract below. Change only the rule. If it uses something the contract does not define, express it with what exists or drop that line. The answer must differ from the rule above.
[function under test]:
{func_code}
[contract under test]:
{contract_code}
1. Keep the structure of the rule.
2. A name starting with $ is a symbolic variable; $x stands for the value of x.

Answer with exactly one rule of the form:
rule [name of rule]() {{logic of rule}}
assert takes a bare comparison, without a message string.
The rule must exercise {function_name}.
)";

const std::string kSpecialRevise = R"(Reference rule to learn from:
{knowledge_rule}
Rule to fix:
{spec_res}
The rule to fix never executes the target function {function_name}.
Contract:
{contract_code}

Rewrite the rule so that its body calls {function_name} and checks its effect, using the reference rule as a guide. The answer must differ from the rule to fix.
[function under test]:
{func_code}
1. Keep the structure of the reference rule, not its identifiers.
2. A name starting with $ is a symbolic variable; $x stands for the value of x.

Answer with exactly one rule of the form:
rule [name of rule]() {{logic of rule}}
assert takes a bare comparison, without a message string.
The rule must exercise {function_name}.
)";

const std::string kConditionRevise = R"(The following specification does not compile:
{spec_res}
Compiler output:
{error_info}

Fix it so that it compiles for the function below. Conditions are boolean expressions only; old(x) is the entry value of x. The answer must differ from the specification above.
[function under test]:
{func_code}

Answer in exactly this form:
function {function_name}(...) precondition {{ ... }} postcondition {{ ... }}
)";

const std::string kGrammar = R"(rule transferMovesBalance() {
    address $to;
    uint256 $amount;
    assume(msg.sender != $to);
    uint256 $fromBefore = balanceOf[msg.sender];
    uint256 $toBefore = balanceOf[$to];
    transfer($to, $amount);
    assert(balanceOf[msg.sender] == $fromBefore - $amount);
    assert(balanceOf[$to] == $toBefore + $amount);
})";

}  // namespace

const std::string& rule_grammar_example() { return kGrammar; }

const std::string& template_text(PromptKind k) {
  switch (k) {
    case PromptKind::RuleGen: return kRuleGen;
    case PromptKind::ConditionGen: return kConditionGen;
    case PromptKind::CommonRevise: return kCommonRevise;
    case PromptKind::SpecialRevise: return kSpecialRevise;
    case PromptKind::ConditionRevise: return kConditionRevise;
  }
  throw Error("unknown prompt kind");
}

namespace {

// Walks a template: `text` gets literal runs, `hole` gets placeholder names.
template <typename Text, typename Hole>
void scan(const std::string& t, Text text, Hole hole) {
  for (size_t i = 0; i < t.size();) {
    if (t.compare(i, 2, "{{") == 0) {
      text("{");
      i += 2;
    } else if (t.compare(i, 2, "}}") == 0) {
      text("}");
      i += 2;
    } else if (t[i] == '{') {
      size_t e = t.find('}', i);
      if (e == std::string::npos) throw Error("unterminated placeholder in template");
      hole(t.substr(i + 1, e - i - 1));
      i = e + 1;
    } else {
      size_t e = t.find_first_of("{}", i);
      if (e == std::string::npos) e = t.size();
      if (e == i) {  // lone '}'
        text("}");
        ++i;
        continue;
      }
      text(t.substr(i, e - i));
      i = e;
    }
  }
}

}  // namespace

std::vector<std::string> placeholders(PromptKind k) {
  std::vector<std::string> out;
  scan(
      template_text(k), [](const std::string&) {},
      [&](const std::string& name) {
        for (const auto& n : out)
          if (n == name) return;
        out.push_back(name);
      });
  return out;
}

std::string render_template(const std::string& t, const std::map<std::string, std::string>& bindings) {
  std::string out;
  scan(
      t, [&](const std::string& s) { out += s; },
      [&](const std::string& name) {
        auto it = bindings.find(name);
        if (it == bindings.end()) throw Error("missing placeholder {" + name + "}");
        out += it->second;
      });
  return out;
}

std::string build_prompt(PromptKind k, const std::map<std::string, std::string>& bindings) {
  return render_template(template_text(k), bindings);
}

}  // namespace ppgpt::gen
