#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ppgpt/smt/solver.hpp"
#include "ppgpt/symexec/executor.hpp"
#include "ppgpt/verifier/interpreter.hpp"

namespace ppgpt::verify {

enum class VerdictKind { Proven, VacuouslyProven, Violated, Unknown };
const char* to_string(VerdictKind k);

struct TraceCall {
  std::string function;
  std::vector<CValue> args;
  std::vector<frontend::TypePtr> types;
  CEnv env;
};

/// Concrete counterexample: deployment, a prefix of transactions, then the
/// step that breaks the property (a target call, or the rule body).
struct Trace {
  std::vector<CValue> constructor_args;
  std::vector<frontend::TypePtr> constructor_types;
  CEnv deploy_env;
  std::vector<TraceCall> calls;         // prefix, then the target call for function specs/invariants
  bool target_call = false;             // last entry of `calls` is the checked call
  std::optional<CEnv> rule_env;         // rules only
  std::vector<CallRecord> rule_calls;   // calls the rule body made during replay
  std::vector<CValue> oracles;          // external values in creation order
  BigInt this_address = 0;
  std::vector<std::pair<std::string, BigInt>> initial_state;  // scalar state right after deployment
  frontend::Span span;                  // failing postcondition / invariant / assertion
  std::string obligation;               // its source text

  // Number of transactions, rule-body calls included.
  size_t length() const { return calls.size() + rule_calls.size(); }
};

struct Verdict {
  VerdictKind kind = VerdictKind::Unknown;
  std::string reason;           // Unknown only
  std::optional<Trace> trace;   // Violated only
  // The modular query found a violating entry state (whether or not it is reachable).
  bool modular_violation = false;

  static Verdict proven() { return {VerdictKind::Proven, "", std::nullopt, false}; }
  static Verdict vacuous() { return {VerdictKind::VacuouslyProven, "", std::nullopt, false}; }
  static Verdict unknown(std::string why, bool modular = false) {
    return {VerdictKind::Unknown, std::move(why), std::nullopt, modular};
  }
};

struct VerifyOptions {
  sym::ExecOptions exec;
  smt::SolverOptions solver;
  bool bmc = true;
  int bmc_depth = 3;
  size_t bmc_max_states = 64;   // frontier cap per depth
  int bmc_array_length = 4;     // calldata arrays in BMC transactions
  bool replay = true;
};

Verdict verify_function_spec(const frontend::ResolvedProgram& program, const frontend::ResolvedSpec& spec,
                             const VerifyOptions& options = {});
std::map<std::string, Verdict> verify_invariant(const frontend::ResolvedProgram& program,
                                                const frontend::ResolvedSpec& spec, const VerifyOptions& options = {});
Verdict verify_rule(const frontend::ResolvedProgram& program, const frontend::ResolvedSpec& spec,
                    const VerifyOptions& options = {});

// Reachability search for a state violating the property; for invariants
// `function` picks the checked function. Never returns Proven.
Verdict bmc_refute(const frontend::ResolvedProgram& program, const frontend::ResolvedSpec& spec,
                   const VerifyOptions& options, const std::string& function = "");

// Replays a trace concretely; true when it ends in the reported failure.
bool replay(const frontend::ResolvedProgram& program, const frontend::ResolvedSpec& spec, Trace& trace,
            const std::string& function = "");

struct PropertyResult {
  std::string id;
  frontend::SpecKind kind = frontend::SpecKind::Rule;
  std::string name;
  Verdict verdict;                              // invariants: the worst per-function verdict
  std::map<std::string, Verdict> per_function;  // invariants only
  double seconds = 0;
};

// Aggregate for invariants: Violated > Unknown > Proven > VacuouslyProven.
Verdict combine(const std::map<std::string, Verdict>& per_function);

Verdict verify_property(const frontend::ResolvedProgram& program, const frontend::ResolvedSpec& spec,
                        const VerifyOptions& options, std::map<std::string, Verdict>* per_function = nullptr);

struct Job {
  std::string id;
  std::shared_ptr<const frontend::ResolvedSpec> spec;
};

// Runs independent jobs on `threads` workers; results sorted by id.
std::vector<PropertyResult> verify_all(const frontend::ResolvedProgram& program, const std::vector<Job>& jobs,
                                       const VerifyOptions& options, unsigned threads = 0);

// Numbered call sequence with concrete arguments.
std::string render_trace(const Trace& t);

}  // namespace ppgpt::verify
