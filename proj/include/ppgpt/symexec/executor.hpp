#pragma once

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "ppgpt/frontend/resolver.hpp"
#include "ppgpt/symexec/term.hpp"

namespace ppgpt::sym {

using frontend::ContractInfo;
using frontend::FunctionInfo;
using frontend::ResolvedProgram;
using frontend::ResolvedSpec;
using frontend::TypePtr;

struct Env {
  Term sender, value, timestamp, number, origin;
};

// Symbols whose concrete values come from outside the contract (external call
// results, balances, rule parameters, `$` variables). A trace records them so a
// replay can feed the same values back.
struct OracleSymbol {
  std::string name;
  std::string kind;    // "external", "balance", "returndata", "param", "symbolic", "success"
  std::string origin;  // e.g. "IPriceFeed.latestPrice"
  SortPtr sort;
};

struct Obligation {
  Term condition;
  Term context;  // path condition when the assertion was reached
  frontend::Span span;
};

// A storage or memory location: leaf keys are root + path + suffix, and the
// leaf arrays are selected by `indices` (one per mapping/array level crossed).
struct Loc {
  bool memory = false;
  bool old = false;  // read from the entry snapshot
  std::string root;
  std::string path;
  std::vector<Term> indices;
  TypePtr type;

  std::string key() const { return root + path; }
};

struct Value {
  enum class Kind { None, Scalar, Ref, Tuple };
  Kind kind = Kind::None;
  Term term;
  Loc loc;
  std::vector<Value> items;
  TypePtr type;

  static Value scalar(Term t, TypePtr ty) {
    Value v;
    v.kind = Kind::Scalar;
    v.term = std::move(t);
    v.type = std::move(ty);
    return v;
  }
  static Value ref(Loc l) {
    Value v;
    v.kind = Kind::Ref;
    v.type = l.type;
    v.loc = std::move(l);
    return v;
  }
};

struct SymState {
  std::map<std::string, Term> store;
  std::map<std::string, Term> old_store;
  std::map<std::string, Term> memory;
  std::vector<Term> path;  // conjuncts of the path condition
  Env env;
  int next_object = 0;
  std::vector<OracleSymbol> oracles;
  std::vector<Obligation> obligations;
  TermSet constrained;     // reads that already carry a range fact
  bool truncated = false;  // a loop hit the unrolling bound
  bool imprecise = false;  // a call beyond the depth bound was havocked

  Term path_condition() const { return land(path); }
  void assume(const Term& t) {
    if (!is_true(t)) path.push_back(t);
  }
};

enum class OutcomeKind { Normal, Reverted };

struct Outcome {
  OutcomeKind kind = OutcomeKind::Normal;
  SymState state;
  Value ret;
  std::string reason;  // Reverted only
};

struct ExecOptions {
  int loop_bound = 5;
  int call_depth = 3;
  size_t max_paths = 4096;
  int max_array_length = -1;  // bound on fresh calldata array lengths; -1 = none
  // When >= 0, every unconstrained input (fresh symbol or unwritten storage
  // read) is restricted to 0..domain_bound. Used for exhaustive cross-checks.
  int domain_bound = -1;
};

class PathLimitExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One storage leaf of a type: suffix relative to the owning location, number
// of extra index levels, and the value type stored there.
struct Leaf {
  std::string suffix;
  size_t depth = 0;
  TypePtr type;
};
std::vector<Leaf> leaves_of(const ResolvedProgram& program, const TypePtr& type);
SortPtr value_sort(const frontend::Type& t);
SortPtr leaf_sort(const Leaf& leaf, size_t base_depth);

class Executor {
 public:
  // `spec` may be null when only contract code is executed. The contract is
  // the program's main contract.
  Executor(const ResolvedProgram& program, const ResolvedSpec* spec, ExecOptions options = {});
  ~Executor();
  Executor(const Executor&) = delete;
  Executor& operator=(const Executor&) = delete;

  const ContractInfo& contract() const;
  const ExecOptions& options() const;

  // Storage bound to fresh symbols (with type ranges on scalars).
  SymState init_state();
  // Storage at its default (zero) values, before deployment.
  SymState default_state();
  // Fresh transaction environment; msg.value is 0 unless `payable`.
  Env fresh_env(SymState& st, bool payable);
  // Fresh calldata value of the given type (arrays become memory objects).
  Value fresh_value(SymState& st, const TypePtr& type, const std::string& name);
  std::string fresh_name(const std::string& base);

  // Runs initializers and the constructor chain on `st`.
  std::vector<Outcome> run_constructor(const SymState& st, const std::vector<Value>& args);
  // Executes one transaction to `fn` with the state's env.
  std::vector<Outcome> call(const SymState& st, const FunctionInfo& fn, const std::vector<Value>& args);
  // Executes the body of the rule `spec` refers to. Rule parameters become fresh symbols.
  std::vector<Outcome> run_rule(const SymState& st);

  // Evaluates a specification condition with unbounded arithmetic. Plain state
  // reads use the entry snapshot when `entry_state` is set; old(...) always does.
  Term condition(SymState& st, const frontend::Expr& e, const std::map<std::string, Value>& bindings,
                 bool entry_state);

  // Reads a value-typed location.
  Term read(SymState& st, const Loc& loc);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Encoding of string/bytes literals as integers: 0x01 marker byte, then the bytes.
BigInt encode_string(const std::string& bytes);

}  // namespace ppgpt::sym
