#pragma once

#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ppgpt/frontend/resolver.hpp"

namespace ppgpt::verify {

using frontend::ResolvedProgram;
using frontend::ResolvedSpec;

/// Concrete calldata / trace value: an integer (bools are 0/1) or an array.
struct CValue {
  bool is_array = false;
  BigInt i;
  std::vector<CValue> items;

  static CValue of(BigInt v) {
    CValue c;
    c.i = std::move(v);
    return c;
  }
  std::string str() const;
  // Typed rendering: strings quoted, addresses and fixed bytes in hex.
  std::string show(const frontend::Type* t) const;
  bool operator==(const CValue& o) const { return is_array == o.is_array && i == o.i && items == o.items; }
};

struct CEnv {
  BigInt sender, value, timestamp, number, origin;
};

struct CallRecord {
  std::string function;
  std::vector<CValue> args;
  std::vector<frontend::TypePtr> types;  // parameter types, for display
};

class Reverted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when the interpreter meets something a replay cannot reproduce
/// (oracle queue exhausted, unsupported construct).
class ReplayError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ObligationResult {
  frontend::Span span;
  bool holds = true;
};

/// Outcome of running a rule body concretely.
struct RuleRun {
  bool reverted = false;
  bool assumptions_hold = true;  // every assume/require in the rule was true
  std::vector<ObligationResult> obligations;
  std::vector<CallRecord> calls;  // contract calls made by the rule
};

/// Concrete MiniSol interpreter over arbitrary-precision integers, used to
/// replay counterexample traces independently of the symbolic engine.
class Interpreter {
 public:
  Interpreter(const ResolvedProgram& program, const ResolvedSpec* spec);
  ~Interpreter();
  Interpreter(const Interpreter&) = delete;
  Interpreter& operator=(const Interpreter&) = delete;

  // Values for external-call results, balances, `$` variables and rule
  // parameters, consumed in creation order.
  void set_oracles(std::deque<CValue> values);
  size_t oracles_left() const;
  void set_this(const BigInt& address);

  // Resets storage to defaults and runs initializers plus the constructor chain.
  void deploy(const std::vector<CValue>& args, const CEnv& env);
  // One transaction; throws Reverted (state is rolled back).
  void call(const std::string& function, const std::vector<CValue>& args, const CEnv& env);
  // Snapshot used for old(...) and entry-state reads.
  void snapshot();
  // Evaluates a spec condition; `bindings` by parameter name.
  bool condition(const frontend::Expr& e, const std::map<std::string, CValue>& bindings, bool entry_state);
  // Return values of the last successful call().
  std::vector<CValue> last_return() const;
  RuleRun run_rule(const CEnv& env);

  // Scalar value of a state variable (for tests).
  BigInt state_scalar(const std::string& name) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Stand-in for keccak256/sha256 over integer arguments (SHA3-256 of a
// length-prefixed big-endian encoding); injective for practical purposes.
BigInt concrete_hash(const std::string& fn, const std::vector<BigInt>& args);

}  // namespace ppgpt::verify
