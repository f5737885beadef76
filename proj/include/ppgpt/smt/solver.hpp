#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "ppgpt/smt/sexpr.hpp"
#include "ppgpt/symexec/term.hpp"

namespace ppgpt::smt {

using sym::Term;

struct ModelValue;

struct ArrayValue {
  std::shared_ptr<const ModelValue> fallback;      // value outside `entries`
  std::map<BigInt, ModelValue> entries;
  std::shared_ptr<const SExpr> lambda;             // (lambda ((x Int)) body) when not a store chain
};

struct ModelValue {
  enum class Kind { Int, Bool, Array };
  Kind kind = Kind::Int;
  BigInt i;
  bool b = false;
  std::shared_ptr<const ArrayValue> array;

  static ModelValue of_int(BigInt v);
  static ModelValue of_bool(bool v);
  static ModelValue default_of(const sym::Sort& s);
  ModelValue select(const BigInt& index) const;
  ModelValue store(const BigInt& index, const ModelValue& v) const;
  std::string str() const;
};

/// Assignment returned for a satisfiable query: values of free variables and
/// of the uninterpreted applications that occurred in it.
struct Model {
  std::map<std::string, ModelValue> vars;
  std::map<std::string, BigInt> applies;  // keyed by the rendered application term

  // Ground evaluation; unknown variables take the default of their sort.
  ModelValue eval(const Term& t) const;
  BigInt eval_int(const Term& t) const;
  bool eval_bool(const Term& t) const;
};

enum class Status { Sat, Unsat, Unknown };
const char* to_string(Status s);

struct Result {
  Status status = Status::Unknown;
  std::string reason;  // Unknown only
  Model model;         // Sat only
  double seconds = 0;
};

struct SolverOptions {
  std::string command = "z3 -in";  // whitespace-separated argv; script on stdin
  int timeout_ms = 10000;
};

/// SMT-LIB script for the conjunction of `assertions`, including injectivity
/// axioms for every uninterpreted function that occurs.
std::string encode(const std::vector<Term>& assertions, bool want_model);

/// Runs an external SMT-LIB solver process per query.
class Solver {
 public:
  explicit Solver(SolverOptions options = {});
  // Throws SolverError when the process cannot be run or answers garbage.
  Result check(const std::vector<Term>& assertions, bool want_model = true) const;
  const SolverOptions& options() const { return options_; }

 private:
  SolverOptions options_;
};

struct ProcessResult {
  int exit_code = -1;
  bool timed_out = false;
  std::string out;
  std::string err;
};

// Runs argv with `input` on stdin; kills it after timeout_ms.
ProcessResult run_process(const std::vector<std::string>& argv, const std::string& input, int timeout_ms);

}  // namespace ppgpt::smt
