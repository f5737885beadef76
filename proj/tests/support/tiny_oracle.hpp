#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

// Tiny contracts for cross-checking the prover: up to three uint8 state
// variables, up to two functions, constant-bound loops of at most three
// iterations. Every input ranges over 0..7. The oracle evaluates the
// generated AST directly by enumerating all states and inputs.
namespace ppgpt::tiny {

constexpr int kDomain = 7;

struct Ex;
using ExP = std::shared_ptr<const Ex>;
struct Ex {
  enum Kind { Const, State, Old, Param, Ghost, Loop, Bin } kind = Const;
  int v = 0;            // constant, variable index or ghost index ($x = 0, $b = 1)
  char op = '+';        // Bin: + - *
  ExP l, r;
};

struct Cond;
using CondP = std::shared_ptr<const Cond>;
struct Cond {
  std::string op;       // < <= == != > >=
  ExP l, r;
  std::string join;     // "", "&&" or "||"
  CondP rest;
};

struct Stmt {
  enum Kind { Assign, Require, If, For } kind = Assign;
  int var = 0;
  ExP e;
  CondP c;
  std::vector<Stmt> then_, else_;
  int bound = 0;        // For: iterations
};

struct Func {
  std::string name;
  bool has_param = false;
  std::vector<Stmt> body;
};

struct Contract {
  std::string name;
  int nvars = 1;
  std::vector<Func> fns;
};

struct FuncSpec {
  int fn = 0;
  std::vector<CondP> pre, post;
};

struct RuleCall {
  int fn = 0;
  ExP arg;              // null when the function takes none
};

struct Rule {
  std::string name;
  CondP assume;         // may be null
  int snapshot = -1;    // state var copied into $b before the calls
  std::vector<RuleCall> calls;
  std::vector<CondP> asserts;
};

std::string render(const Contract& c);
std::string render(const Contract& c, const FuncSpec& s);
std::string render(const Rule& r);

// True when some state and input in 0..7 falsifies the property.
bool oracle_violates(const Contract& c, const FuncSpec& s);
bool oracle_violates(const Contract& c, const Rule& r);

struct Property {
  std::string text;
  bool is_rule = false;
  bool violated = false;  // oracle verdict
};

struct Case {
  Contract contract;
  std::string contract_text;
  std::vector<Property> properties;
};

std::vector<Case> generate_cases(size_t n, uint64_t seed);

}  // namespace ppgpt::tiny
