#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ppgpt/frontend/ast.hpp"
#include "ppgpt/frontend/diagnostic.hpp"
#include "ppgpt/frontend/types.hpp"

namespace ppgpt::frontend {

struct ContractInfo;

struct StateVarInfo {
  std::string name;
  TypePtr type;
  const StateVarDef* def = nullptr;
  const ContractInfo* owner = nullptr;
};

struct StructInfo {
  std::string name;
  const StructDef* def = nullptr;
  std::vector<std::pair<std::string, TypePtr>> fields;

  TypePtr field(const std::string& n) const {
    for (const auto& [fname, t] : fields)
      if (fname == n) return t;
    return nullptr;
  }
};

struct FunctionInfo {
  const FunctionDef* def = nullptr;
  const ContractInfo* owner = nullptr;
  std::vector<TypePtr> param_types;
  std::vector<TypePtr> return_types;

  const std::string& name() const { return def->name; }
  size_t arity() const { return param_types.size(); }
  std::string signature() const;
};

struct ContractInfo {
  std::string name;
  const ContractDef* def = nullptr;
  SourcePtr source;
  std::vector<const ContractInfo*> linearization;  // self first, then bases (C3)
  std::vector<const StateVarInfo*> state_vars;     // inherited first, declaration order
  std::vector<std::unique_ptr<StateVarInfo>> own_vars;
  std::vector<std::unique_ptr<FunctionInfo>> own_functions;
  std::vector<std::unique_ptr<FunctionInfo>> own_modifiers;

  bool is_interface() const { return def->kind == ContractKind::Interface; }
  bool is_abstract() const { return def->kind == ContractKind::Abstract; }
  bool derives_from(const ContractInfo* other) const;
  const FunctionInfo* constructor() const;
  const StateVarInfo* state_var(const std::string& n) const;
};

// What an identifier, member access or call refers to.
enum class RefKind {
  None,
  Local,          // local, parameter or named return
  StateVar,
  Function,       // internal function name (dispatch happens at execution)
  Builtin,        // require, assert, revert, assume, keccak256, sha3, sha256
  Magic,          // msg, block, tx, abi, this, super
  Event,
  StructType,
  ContractType,
  SymbolicAlias,  // undeclared `$v` in a rule naming state variable v
};

enum class CallKind {
  None,
  Internal,     // f(...) on the current contract; rules use this for transactions
  Super,        // super.f(...)
  External,     // I(addr).f(...) or a contract-typed variable
  LowLevel,     // addr.call{value: v}(data)
  Transfer,     // addr.transfer(v)
  Send,         // addr.send(v)
  Require,
  Assert,
  Revert,
  Assume,
  Hash,         // keccak256/sha3/sha256
  AbiEncode,
  Conversion,   // T(x)
  StructCtor,
  Push,
  Pop,
  Event,
};

enum class MemberKind { None, Field, Length, Env, Balance, Function };

struct ExprInfo {
  TypePtr type;
  RefKind ref = RefKind::None;
  CallKind call = CallKind::None;
  MemberKind member = MemberKind::None;
  const StateVarInfo* var = nullptr;        // StateVar / SymbolicAlias
  const FunctionInfo* function = nullptr;   // statically resolved callee (External: interface member)
  std::string builtin;                      // "msg.sender", "keccak256", ...
  std::optional<BigInt> constant;           // folded value of integer constants
  bool lvalue = false;
};

using ExprTable = std::unordered_map<const Expr*, ExprInfo>;

struct ResolveOptions {
  std::string main_contract;  // empty: last concrete contract of the last unit
};

class ResolvedSpec;

struct ProgramCore {
  std::vector<std::shared_ptr<const SourceUnit>> units;
  std::vector<std::unique_ptr<ContractInfo>> contracts;
  std::map<std::string, ContractInfo*> by_name;
  std::map<std::string, StructInfo> structs;
  std::unordered_map<const TypeName*, TypePtr> type_names;
  ExprTable exprs;
  const ContractInfo* main = nullptr;
};

/// Contracts with names bound, inheritance linearized and every expression typed.
/// Immutable; safe to share across threads.
class ResolvedProgram {
 public:
  explicit ResolvedProgram(std::shared_ptr<const ProgramCore> core) : core_(std::move(core)) {}

  const ProgramCore& core() const { return *core_; }
  std::shared_ptr<const ProgramCore> core_ptr() const { return core_; }
  const ContractInfo& main() const { return *core_->main; }
  const ContractInfo* contract(const std::string& name) const;
  const StructInfo* struct_info(const std::string& name) const;
  const ExprInfo* info(const Expr& e) const;
  TypePtr type_of(const TypeName& t) const;

  const FunctionInfo* dispatch(const ContractInfo& most_derived, const std::string& name, size_t arity) const;
  const FunctionInfo* super_dispatch(const ContractInfo& most_derived, const ContractInfo& from,
                                     const std::string& name, size_t arity) const;
  const FunctionInfo* modifier(const ContractInfo& most_derived, const std::string& name) const;
  // Externally callable functions of the contract with an implementation, in a stable order.
  std::vector<const FunctionInfo*> public_functions(const ContractInfo& c) const;
  // Functions named `name` on the contract (any arity), most-derived implementation each.
  std::vector<const FunctionInfo*> functions_named(const ContractInfo& c, const std::string& name) const;

  const std::vector<std::shared_ptr<const ResolvedSpec>>& specs() const { return specs_; }
  void add_spec(std::shared_ptr<const ResolvedSpec> s) { specs_.push_back(std::move(s)); }

 private:
  std::shared_ptr<const ProgramCore> core_;
  std::vector<std::shared_ptr<const ResolvedSpec>> specs_;
};

/// A spec unit resolved against a program. Resolution is lenient: the table is
/// filled as far as possible and `diagnostics` lists what failed.
class ResolvedSpec {
 public:
  std::shared_ptr<const ProgramCore> core;
  std::shared_ptr<const SpecFile> file;
  size_t index = 0;
  const FunctionInfo* target = nullptr;      // FunctionSpec: the specified function
  std::vector<std::string> param_names;      // FunctionSpec: names bound to the target's parameters
  ExprTable exprs;
  std::unordered_map<const TypeName*, TypePtr> type_names;
  std::vector<Diagnostic> diagnostics;

  const SpecUnit& unit() const { return file->units[index]; }
  const ExprInfo* info(const Expr& e) const;
  TypePtr type_of(const TypeName& t) const;
  bool ok() const { return !has_errors(diagnostics); }
};

/// Resolves contracts only.
Parsed<ResolvedProgram> resolve(const std::vector<std::shared_ptr<const SourceUnit>>& units,
                                const ResolveOptions& options = {});

/// Resolves contracts and every unit of the spec files; any error fails the whole result.
Parsed<ResolvedProgram> resolve(const std::vector<std::shared_ptr<const SourceUnit>>& units,
                                const std::vector<std::shared_ptr<const SpecFile>>& specs,
                                const ResolveOptions& options = {});

std::shared_ptr<const ResolvedSpec> resolve_spec(const ResolvedProgram& program, std::shared_ptr<const SpecFile> file,
                                                 size_t index);

}  // namespace ppgpt::frontend
