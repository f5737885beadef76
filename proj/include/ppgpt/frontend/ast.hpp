#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ppgpt/common/bigint.hpp"
#include "ppgpt/frontend/source.hpp"

namespace ppgpt::frontend {

struct TypeName;
struct Expr;
struct Stmt;
using TypeNamePtr = std::shared_ptr<const TypeName>;
using ExprPtr = std::shared_ptr<const Expr>;
using StmtPtr = std::shared_ptr<const Stmt>;

enum class TypeNameKind { Elementary, Mapping, Array, UserDefined };

struct TypeName {
  TypeNameKind kind = TypeNameKind::Elementary;
  Span span;
  std::string name;       // "uint256", "address", ... or a user-defined type name
  bool payable = false;   // `address payable`
  TypeNamePtr key;        // mapping key
  TypeNamePtr element;    // mapping value or array element
};

enum class ExprKind {
  Identifier,
  Number,
  Bool,
  String,
  Unary,        // name: "!", "-", "++", "--" (prefix), "post++", "post--", "delete"
  Binary,       // name: operator spelling
  Assign,       // name: "=", "+=", ...
  Ternary,      // operands: cond, then, else
  Index,        // operands: base, index
  Member,       // operands: base; name: member
  Call,         // operands: callee, args...; options: {value: e}
  Old,          // operands: inner; str: "old" or "__old__" spelling
  New,          // type_name: array type; operands: length args
  ElementaryType,  // type_name; used as conversion callee, e.g. address(0)
  Tuple,        // operands (null entries are omitted tuple slots)
};

struct NamedArg {
  std::string name;
  ExprPtr value;
};

struct Expr {
  ExprKind kind = ExprKind::Identifier;
  Span span;
  std::string name;
  BigInt number;
  bool boolean = false;
  std::string str;  // decoded string literal bytes; original spelling for numbers
  std::vector<ExprPtr> operands;
  std::vector<NamedArg> options;
  TypeNamePtr type_name;
};

enum class DataLocation { Default, Memory, Storage, Calldata };

struct VarDecl {
  TypeNamePtr type;
  DataLocation location = DataLocation::Default;
  std::string name;
  Span span;
};

enum class StmtKind {
  Block,
  VarDecl,      // decls (nullopt = skipped tuple slot), expr = initializer (may be null)
  Expr,         // expr
  If,           // expr = cond; children[0] = then; children[1] = else (may be null)
  For,          // children[0] = init (may be null); expr = cond (may be null); expr2 = post; children[1] = body
  While,        // expr = cond; children[0] = body
  Return,       // expr (may be null)
  Emit,         // expr = event call
  Placeholder,  // `_;` inside modifiers
  Break,
  Continue,
  Unchecked,    // children = block statements
};

struct Stmt {
  StmtKind kind = StmtKind::Block;
  Span span;
  std::vector<std::optional<VarDecl>> decls;
  ExprPtr expr;
  ExprPtr expr2;
  std::vector<StmtPtr> children;
};

enum class Visibility { Default, Public, External, Internal, Private };
enum class Mutability { NonPayable, Payable, View, Pure };

struct Param {
  TypeNamePtr type;
  DataLocation location = DataLocation::Default;
  std::string name;  // may be empty for unnamed returns
  Span span;
};

struct StateVarDef {
  TypeNamePtr type;
  std::string name;
  Visibility visibility = Visibility::Default;
  bool constant = false;
  bool immutable = false;
  ExprPtr init;
  Span span;
};

struct StructDef {
  std::string name;
  std::vector<Param> fields;
  Span span;
};

struct EventDef {
  std::string name;
  std::vector<Param> params;
  Span span;
};

struct ModifierInvocation {
  std::string name;
  std::vector<ExprPtr> args;
  bool has_parens = false;
  Span span;
};

enum class FunctionKind { Function, Constructor, Modifier, Receive, Fallback };

struct FunctionDef {
  FunctionKind kind = FunctionKind::Function;
  std::string name;
  std::vector<Param> params;
  std::vector<Param> returns;
  Visibility visibility = Visibility::Default;
  Mutability mutability = Mutability::NonPayable;
  bool is_virtual = false;
  bool is_override = false;
  std::vector<ModifierInvocation> modifiers;
  StmtPtr body;  // Block; null when the function is declared without implementation
  Span span;
  Span name_span;

  bool is_public_entry() const {
    return kind == FunctionKind::Function &&
           (visibility == Visibility::Public || visibility == Visibility::External ||
            visibility == Visibility::Default);
  }
  bool is_mutating() const { return mutability == Mutability::NonPayable || mutability == Mutability::Payable; }
};

struct BaseSpecifier {
  std::string name;
  std::vector<ExprPtr> args;
  Span span;
};

enum class ContractKind { Contract, Abstract, Interface };

struct ContractDef {
  ContractKind kind = ContractKind::Contract;
  std::string name;
  std::vector<BaseSpecifier> bases;
  std::vector<StateVarDef> state_vars;
  std::vector<StructDef> structs;
  std::vector<EventDef> events;
  std::vector<FunctionDef> functions;  // includes constructor/receive/fallback
  std::vector<FunctionDef> modifiers;
  Span span;
  Span name_span;
};

/// A parsed `.msol` file.
struct SourceUnit {
  SourcePtr source;
  std::vector<std::string> pragmas;
  std::vector<ContractDef> contracts;
};

enum class SpecKind { Invariant, FunctionSpec, Rule };

/// One PSL property.
struct SpecUnit {
  SpecKind kind = SpecKind::Invariant;
  std::string name;                 // invariant/rule name or the specified function's name
  bool has_params = false;          // whether a parameter list was written
  std::vector<Param> params;        // rule parameters or the function signature in a FunctionSpec
  bool braced = false;              // FunctionSpec written as `function f { precondition ... }`
  std::vector<ExprPtr> exprs;       // invariant body
  std::vector<ExprPtr> pre;         // FunctionSpec preconditions
  std::vector<ExprPtr> post;        // FunctionSpec postconditions
  bool has_pre = false;
  bool has_post = false;
  std::vector<StmtPtr> body;        // rule body
  Span span;
  Span name_span;
};

/// A parsed `.psl` file.
struct SpecFile {
  SourcePtr source;
  std::vector<SpecUnit> units;
};

const char* to_string(SpecKind kind);
const char* to_string(Visibility v);
const char* to_string(DataLocation loc);

}  // namespace ppgpt::frontend
