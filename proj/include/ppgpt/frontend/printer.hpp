#pragma once

#include <string>

#include "ppgpt/frontend/ast.hpp"

namespace ppgpt::frontend {

// Canonical source rendering. Reparsing the output yields a structurally equal AST.
std::string print_expr(const Expr& e);
std::string print_type(const TypeName& t);
std::string print_stmt(const Stmt& s, int indent = 0);
std::string print_unit(const SourceUnit& unit);
std::string print_spec(const SpecUnit& spec);
std::string print_specs(const SpecFile& file);

// Span-free S-expression dumps; two ASTs are structurally equal iff their dumps are equal.
std::string dump_expr(const Expr& e);
std::string dump_unit(const SourceUnit& unit);
std::string dump_specs(const SpecFile& file);

}  // namespace ppgpt::frontend
