#pragma once

#include <string>

#include "ppgpt/frontend/ast.hpp"
#include "ppgpt/frontend/diagnostic.hpp"

namespace ppgpt::frontend {

/// Parses a MiniSol source file. On failure the value is null and at least one
/// located diagnostic explains why.
Parsed<SourceUnit> parse_contract(SourcePtr source);
Parsed<SourceUnit> parse_contract(std::string name, std::string text);

/// Parses a PSL file: `invariant`, `rule`, and `function ... precondition/postcondition` blocks.
Parsed<SpecFile> parse_spec(SourcePtr source);
Parsed<SpecFile> parse_spec(std::string name, std::string text);

/// True for `uint`, `uint8`..`uint256`, `int*`, `bool`, `address`, `string`, `bytes`, `bytes1`..`bytes32`.
bool is_elementary_type_name(std::string_view word);

/// Canonical spelling of an elementary type (`uint` -> `uint256`, `byte` -> `bytes1`).
std::string canonical_type_name(std::string_view word);

}  // namespace ppgpt::frontend
