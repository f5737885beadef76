#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ppgpt/common/bigint.hpp"

namespace ppgpt::frontend {

struct Type;
using TypePtr = std::shared_ptr<const Type>;

enum class TypeKind {
  Uint,
  Int,
  Bool,
  Address,
  FixedBytes,  // bytes1..bytes32
  String,
  Bytes,
  Mapping,
  Array,
  Struct,
  Contract,    // contract or interface reference (an address at runtime)
  Tuple,
  IntLiteral,  // untyped numeric constant
  StringLiteral,
  Void,
};

struct Type {
  TypeKind kind = TypeKind::Void;
  unsigned bits = 0;   // Uint/Int width, FixedBytes width in bits
  bool payable = false;
  std::string name;    // struct or contract name
  TypePtr key;         // mapping key
  TypePtr element;     // mapping value / array element
  std::vector<TypePtr> members;  // tuple components (null = empty slot)

  bool is_integer() const { return kind == TypeKind::Uint || kind == TypeKind::Int || kind == TypeKind::IntLiteral; }
  bool is_signed() const { return kind == TypeKind::Int; }
  // value types occupy one storage leaf
  bool is_value() const {
    switch (kind) {
      case TypeKind::Uint: case TypeKind::Int: case TypeKind::Bool: case TypeKind::Address:
      case TypeKind::FixedBytes: case TypeKind::String: case TypeKind::Bytes: case TypeKind::Contract:
      case TypeKind::IntLiteral: case TypeKind::StringLiteral:
        return true;
      default:
        return false;
    }
  }
  bool is_reference() const {
    return kind == TypeKind::Mapping || kind == TypeKind::Array || kind == TypeKind::Struct;
  }
};

namespace types {
TypePtr uint_t(unsigned bits = 256);
TypePtr int_t(unsigned bits = 256);
TypePtr bool_t();
TypePtr address_t(bool payable = false);
TypePtr fixed_bytes(unsigned bytes);
TypePtr string_t();
TypePtr bytes_t();
TypePtr int_literal();
TypePtr string_literal();
TypePtr void_t();
TypePtr mapping(TypePtr key, TypePtr value);
TypePtr array(TypePtr element);
TypePtr struct_t(std::string name);
TypePtr contract_t(std::string name);
TypePtr tuple(std::vector<TypePtr> members);
}  // namespace types

bool same_type(const Type& a, const Type& b);
// Implicit conversion as used for assignment and argument passing.
bool implicitly_convertible(const Type& from, const Type& to);
std::string type_string(const Type& t);

// Inclusive value range of an integer-like value type; bool maps to [0,1].
BigInt type_min(const Type& t);
BigInt type_max(const Type& t);

}  // namespace ppgpt::frontend
