#include "ppgpt/frontend/types.hpp"

namespace ppgpt::frontend {
namespace types {
namespace {
TypePtr make(TypeKind k, unsigned bits = 0) {
  auto t = std::make_shared<Type>();
  t->kind = k;
  t->bits = bits;
  return t;
}
}  // namespace

TypePtr uint_t(unsigned bits) { return make(TypeKind::Uint, bits); }
TypePtr int_t(unsigned bits) { return make(TypeKind::Int, bits); }
TypePtr bool_t() {
  static const TypePtr t = make(TypeKind::Bool);
  return t;
}
TypePtr address_t(bool payable) {
  auto t = std::make_shared<Type>();
  t->kind = TypeKind::Address;
  t->bits = 160;
  t->payable = payable;
  return t;
}
TypePtr fixed_bytes(unsigned bytes) { return make(TypeKind::FixedBytes, bytes * 8); }
TypePtr string_t() { return make(TypeKind::String); }
TypePtr bytes_t() { return make(TypeKind::Bytes); }
TypePtr int_literal() { return make(TypeKind::IntLiteral); }
TypePtr string_literal() { return make(TypeKind::StringLiteral); }
TypePtr void_t() { return make(TypeKind::Void); }
TypePtr mapping(TypePtr key, TypePtr value) {
  auto t = std::make_shared<Type>();
  t->kind = TypeKind::Mapping;
  t->key = std::move(key);
  t->element = std::move(value);
  return t;
}
TypePtr array(TypePtr element) {
  auto t = std::make_shared<Type>();
  t->kind = TypeKind::Array;
  t->element = std::move(element);
  return t;
}
TypePtr struct_t(std::string name) {
  auto t = std::make_shared<Type>();
  t->kind = TypeKind::Struct;
  t->name = std::move(name);
  return t;
}
TypePtr contract_t(std::string name) {
  auto t = std::make_shared<Type>();
  t->kind = TypeKind::Contract;
  t->bits = 160;
  t->name = std::move(name);
  return t;
}
TypePtr tuple(std::vector<TypePtr> members) {
  auto t = std::make_shared<Type>();
  t->kind = TypeKind::Tuple;
  t->members = std::move(members);
  return t;
}
}  // namespace types

bool same_type(const Type& a, const Type& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case TypeKind::Uint: case TypeKind::Int: case TypeKind::FixedBytes:
      return a.bits == b.bits;
    case TypeKind::Struct: case TypeKind::Contract:
      return a.name == b.name;
    case TypeKind::Mapping:
      return same_type(*a.key, *b.key) && same_type(*a.element, *b.element);
    case TypeKind::Array:
      return same_type(*a.element, *b.element);
    case TypeKind::Tuple:
      if (a.members.size() != b.members.size()) return false;
      for (size_t i = 0; i < a.members.size(); ++i) {
        if (!a.members[i] || !b.members[i]) {
          if (a.members[i] != b.members[i]) return false;
          continue;
        }
        if (!same_type(*a.members[i], *b.members[i])) return false;
      }
      return true;
    default:
      return true;
  }
}

bool implicitly_convertible(const Type& from, const Type& to) {
  if (same_type(from, to)) return true;
  switch (from.kind) {
    case TypeKind::IntLiteral:
      // literal range is checked where the value is known
      return to.kind == TypeKind::Uint || to.kind == TypeKind::Int || to.kind == TypeKind::FixedBytes ||
             to.kind == TypeKind::Address;
    case TypeKind::StringLiteral:
      return to.kind == TypeKind::String || to.kind == TypeKind::Bytes || to.kind == TypeKind::FixedBytes;
    case TypeKind::Uint:
      return (to.kind == TypeKind::Uint && to.bits >= from.bits) || (to.kind == TypeKind::Int && to.bits > from.bits);
    case TypeKind::Int:
      return to.kind == TypeKind::Int && to.bits >= from.bits;
    case TypeKind::Address:
      return to.kind == TypeKind::Address && (!to.payable || from.payable);
    case TypeKind::Contract:
      return to.kind == TypeKind::Address;
    case TypeKind::FixedBytes:
      return to.kind == TypeKind::FixedBytes && to.bits >= from.bits;
    case TypeKind::Tuple:
      if (to.kind != TypeKind::Tuple || to.members.size() != from.members.size()) return false;
      for (size_t i = 0; i < from.members.size(); ++i) {
        if (!from.members[i] || !to.members[i]) continue;
        if (!implicitly_convertible(*from.members[i], *to.members[i])) return false;
      }
      return true;
    default:
      return false;
  }
}

std::string type_string(const Type& t) {
  switch (t.kind) {
    case TypeKind::Uint: return "uint" + std::to_string(t.bits);
    case TypeKind::Int: return "int" + std::to_string(t.bits);
    case TypeKind::Bool: return "bool";
    case TypeKind::Address: return t.payable ? "address payable" : "address";
    case TypeKind::FixedBytes: return "bytes" + std::to_string(t.bits / 8);
    case TypeKind::String: return "string";
    case TypeKind::Bytes: return "bytes";
    case TypeKind::Mapping: return "mapping(" + type_string(*t.key) + " => " + type_string(*t.element) + ")";
    case TypeKind::Array: return type_string(*t.element) + "[]";
    case TypeKind::Struct: return "struct " + t.name;
    case TypeKind::Contract: return "contract " + t.name;
    case TypeKind::Tuple: {
      std::string s = "tuple(";
      for (size_t i = 0; i < t.members.size(); ++i) {
        if (i) s += ",";
        if (t.members[i]) s += type_string(*t.members[i]);
      }
      return s + ")";
    }
    case TypeKind::IntLiteral: return "int_const";
    case TypeKind::StringLiteral: return "literal_string";
    case TypeKind::Void: return "void";
  }
  return "?";
}

BigInt type_min(const Type& t) {
  if (t.kind == TypeKind::Int) return -pow2(t.bits - 1);
  return 0;
}

BigInt type_max(const Type& t) {
  switch (t.kind) {
    case TypeKind::Uint: case TypeKind::Address: case TypeKind::Contract: case TypeKind::FixedBytes:
      return pow2(t.bits) - 1;
    case TypeKind::Int: return pow2(t.bits - 1) - 1;
    case TypeKind::Bool: return 1;
    default: return -1;  // unbounded
  }
}

}  // namespace ppgpt::frontend
