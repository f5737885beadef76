#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

namespace ppgpt {

using BigInt = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<>, boost::multiprecision::et_off>;

inline BigInt pow2(unsigned bits) { return BigInt(1) << bits; }

inline std::string to_string(const BigInt& v) { return v.str(); }

std::string to_hex(const BigInt& v);

}  // namespace ppgpt
