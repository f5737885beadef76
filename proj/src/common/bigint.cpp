#include "ppgpt/common/bigint.hpp"

#include <algorithm>

namespace ppgpt {

std::string to_hex(const BigInt& v) {
  if (v < 0) return "-" + to_hex(-v);
  if (v == 0) return "0x0";
  static const char* digits = "0123456789abcdef";
  std::string out;
  BigInt x = v;
  while (x > 0) {
    out.push_back(digits[static_cast<unsigned>(x & 0xf)]);
    x >>= 4;
  }
  std::reverse(out.begin(), out.end());
  return "0x" + out;
}

}  // namespace ppgpt
