#pragma once

#include <string>
#include <string_view>

#include "jladder/errors.hpp"

namespace jladder {

// Regression sums (x^2, x*y) pass 2^63 well before the walk reaches 10^12.
using i128 = __int128;

inline std::string to_string(i128 v) {
  if (v == 0) return "0";
  const bool negative = v < 0;
  std::string digits;
  // Work on the negative side so the minimum value does not overflow.
  if (!negative) v = -v;
  while (v != 0) {
    digits.push_back(static_cast<char>('0' - static_cast<int>(v % 10)));
    v /= 10;
  }
  if (negative) digits.push_back('-');
  return {digits.rbegin(), digits.rend()};
}

inline i128 parse_i128(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("empty integer");
  bool negative = false;
  std::size_t i = 0;
  if (text[0] == '-' || text[0] == '+') {
    negative = text[0] == '-';
    i = 1;
  }
  if (i == text.size()) throw std::invalid_argument("bad integer: " + std::string(text));
  i128 v = 0;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (c < '0' || c > '9') throw std::invalid_argument("bad integer: " + std::string(text));
    v = v * 10 - (c - '0');
  }
  return negative ? v : -v;
}

}  // namespace jladder
