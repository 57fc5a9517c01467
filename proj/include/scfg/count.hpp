#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

namespace scfg {

/// Exact fractional count. Count distribution produces values like 1/6 and
/// 1/3 which have to compare exactly, and merges add fractions with unrelated
/// denominators, so a fixed-width rational would overflow.
using Count = mpq_class;

/// Parses "n", "n/d" or a plain decimal such as "0.25".
Count parse_count(std::string_view text);

/// "1/6", "2", "0".
std::string format_exact(const Count& c);

/// Fixed ten-decimal rendering with trailing zeros stripped: 1/6 -> 0.1666666667, 2 -> 2.
std::string format_decimal(double value);

/// Nearest integer, halves rounded up (5/2 -> 3, 1/6 -> 0).
long round_half_up(const Count& c);

inline double to_double(const Count& c) { return c.get_d(); }

}  // namespace scfg
