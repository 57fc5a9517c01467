#include "scfg/count.hpp"

#include <cstdio>
#include <stdexcept>

namespace scfg {

Count parse_count(std::string_view text) {
  std::string s(text);
  if (s.empty()) throw std::invalid_argument("empty count");
  auto dot = s.find('.');
  if (dot == std::string::npos) {
    Count c;
    if (c.set_str(s, 10) != 0) throw std::invalid_argument("malformed count: " + s);
    if (c.get_den() == 0) throw std::invalid_argument("zero denominator: " + s);
    c.canonicalize();
    return c;
  }
  // Decimal: digits after the dot become a power-of-ten denominator.
  std::string digits = s.substr(0, dot) + s.substr(dot + 1);
  if (digits.empty() || digits == "-") throw std::invalid_argument("malformed count: " + s);
  mpz_class num;
  if (num.set_str(digits, 10) != 0) throw std::invalid_argument("malformed count: " + s);
  mpz_class den;
  mpz_ui_pow_ui(den.get_mpz_t(), 10, s.size() - dot - 1);
  Count c(num, den);
  c.canonicalize();
  return c;
}

std::string format_exact(const Count& c) {
  Count canonical = c;
  canonical.canonicalize();
  return canonical.get_str();
}

std::string format_decimal(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10f", value);
  std::string s(buf);
  auto dot = s.find('.');
  if (dot != std::string::npos) {
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
  }
  if (s == "-0") s = "0";
  return s;
}

long round_half_up(const Count& c) {
  // floor(c + 1/2)
  Count shifted = c + Count(1, 2);
  mpz_class q;
  mpz_fdiv_q(q.get_mpz_t(), shifted.get_num_mpz_t(), shifted.get_den_mpz_t());
  return q.get_si();
}

}  // namespace scfg
