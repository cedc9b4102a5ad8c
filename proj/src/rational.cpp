#include "crnsn/rational.hpp"

#include <cctype>
#include <stdexcept>

namespace crnsn {
namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

// Leading zeros are stripped: the GMP string constructor reads "025" as octal.
Integer parse_integer(std::string_view s) {
  while (s.size() > 1 && s.front() == '0') s.remove_prefix(1);
  return Integer(std::string(s));
}

// Largest r with r^n <= x, for x >= 0.
Integer integer_root(const Integer& x, unsigned n) {
  if (x < 2 || n == 1) return x;
  Integer lo = 0;
  Integer hi = 1;
  while (boost::multiprecision::pow(hi, n) <= x) hi *= 2;
  while (hi - lo > 1) {
    Integer mid = (lo + hi) / 2;
    if (boost::multiprecision::pow(mid, n) <= x)
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

std::optional<Integer> exact_root(const Integer& x, unsigned n) {
  Integer r = integer_root(x, n);
  if (boost::multiprecision::pow(r, n) == x) return r;
  return std::nullopt;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  std::string_view s = text;
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  Rational value;
  if (auto slash = s.find('/'); slash != std::string_view::npos) {
    auto num = s.substr(0, slash);
    auto den = s.substr(slash + 1);
    if (!all_digits(num) || !all_digits(den))
      throw std::invalid_argument("malformed fraction '" + std::string(text) + "'");
    Integer d = parse_integer(den);
    if (d == 0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
    value = Rational(parse_integer(num), d);
  } else if (auto dot = s.find('.'); dot != std::string_view::npos) {
    auto whole = s.substr(0, dot);
    auto frac = s.substr(dot + 1);
    if ((whole.empty() && frac.empty()) || (!whole.empty() && !all_digits(whole)) ||
        (!frac.empty() && !all_digits(frac)))
      throw std::invalid_argument("malformed decimal '" + std::string(text) + "'");
    Integer scale = boost::multiprecision::pow(Integer(10), static_cast<unsigned>(frac.size()));
    Integer digits = parse_integer(std::string(whole.empty() ? "0" : whole) + std::string(frac));
    value = Rational(digits, scale);
  } else {
    if (!all_digits(s)) throw std::invalid_argument("malformed number '" + std::string(text) + "'");
    value = Rational(parse_integer(s));
  }
  return negative ? Rational(-value) : value;
}

std::string to_string(const Rational& value) {
  const Integer num = boost::multiprecision::numerator(value);
  const Integer den = boost::multiprecision::denominator(value);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

std::optional<Rational> exact_power(const Rational& base, const Rational& exponent) {
  const Integer p = boost::multiprecision::numerator(exponent);
  const Integer q = boost::multiprecision::denominator(exponent);
  if (q > 64 || boost::multiprecision::abs(p) > 4096) return std::nullopt;
  const unsigned root = q.convert_to<unsigned>();
  const long power = p.convert_to<long>();

  Rational rooted = base;
  if (root != 1) {
    if (base < 0) return std::nullopt;
    auto num = exact_root(boost::multiprecision::numerator(base), root);
    auto den = exact_root(boost::multiprecision::denominator(base), root);
    if (!num || !den) return std::nullopt;
    rooted = Rational(*num, *den);
  }
  if (power < 0 && rooted == 0) return std::nullopt;
  Rational result = 1;
  for (long i = 0; i < std::labs(power); ++i) result *= rooted;
  return power < 0 ? Rational(1 / result) : result;
}

Rational power_of_two(int k) {
  Integer two_k = boost::multiprecision::pow(Integer(2), static_cast<unsigned>(std::abs(k)));
  return k >= 0 ? Rational(two_k) : Rational(Integer(1), two_k);
}

}  // namespace crnsn
