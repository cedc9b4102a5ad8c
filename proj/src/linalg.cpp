#include "crnsn/linalg.hpp"

namespace crnsn {

RationalVector primitive_integer_vector(const RationalVector& v) {
  Integer lcm = 1;
  for (Eigen::Index i = 0; i < v.size(); ++i) lcm = boost::multiprecision::lcm(lcm, boost::multiprecision::denominator(v(i)));
  Integer gcd = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    gcd = boost::multiprecision::gcd(gcd, Integer(boost::multiprecision::numerator(v(i)) * (lcm / boost::multiprecision::denominator(v(i)))));
  if (gcd == 0) return v;
  RationalVector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out(i) = v(i) * Rational(lcm) / Rational(gcd);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (out(i) == 0) continue;
    if (out(i) < 0) out = -out;
    break;
  }
  return out;
}

}  // namespace crnsn
