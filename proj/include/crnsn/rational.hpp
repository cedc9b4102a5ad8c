#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include <boost/multiprecision/gmp.hpp>
#include <boost/multiprecision/eigen.hpp>
#include <Eigen/Core>

namespace crnsn {

using Integer = boost::multiprecision::number<boost::multiprecision::gmp_int,
                                              boost::multiprecision::et_off>;
using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using RationalMatrix = Matrix<Rational>;
using RationalVector = Vector<Rational>;

/// Parses "p", "p/q" or a finite decimal such as "1.25" or "-0.5".
/// Throws std::invalid_argument on malformed input or a zero denominator.
Rational parse_rational(std::string_view text);

/// Lowest-terms "p/q", or "p" when the denominator is 1.
std::string to_string(const Rational& value);

inline int sign(const Rational& value) { return value.sign(); }

inline double to_double(const Rational& value) { return value.convert_to<double>(); }

inline bool is_integer(const Rational& value) {
  return boost::multiprecision::denominator(value) == 1;
}

/// base^exponent when the result is rational: integral exponents always,
/// fractional p/q exponents only when |base| is a perfect q-th power.
std::optional<Rational> exact_power(const Rational& base, const Rational& exponent);

/// Rational power of two, 2^k for any integer k.
Rational power_of_two(int k);

template <typename Derived>
Vector<double> to_double(const Eigen::MatrixBase<Derived>& v) {
  Vector<double> out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out(i) = to_double(v(i));
  return out;
}

}  // namespace crnsn
