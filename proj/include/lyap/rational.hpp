#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace lyap {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// p/q with sign normalization; boost rejects negative denominators outright.
inline Rational make_rational(BigInt num, BigInt den) {
  if (den.is_zero()) throw std::invalid_argument("make_rational: zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  return Rational(std::move(num), std::move(den));
}

inline Rational make_rational(long long num, long long den = 1) {
  return make_rational(BigInt(num), BigInt(den));
}

/// Parses "p" or "p/q" with optional signs and surrounding whitespace.
inline Rational parse_rational(const std::string& text) {
  const auto first = text.find_first_not_of(" \t");
  const auto last = text.find_last_not_of(" \t");
  if (first == std::string::npos) throw std::invalid_argument("parse_rational: empty string");
  const std::string body = text.substr(first, last - first + 1);
  const auto slash = body.find('/');
  try {
    if (slash == std::string::npos) return Rational(BigInt(body));
    return make_rational(BigInt(body.substr(0, slash)), BigInt(body.substr(slash + 1)));
  } catch (const std::exception&) {
    throw std::invalid_argument("parse_rational: cannot parse '" + text + "'");
  }
}

/// Canonical text form: "p" for integers, "p/q" otherwise.
inline std::string rational_to_string(const Rational& q) {
  std::string s = numerator(q).str();
  if (denominator(q) != 1) {
    s += '/';
    s += denominator(q).str();
  }
  return s;
}

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

}  // namespace lyap
