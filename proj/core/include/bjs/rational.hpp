#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

#include "bjs/errors.hpp"

namespace bjs {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline std::string rational_to_string(const Rational& r) {
  return r.str();
}

// Accepts "p", "p/q", and plain decimals like "-1.25".
inline Rational rational_from_string(const std::string& s) {
  auto bad = [&]() -> Rational {
    throw Error(ErrorKind::ConfigError, "cannot parse rational '" + s + "'");
  };
  if (s.empty()) return bad();
  auto slash = s.find('/');
  if (slash != std::string::npos) {
    try {
      BigInt p(s.substr(0, slash));
      BigInt q(s.substr(slash + 1));
      if (q == 0) return bad();
      return Rational(p, q);
    } catch (...) {
      return bad();
    }
  }
  auto dot = s.find('.');
  if (dot != std::string::npos) {
    std::string digits = s.substr(0, dot) + s.substr(dot + 1);
    size_t frac_len = s.size() - dot - 1;
    try {
      BigInt p(digits);
      BigInt q = 1;
      for (size_t i = 0; i < frac_len; ++i) q *= 10;
      return Rational(p, q);
    } catch (...) {
      return bad();
    }
  }
  try {
    return Rational(BigInt(s));
  } catch (...) {
    return bad();
  }
}

}  // namespace bjs
