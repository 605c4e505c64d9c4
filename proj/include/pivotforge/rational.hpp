#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <string>
#include <vector>

namespace pf {

using Integer = boost::multiprecision::mpz_int;
using Rational = boost::multiprecision::mpq_rational;

// "num/den" (or a bare integer) to Rational; throws std::invalid_argument.
Rational parse_rational(const std::string& text);

// Always "num/den" with den > 0, even for integers.
std::string format_rational(const Rational& r);

inline int sign(const Rational& r) { return r.sign(); }

using RationalVector = std::vector<Rational>;
using RationalMatrix = std::vector<RationalVector>;

}  // namespace pf
