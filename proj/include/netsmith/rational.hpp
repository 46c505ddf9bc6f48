#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <boost/rational.hpp>

// Exact-match integer equality. Under C++20 the reversed candidates of the
// templated mixed comparisons resolve to themselves and recurse forever.
namespace boost {
inline bool operator==(const rational<std::int64_t>& a, int b) { return a == rational<std::int64_t>(b); }
inline bool operator==(const rational<std::int64_t>& a, std::int64_t b) { return a == rational<std::int64_t>(b); }
}  // namespace boost

namespace netsmith {

/// Exact rational used for averages, scaled cut bandwidths and demand weights.
using Rational = boost::rational<std::int64_t>;

double to_double(const Rational& r);

/// "p/q", or "p" when the denominator is one.
std::string to_string(const Rational& r);

/// Accepts "3", "-2/7" and finite decimals such as "0.125".
Rational parse_rational(std::string_view text);

}  // namespace netsmith
