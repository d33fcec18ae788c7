#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>
#include <string_view>

#include "bevscan/core/error.hpp"

namespace bev {

/// Exact integer in an asset's base units. Signed so that profits can go negative;
/// quantities that the domain requires to be non-negative are checked at the edges.
using Amount = boost::multiprecision::cpp_int;

/// Exact rational (prices, ratios, thresholds).
using Rational = boost::multiprecision::cpp_rational;

inline constexpr std::uint64_t kGwei = 1'000'000'000ULL;

/// One whole native coin in base units (Wei-like, 18 decimals).
inline const Amount& native_unit() {
    static const Amount unit = boost::multiprecision::pow(Amount(10), 18);
    return unit;
}

inline bool is_decimal_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    return true;
}

/// Parses a non-negative decimal integer. Leading '+' and whitespace are rejected.
inline Amount parse_amount(std::string_view s) {
    if (!is_decimal_digits(s)) throw PreconditionError("not a decimal integer: '" + std::string(s) + "'");
    // cpp_int reads a leading 0 as octal
    const auto nz = s.find_first_not_of('0');
    if (nz == std::string_view::npos) return Amount(0);
    return Amount(std::string(s.substr(nz)));
}

/// Parses a signed decimal integer.
inline Amount parse_signed_amount(std::string_view s) {
    if (!s.empty() && s.front() == '-') return -parse_amount(s.substr(1));
    return parse_amount(s);
}

inline std::string to_string(const Amount& a) { return a.str(); }

/// Accepts "p", "p/q" or a plain decimal "i.f"; the value is kept exact.
inline Rational parse_rational(std::string_view s) {
    bool negative = false;
    if (!s.empty() && s.front() == '-') {
        negative = true;
        s.remove_prefix(1);
    }
    Rational r;
    if (auto slash = s.find('/'); slash != std::string_view::npos) {
        Amount num = parse_amount(s.substr(0, slash));
        Amount den = parse_amount(s.substr(slash + 1));
        if (den == 0) throw PreconditionError("zero denominator: '" + std::string(s) + "'");
        r = Rational(num, den);
    } else if (auto dot = s.find('.'); dot != std::string_view::npos) {
        auto whole = s.substr(0, dot);
        auto frac = s.substr(dot + 1);
        if (whole.empty() || frac.empty()) throw PreconditionError("bad decimal: '" + std::string(s) + "'");
        Amount num = parse_amount(std::string(whole) + std::string(frac));
        Amount den = boost::multiprecision::pow(Amount(10), static_cast<unsigned>(frac.size()));
        r = Rational(num, den);
    } else {
        r = Rational(parse_amount(s));
    }
    return negative ? Rational(-r) : r;
}

/// Canonical text: "p" for integers, "p/q" otherwise (always in lowest terms).
inline std::string to_string(const Rational& r) {
    const Amount num = boost::multiprecision::numerator(r);
    const Amount den = boost::multiprecision::denominator(r);
    if (den == 1) return num.str();
    return num.str() + "/" + den.str();
}

/// Floor division for signed operands (cpp_int division truncates toward zero).
inline Amount floor_div(const Amount& num, const Amount& den) {
    Amount q = num / den;
    Amount r = num % den;
    if (r != 0 && ((r < 0) != (den < 0))) --q;
    return q;
}

inline Amount floor(const Rational& r) {
    return floor_div(boost::multiprecision::numerator(r), boost::multiprecision::denominator(r));
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }
inline double to_double(const Amount& a) { return a.convert_to<double>(); }

} // namespace bev
