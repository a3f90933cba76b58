#pragma once

// Exact rational scalar and the small trait layer that lets the discrete
// engines run either in exact arithmetic or in plain double.

#include <gmpxx.h>

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>

namespace bangbang {

using Rational = mpq_class;

/// Raised for malformed user input (bad rational strings, wrong kinds, ...).
class config_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a function is evaluated outside its declared domain.
class domain_error : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Parses "a/b", "a" or a plain decimal such as "0.25" (decimals are
/// converted exactly, 0.25 -> 1/4). Set `allow_decimal` to false to reject
/// anything but integer or fraction syntax.
inline Rational parse_rational(std::string_view text, bool allow_decimal = true)
{
    std::string s(text);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
    if (s.empty()) throw config_error("empty rational");

    const auto dot = s.find_first_of(".eE");
    if (dot != std::string::npos) {
        if (!allow_decimal)
            throw config_error("decimal '" + s + "' rejected; give an exact fraction like 2/5");
        // Decimal literal -> exact ratio of integers, no binary rounding.
        const auto e = s.find_first_of("eE");
        std::string mant = s.substr(0, e);
        long exp10 = 0;
        if (e != std::string::npos) {
            try {
                exp10 = std::stol(s.substr(e + 1));
            } catch (const std::exception&) {
                throw config_error("bad exponent in '" + s + "'");
            }
        }
        const auto p = mant.find('.');
        if (p != std::string::npos) {
            exp10 -= static_cast<long>(mant.size() - p - 1);
            mant.erase(p, 1);
        }
        mpz_class num;
        if (mant.empty() || mant == "-" || mant == "+" || num.set_str(mant[0] == '+' ? mant.substr(1) : mant, 10) != 0)
            throw config_error("bad decimal '" + s + "'");
        mpz_class scale;
        mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(exp10)));
        Rational r = exp10 >= 0 ? Rational(num * scale) : Rational(num, scale);
        r.canonicalize();
        return r;
    }

    Rational r;
    if (r.set_str(s[0] == '+' ? s.substr(1) : s, 10) != 0) throw config_error("bad rational '" + s + "'");
    if (r.get_den() == 0) throw config_error("zero denominator in '" + s + "'");
    r.canonicalize();
    return r;
}

inline std::string to_string(const Rational& r) { return r.get_str(); }

/// a/b in lowest terms. Arithmetic on non-canonical operands is undefined in GMP.
inline Rational canonical(Rational r)
{
    r.canonicalize();
    return r;
}

/// Exact binary value of a finite double.
inline Rational from_double(double x)
{
    if (!std::isfinite(x)) throw domain_error("non-finite value cannot be made exact");
    return Rational(x);
}

template <class Scalar>
struct scalar_traits;

template <>
struct scalar_traits<Rational> {
    static constexpr bool exact = true;
    static constexpr const char* mode = "exact";
    static Rational from(const Rational& r) { return r; }
    static double to_double(const Rational& r) { return r.get_d(); }
};

template <>
struct scalar_traits<double> {
    static constexpr bool exact = false;
    static constexpr const char* mode = "float";
    static double from(const Rational& r) { return r.get_d(); }
    static double to_double(double x) { return x; }
};

template <class Scalar>
inline double to_double(const Scalar& x)
{
    return scalar_traits<Scalar>::to_double(x);
}

} // namespace bangbang
