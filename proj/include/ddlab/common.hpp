// Shared basics: exact rational scalar type, error taxonomy, small utilities.
#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ddlab {

// All linear algebra is exact: arbitrary-precision rationals, never floats.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

// Malformed text/JSON input (syntax level).
struct ParseError : std::runtime_error {
    int line = 0, column = 0;
    ParseError(const std::string& msg, int line_ = 0, int column_ = 0)
        : std::runtime_error(msg), line(line_), column(column_) {}
};

// Structurally invalid diagram or violated operation precondition.
struct ValidityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A stratum whose raw arrangement count exceeds the configured budget.
struct BudgetError : std::runtime_error {
    double estimate = 0;
    BudgetError(const std::string& msg, double estimate_)
        : std::runtime_error(msg), estimate(estimate_) {}
};

// Bad command usage (unknown check name, unsupported kind, ...).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// FNV-1a 64-bit content hash; stamps template sets into echelon caches.
inline std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string fnv1a64_hex(const std::string& data) {
    static const char* digits = "0123456789abcdef";
    std::uint64_t h = fnv1a64(data);
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

// Parses "a", "-a", "+a", "a/b" into an exact rational.
inline Rational parse_rational(const std::string& raw) {
    std::string text = raw;
    if (!text.empty() && text.front() == '+') text.erase(text.begin());
    auto slash = text.find('/');
    try {
        if (slash == std::string::npos) return Rational(BigInt(text));
        BigInt num(text.substr(0, slash));
        BigInt den(text.substr(slash + 1));
        if (den == 0) throw std::runtime_error("zero denominator");
        return Rational(num, den);
    } catch (const std::exception&) {
        throw ParseError("bad rational: " + raw);
    }
}

// Collapses a multi-line serialization onto one line, joining lines with " / ".
inline std::string to_single_line(const std::string& text) {
    std::string out;
    std::string body = text;
    while (!body.empty() && body.back() == '\n') body.pop_back();
    for (char c : body) {
        if (c == '\n') out += " / ";
        else out += c;
    }
    return out;
}

}  // namespace ddlab
