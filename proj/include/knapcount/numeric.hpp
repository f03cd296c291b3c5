#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cctype>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <utility>

#include "knapcount/error.hpp"

namespace knapcount {

using Int = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline Int numerator(const Rational& r) { return boost::multiprecision::numerator(r); }
inline Int denominator(const Rational& r) { return boost::multiprecision::denominator(r); }

inline Int parse_int(const std::string& s) {
    if (s.empty()) throw input_error("empty integer literal");
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) throw input_error("bad integer literal: " + s);
    for (; i < s.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i])))
            throw input_error("bad integer literal: " + s);
    return Int(s);
}

// Accepts "p/q", plain integers, and finite decimal expansions ("0.1" -> 1/10).
inline Rational parse_rational(const std::string& s) {
    auto slash = s.find('/');
    if (slash != std::string::npos) {
        Int num = parse_int(s.substr(0, slash));
        Int den = parse_int(s.substr(slash + 1));
        if (den == 0) throw input_error("zero denominator: " + s);
        return Rational(num, den);
    }
    auto dot = s.find('.');
    if (dot == std::string::npos) return Rational(parse_int(s));
    std::string head = s.substr(0, dot);
    std::string frac = s.substr(dot + 1);
    if (frac.empty()) return Rational(parse_int(head.empty() ? "0" : head));
    bool neg = !head.empty() && head[0] == '-';
    Int whole = head.empty() || head == "-" || head == "+" ? Int(0) : parse_int(head);
    Int digits = parse_int(frac);
    Int den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    Rational r = Rational(abs(whole)) + Rational(digits, den);
    return neg ? -r : r;
}

inline std::string to_string(const Int& v) { return v.str(); }

// Canonical rational rendering: integers print bare, otherwise "p/q".
inline std::string to_string(const Rational& r) {
    if (denominator(r) == 1) return numerator(r).str();
    return numerator(r).str() + "/" + denominator(r).str();
}

inline Int pow_int(Int base, unsigned long exp) {
    Int acc = 1;
    while (exp) {
        if (exp & 1) acc *= base;
        base *= base;
        exp >>= 1;
    }
    return acc;
}

inline Int pow2(unsigned long exp) { return Int(1) << exp; }

// floor(a/b) for b > 0.
inline Int floor_div(const Int& a, const Int& b) {
    Int q = a / b;
    if (a % b != 0 && ((a < 0) != (b < 0))) --q;
    return q;
}

// ceil(a/b) for b > 0.
inline Int ceil_div(const Int& a, const Int& b) {
    return floor_div(a + b - 1, b);
}

// Exact binomial coefficient via the multiplicative formula.
inline Int binomial(const Int& n, const Int& k) {
    if (k < 0 || n < 0 || k > n) return 0;
    Int kk = k;
    if (n - k < kk) kk = n - k;
    Int acc = 1;
    for (Int i = 1; i <= kk; ++i) {
        acc *= n - kk + i;
        acc /= i; // divides exactly at every step
    }
    return acc;
}

// Checks (1+eps)^n <= 1+delta with exact integer arithmetic.
inline bool one_plus_pow_leq(const Rational& eps, unsigned long n, const Rational& delta) {
    const Int pe = numerator(eps), qe = denominator(eps);
    const Int pd = numerator(delta), qd = denominator(delta);
    // ((qe+pe)/qe)^n <= (qd+pd)/qd
    return pow_int(qe + pe, n) * qd <= pow_int(qe, n) * (qd + pd);
}

// Layer tolerance for an n-layer rounding pass: start at delta/(2n) and halve
// until (1+eps)^n <= 1+delta holds exactly.
inline Rational layer_epsilon(const Rational& delta, unsigned long n) {
    if (delta <= 0) throw input_error("accuracy parameter must be positive");
    if (n == 0) return delta;
    Rational eps = delta / Rational(2 * Int(n));
    while (!one_plus_pow_leq(eps, n, delta)) eps /= 2;
    return eps;
}

// Memory budget for table-building operations, in bytes. Overridable via
// KNAPCOUNT_MEM_BUDGET_MB.
inline std::size_t mem_budget_bytes() {
    static const std::size_t cached = [] {
        std::size_t mb = 512;
        if (const char* env = std::getenv("KNAPCOUNT_MEM_BUDGET_MB")) {
            char* end = nullptr;
            unsigned long long v = std::strtoull(env, &end, 10);
            if (end && *end == '\0' && v > 0) mb = static_cast<std::size_t>(v);
        }
        return mb * std::size_t(1024) * 1024;
    }();
    return cached;
}

inline void check_budget(const Int& entries, std::size_t bytes_per_entry, const char* what) {
    Int limit = Int(mem_budget_bytes() / bytes_per_entry);
    if (entries > limit)
        throw capacity_error(std::string(what) + ": " + entries.str() +
                             " entries exceed the memory budget (set KNAPCOUNT_MEM_BUDGET_MB to raise)");
}

} // namespace knapcount
