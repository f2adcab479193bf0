#pragma once

#include <cstdint>
#include <numeric>
#include <string>

#include "cs_spectra/errors.hpp"

namespace cs_spectra {

// Exact rational on int64 with __int128 intermediates, always normalized
// (gcd 1, positive denominator). Used for torus-bundle fixed-point groups and
// the quadratic form det(v, Av), where atom merging must be exact.
class Rational {
public:
    Rational() : num_(0), den_(1) {}
    Rational(long long n) : num_(n), den_(1) {}
    Rational(long long n, long long d) { assign(n, d); }

    long long num() const { return num_; }
    long long den() const { return den_; }
    double value() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    Rational operator-() const { return Rational(-num_, den_); }

    friend Rational operator+(const Rational& a, const Rational& b) {
        return from128(static_cast<__int128>(a.num_) * b.den_ +
                           static_cast<__int128>(b.num_) * a.den_,
                       static_cast<__int128>(a.den_) * b.den_);
    }
    friend Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
    friend Rational operator*(const Rational& a, const Rational& b) {
        return from128(static_cast<__int128>(a.num_) * b.num_,
                       static_cast<__int128>(a.den_) * b.den_);
    }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num_ == b.num_ && a.den_ == b.den_;
    }
    friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
    friend bool operator<(const Rational& a, const Rational& b) {
        return static_cast<__int128>(a.num_) * b.den_ < static_cast<__int128>(b.num_) * a.den_;
    }

    bool is_integer() const { return den_ == 1; }

    long long floor_div() const {
        long long q = num_ / den_;
        if (num_ % den_ != 0 && num_ < 0) --q;
        return q;
    }

    // Fractional part in [0, 1): this is reduction mod Z.
    Rational frac() const { return *this - Rational(floor_div()); }

    std::string str() const {
        if (den_ == 1) return std::to_string(num_);
        return std::to_string(num_) + "/" + std::to_string(den_);
    }

private:
    void assign(long long n, long long d) {
        if (d == 0) throw validation_error("ZeroDenominator", "rational with zero denominator");
        if (d < 0) { n = -n; d = -d; }
        const long long g = std::gcd(n, d);
        num_ = g ? n / g : 0;
        den_ = g ? d / g : 1;
    }

    static Rational from128(__int128 n, __int128 d) {
        if (d == 0) throw validation_error("ZeroDenominator", "rational with zero denominator");
        if (d < 0) { n = -n; d = -d; }
        const __int128 g = gcd128(n < 0 ? -n : n, d);
        if (g != 0) { n /= g; d /= g; }
        if (n > INT64_MAX || n < INT64_MIN || d > INT64_MAX)
            throw numerical_error("RationalOverflow", "rational exceeds 64-bit range");
        Rational r;
        r.num_ = static_cast<long long>(n);
        r.den_ = static_cast<long long>(d);
        return r;
    }

    static __int128 gcd128(__int128 a, __int128 b) {
        while (b != 0) {
            const __int128 t = a % b;
            a = b;
            b = t;
        }
        return a < 0 ? -a : a;
    }

    long long num_;
    long long den_;
};

}  // namespace cs_spectra
