#pragma once

#include <complex>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>

#include "cs_spectra/errors.hpp"

namespace cs_spectra {

inline std::uint64_t mulmod_u64(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

inline std::uint64_t powmod_u64(std::uint64_t base, std::uint64_t exp, std::uint64_t m) {
    if (m == 1) return 0;
    std::uint64_t acc = 1;
    base %= m;
    while (exp > 0) {
        if (exp & 1) acc = mulmod_u64(acc, base, m);
        base = mulmod_u64(base, base, m);
        exp >>= 1;
    }
    return acc;
}

// Deterministic Miller-Rabin, valid for all n < 2^64 with this witness set.
inline bool is_prime_u64(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (n % p == 0) return n == p;
    }
    std::uint64_t d = n - 1;
    int r = 0;
    while ((d & 1) == 0) { d >>= 1; ++r; }
    for (std::uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        std::uint64_t x = powmod_u64(a % n, d, n);
        if (x == 0 || x == 1 || x == n - 1) continue;
        bool witness = true;
        for (int i = 1; i < r; ++i) {
            x = mulmod_u64(x, x, n);
            if (x == n - 1) { witness = false; break; }
        }
        if (witness) return false;
    }
    return true;
}

// Extended gcd: returns (g, x, y) with a*x + b*y = g = gcd(a,b).
inline std::tuple<long long, long long, long long> extended_gcd(long long a, long long b) {
    long long old_r = a, r = b;
    long long old_x = 1, x = 0;
    long long old_y = 0, y = 1;
    while (r != 0) {
        const long long q = old_r / r;
        old_r -= q * r; std::swap(old_r, r);
        old_x -= q * x; std::swap(old_x, x);
        old_y -= q * y; std::swap(old_y, y);
    }
    if (old_r < 0) { old_r = -old_r; old_x = -old_x; old_y = -old_y; }
    return {old_r, old_x, old_y};
}

// The Bezout complement (r, s) of a coprime pair (p, q): p*s - r*q = 1, so
// [[p, r], [q, s]] has determinant 1. Canonical representative: 0 <= r < |p|
// when p != 0; for p = 0 (q = +-1) the unique matrix shape [[0, -q], [q, 0]],
// i.e. r = -q, s = 0.
inline std::pair<long long, long long> bezout_complement(long long p, long long q) {
    if (std::gcd(p, q) != 1) {
        throw validation_error("NotCoprime", "bezout_complement requires gcd(p,q) = 1",
                               {{"p", std::to_string(p)}, {"q", std::to_string(q)}});
    }
    if (p == 0) return {-q, 0};
    auto [g, x, y] = extended_gcd(p, q);
    (void)g;
    // p*x + q*y = 1  =>  s = x, r = -y satisfies p*s - r*q = 1.
    long long s = x, r = -y;
    // Shift family (r, s) -> (r + p*t, s + q*t) keeps the identity; normalize r.
    const long long ap = p < 0 ? -p : p;
    long long t = r / p;
    r -= t * p;
    s -= t * q;
    if (r < 0) {
        const long long step = p > 0 ? 1 : -1;  // adding p*step increases r by |p|
        r += step * p;
        s += step * q;
    }
    (void)ap;
    return {r, s};
}

// Residue class of an integer: 0 <= value < modulus.
struct Residue {
    long long value = 0;
    long long modulus = 1;

    Residue() = default;
    Residue(long long v, long long m) {
        if (m <= 0) throw validation_error("BadModulus", "modulus must be positive",
                                           {{"m", std::to_string(m)}});
        modulus = m;
        value = ((v % m) + m) % m;
    }
    friend bool operator==(const Residue&, const Residue&) = default;
};

inline Residue mod_inverse(long long a, long long m) {
    if (m <= 0) throw validation_error("NotInvertible", "modulus must be positive",
                                       {{"m", std::to_string(m)}});
    auto [g, x, y] = extended_gcd(((a % m) + m) % m, m);
    (void)y;
    if (g != 1) {
        throw validation_error("NotInvertible", "argument not invertible modulo m",
                               {{"a", std::to_string(a)}, {"m", std::to_string(m)}});
    }
    return Residue(x, m);
}

inline int legendre_symbol(long long a, long long p) {
    if (p < 3 || p % 2 == 0 || !is_prime_u64(static_cast<std::uint64_t>(p))) {
        throw validation_error("NotOddPrime", "legendre_symbol requires an odd prime modulus",
                               {{"p", std::to_string(p)}});
    }
    const long long r = ((a % p) + p) % p;
    if (r == 0) return 0;
    // Euler's criterion.
    const std::uint64_t e = powmod_u64(static_cast<std::uint64_t>(r),
                                       static_cast<std::uint64_t>((p - 1) / 2),
                                       static_cast<std::uint64_t>(p));
    return e == 1 ? 1 : -1;
}

// Jacobi symbol (a|n) for odd n > 0; multiplicative extension of Legendre.
inline int jacobi_symbol(long long a, long long n) {
    if (n <= 0 || n % 2 == 0) {
        throw validation_error("NotOddModulus", "jacobi_symbol requires odd positive n",
                               {{"n", std::to_string(n)}});
    }
    a = ((a % n) + n) % n;
    int t = 1;
    while (a != 0) {
        while (a % 2 == 0) {
            a /= 2;
            const long long r = n % 8;
            if (r == 3 || r == 5) t = -t;
        }
        std::swap(a, n);
        if (a % 4 == 3 && n % 4 == 3) t = -t;
        a %= n;
    }
    return n == 1 ? t : 0;
}

// epsilon_n = 1 for n = 1 mod 4, i for n = 3 mod 4; undefined for even n.
inline std::complex<double> epsilon_factor(long long n) {
    const long long r = ((n % 4) + 4) % 4;
    if (r == 1) return {1.0, 0.0};
    if (r == 3) return {0.0, 1.0};
    throw validation_error("EpsilonUndefined", "epsilon factor requires an odd argument",
                           {{"n", std::to_string(n)}});
}

}  // namespace cs_spectra
