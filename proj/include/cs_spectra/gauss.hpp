#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <string>

#include "cs_spectra/errors.hpp"
#include "cs_spectra/kahan.hpp"
#include "cs_spectra/numtheory.hpp"
#include "cs_spectra/parallel.hpp"

namespace cs_spectra {

// Phase scale of a quadratic exponential sum: exp(i * scale * l * k^2).
enum class GaussScale { two_pi_over_p, pi_over_2p };

// Sum_{k=0}^{p-1} exp(i * scale * l * k^2), computed with the phase reduced
// exactly in integer arithmetic: both scales are 2*pi/M for M = p or M = 4p,
// so each term is exp(2*pi*i * (l*k^2 mod M) / M). Compensated summation,
// fixed chunking so the result does not depend on the thread count.
inline std::complex<double> gauss_sum_bruteforce(long long ell, long long p, GaussScale scale) {
    if (p < 1) {
        throw validation_error("BadModulus", "gauss_sum_bruteforce requires p >= 1",
                               {{"p", std::to_string(p)}});
    }
    const std::uint64_t M = static_cast<std::uint64_t>(scale == GaussScale::two_pi_over_p ? p : 4 * p);
    const std::uint64_t lred = static_cast<std::uint64_t>(((ell % static_cast<long long>(M)) +
                                                           static_cast<long long>(M)) %
                                                          static_cast<long long>(M));
    const double step = 2.0 * std::numbers::pi / static_cast<double>(M);

    constexpr std::size_t kChunk = std::size_t{1} << 14;
    auto partials = map_chunks<std::complex<double>>(
        static_cast<std::size_t>(p), kChunk, [&](std::size_t begin, std::size_t end) {
            KahanComplex acc;
            for (std::size_t k = begin; k < end; ++k) {
                const std::uint64_t kk = mulmod_u64(k, k, M);
                const std::uint64_t red = mulmod_u64(lred, kk, M);
                const double angle = step * static_cast<double>(red);
                acc.add({std::cos(angle), std::sin(angle)});
            }
            return acc.value();
        });

    KahanComplex total;
    for (const auto& part : partials) total.add(part);
    return total.value();
}

// (1/p) * Sum_k exp(2*pi*i*l*k^2/p) for odd prime p, in closed form:
// exactly 1 when p | l, else (l|p) * eps_p / sqrt(p). The classical
// evaluation keeps the eps_p phase; only its modulus is 1/sqrt(p).
inline std::complex<double> gauss_moment_closed_form(long long ell, long long p) {
    if (p < 3 || p % 2 == 0 || !is_prime_u64(static_cast<std::uint64_t>(p))) {
        throw validation_error("NotOddPrime", "gauss_moment_closed_form requires an odd prime",
                               {{"p", std::to_string(p)}});
    }
    if (ell % p == 0) return {1.0, 0.0};
    const double chi = static_cast<double>(legendre_symbol(ell, p));
    return chi / std::sqrt(static_cast<double>(p)) * epsilon_factor(p);
}

// p as a product of three distinct odd primes, or BadShape.
inline std::array<long long, 3> three_distinct_odd_prime_factors(long long p) {
    const auto bad = [&](const char* what) {
        return validation_error("BadShape", what, {{"p", std::to_string(p)}});
    };
    if (p < 3 || p % 2 == 0) throw bad("p must be an odd product of three distinct primes");
    std::array<long long, 3> out{};
    int found = 0;
    long long rest = p;
    for (long long d = 3; d * d <= rest; d += 2) {
        if (rest % d != 0) continue;
        if (found == 3) throw bad("p has more than three prime factors");
        out[found++] = d;
        rest /= d;
        if (rest % d == 0) throw bad("p is not squarefree");
    }
    if (rest > 1) {
        if (found == 3) throw bad("p has more than three prime factors");
        out[found++] = rest;
    }
    if (found != 3) throw bad("p must have exactly three distinct prime factors");
    return out;
}

// Three-case closed form for (1/p) * Sum_{n=0}^{p-1} exp(i*pi*l*n^2/(2p)),
// p a product of three distinct odd primes, gcd(l,p) = 1:
//   l = 0 mod 4:  eps_p * (l/4 | p) / sqrt(p)          (exact at every such p)
//   l = 2 mod 4:  0                                     (limit; finite-p value is O(1/p))
//   l odd:        (1+i) * (p | l) / (2*sqrt(p)*eps_l)   (limit; finite-p value is O(1/p) away)
inline std::complex<double> brieskorn_moment_closed_form(long long ell, long long p) {
    three_distinct_odd_prime_factors(p);
    if (ell <= 0) {
        throw validation_error("BadArgument", "brieskorn_moment_closed_form requires ell > 0",
                               {{"ell", std::to_string(ell)}});
    }
    if (std::gcd(ell, p) != 1) {
        throw validation_error("NotCoprime", "brieskorn_moment_closed_form requires gcd(ell,p) = 1",
                               {{"ell", std::to_string(ell)}, {"p", std::to_string(p)}});
    }
    const double rp = std::sqrt(static_cast<double>(p));
    if (ell % 4 == 0) {
        return epsilon_factor(p) * (static_cast<double>(jacobi_symbol(ell / 4, p)) / rp);
    }
    if (ell % 4 == 2) return {0.0, 0.0};
    const std::complex<double> one_plus_i{1.0, 1.0};
    return one_plus_i * (static_cast<double>(jacobi_symbol(p, ell)) / (2.0 * rp)) / epsilon_factor(ell);
}

}  // namespace cs_spectra
