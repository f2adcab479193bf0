#pragma once

#include <cmath>
#include <complex>

namespace cs_spectra {

namespace detail {

inline double simpson_slice(double a, double fa, double b, double fb, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

template <class F>
double adaptive_simpson_rec(F&& f, double a, double fa, double b, double fb, double m, double fm,
                            double whole, double tol, int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson_slice(a, fa, m, fm, flm);
    const double right = simpson_slice(m, fm, b, fb, frm);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

// Adaptive Simpson integration of a real function, absolute tolerance tol.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol, int max_depth = 48) {
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    const double whole = detail::simpson_slice(a, fa, b, fb, fm);
    return detail::adaptive_simpson_rec(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

template <class F>
std::complex<double> adaptive_simpson_complex(F&& f, double a, double b, double tol,
                                              int max_depth = 48) {
    const double re = adaptive_simpson([&](double t) { return f(t).real(); }, a, b, tol, max_depth);
    const double im = adaptive_simpson([&](double t) { return f(t).imag(); }, a, b, tol, max_depth);
    return {re, im};
}

// Fixed 7-point Gauss-Legendre rule on [a, b] (exact through degree 13).
// The workhorse for oscillatory modes once the caller has split the interval
// into panels short against the local wavelength; no adaptivity, so the cost
// and the result are both fully deterministic.
template <class F>
auto gauss_legendre7(F&& f, double a, double b) -> decltype(f(a)) {
    constexpr double xs[7] = {-0.9491079123427585, -0.7415311855993945, -0.4058451513773972,
                              0.0,
                              0.4058451513773972, 0.7415311855993945, 0.9491079123427585};
    constexpr double ws[7] = {0.1294849661688697, 0.2797053914892767, 0.3818300505051189,
                              0.4179591836734694,
                              0.3818300505051189, 0.2797053914892767, 0.1294849661688697};
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    auto acc = f(mid + half * xs[0]) * (ws[0] * half);
    for (int i = 1; i < 7; ++i) acc += f(mid + half * xs[i]) * (ws[i] * half);
    return acc;
}

}  // namespace cs_spectra
