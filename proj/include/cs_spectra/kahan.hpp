#pragma once

#include <complex>

namespace cs_spectra {

// Kahan compensated accumulator. Brute-force Gauss sums add up to ~1e6
// unit-modulus terms; plain summation would cost ~1e-10 of absolute accuracy,
// right at the test tolerances.
struct KahanSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double x) {
        const double y = x - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    double value() const { return sum; }
};

struct KahanComplex {
    KahanSum re;
    KahanSum im;

    void add(const std::complex<double>& z) {
        re.add(z.real());
        im.add(z.imag());
    }
    void add(double x, double y) {
        re.add(x);
        im.add(y);
    }
    std::complex<double> value() const { return {re.value(), im.value()}; }
};

}  // namespace cs_spectra
