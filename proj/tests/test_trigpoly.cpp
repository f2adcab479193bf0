#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "cs_spectra/quadrature.hpp"
#include "cs_spectra/trigpoly.hpp"

using namespace cs_spectra;

namespace {

TrigPoly random_poly(std::mt19937_64& rng, int max_freq) {
    std::uniform_real_distribution<double> coeff(-2.0, 2.0);
    TrigPoly p(coeff(rng), coeff(rng));
    for (long long w = 1; w <= max_freq; ++w) p.add_harmonic(w, coeff(rng), coeff(rng));
    return p;
}

}  // namespace

TEST_CASE("trig poly evaluation and arithmetic") {
    TrigPoly p(0.5, 1.0);
    p.add_harmonic(2, 0.25, -0.75);
    p.add_harmonic(0, 0.5, 123.0);  // sine of frequency zero is dropped
    REQUIRE(p.constant() == 1.5);
    for (double t : {0.0, 0.4, -1.3, 7.9}) {
        REQUIRE(p(t) == Catch::Approx(0.5 * t + 1.5 + 0.25 * std::cos(2 * t) - 0.75 * std::sin(2 * t)).margin(1e-15));
    }
    REQUIRE_THROWS_AS(p.add_harmonic(-1, 1.0, 0.0), validation_error);

    std::mt19937_64 rng(53);
    const TrigPoly a = random_poly(rng, 3), b = random_poly(rng, 4);
    for (double t : {0.1, 1.7, -2.9}) {
        REQUIRE((a + b)(t) == Catch::Approx(a(t) + b(t)).margin(1e-13));
        REQUIRE((a - b)(t) == Catch::Approx(a(t) - b(t)).margin(1e-13));
        REQUIRE((3.5 * a)(t) == Catch::Approx(3.5 * a(t)).margin(1e-13));
    }
}

TEST_CASE("trig poly derivative vs central differences") {
    std::mt19937_64 rng(59);
    const TrigPoly p = random_poly(rng, 5);
    const TrigPoly dp = p.derivative();
    const double h = 1e-6;
    for (double t = -3.0; t <= 3.0; t += 0.37) {
        const double fd = (p(t + h) - p(t - h)) / (2.0 * h);
        REQUIRE(dp(t) == Catch::Approx(fd).margin(1e-7));
    }
    // second derivative of sin(3t) closes back on itself
    TrigPoly s;
    s.add_harmonic(3, 0.0, 1.0);
    const TrigPoly s2 = s.derivative().derivative();
    for (double t : {0.2, 1.1, 4.4}) REQUIRE(s2(t) == Catch::Approx(-9.0 * s(t)).margin(1e-12));
}

TEST_CASE("secular antiderivative") {
    SecularTrigPoly f;
    f.c0 = 0.7;
    f.c1 = -0.3;
    f.add_harmonic(1, 0.4, -1.1);
    f.add_harmonic(3, -0.2, 0.6);
    f.add_secular(2, 0.9, 0.5);

    const SecularTrigPoly F = f.antiderivative();
    // F' = f, checked by central differences
    const double h = 1e-6;
    for (double t = -2.0; t <= 4.0; t += 0.31) {
        const double fd = (F(t + h) - F(t - h)) / (2.0 * h);
        REQUIRE(fd == Catch::Approx(f(t)).margin(1e-6));
    }
    // and F(b) - F(a) matches plain quadrature of f
    for (double b : {1.0, 2.5}) {
        const double q = adaptive_simpson([&](double t) { return f(t); }, 0.0, b, 1e-13);
        REQUIRE(F(b) - F(0.0) == Catch::Approx(q).margin(1e-10));
    }
    // a t^2 term appears after one pass and blocks a second one
    REQUIRE(F.c2 == Catch::Approx(-0.15));
    REQUIRE_THROWS_AS(F.antiderivative(), numerical_error);
}

TEST_CASE("wronskian expands symbolically") {
    // circle: x = cos t, y = sin t has x y' - y x' = 1
    TrigPoly x, y;
    x.add_harmonic(1, 1.0, 0.0);
    y.add_harmonic(1, 0.0, 1.0);
    const SecularTrigPoly w = wronskian(x, y);
    for (double t = 0.0; t < 7.0; t += 0.17) REQUIRE(w(t) == Catch::Approx(1.0).margin(1e-14));

    std::mt19937_64 rng(61);
    for (int trial = 0; trial < 10; ++trial) {
        const TrigPoly a = random_poly(rng, 4), b = random_poly(rng, 3);
        const SecularTrigPoly wab = wronskian(a, b);
        const TrigPoly da = a.derivative(), db = b.derivative();
        for (double t = -3.0; t <= 3.0; t += 0.41) {
            REQUIRE(wab(t) == Catch::Approx(a(t) * db(t) - b(t) * da(t)).margin(1e-11));
        }
        // antisymmetry
        const SecularTrigPoly wba = wronskian(b, a);
        for (double t : {0.3, 2.2}) REQUIRE(wba(t) == Catch::Approx(-wab(t)).margin(1e-11));
    }
}

TEST_CASE("adaptive simpson on smooth integrands") {
    REQUIRE(adaptive_simpson([](double t) { return std::sin(t); }, 0.0, std::numbers::pi, 1e-12) ==
            Catch::Approx(2.0).margin(1e-11));
    REQUIRE(adaptive_simpson([](double t) { return t * t; }, -1.0, 2.0, 1e-12) ==
            Catch::Approx(3.0).margin(1e-11));
    REQUIRE(adaptive_simpson([](double) { return 1.0; }, 1.0, 1.0, 1e-12) == 0.0);
    const auto z = adaptive_simpson_complex(
        [](double t) { return std::complex<double>{std::cos(t), std::sin(t)}; }, 0.0, 1.0, 1e-12);
    REQUIRE(std::abs(z - std::complex<double>{std::sin(1.0), 1.0 - std::cos(1.0)}) < 1e-11);
}

TEST_CASE("seven point gauss rule") {
    // exact through degree 13
    for (int deg : {0, 3, 7, 13}) {
        const double got = gauss_legendre7([&](double t) { return std::pow(t, deg); }, -0.7, 1.3);
        const double want = (std::pow(1.3, deg + 1) - std::pow(-0.7, deg + 1)) / (deg + 1);
        REQUIRE(got == Catch::Approx(want).margin(1e-13));
    }
    REQUIRE(std::abs(gauss_legendre7([](double t) { return std::pow(t, 14); }, -1.0, 1.0) -
                     2.0 / 15.0) > 1e-6);  // degree 14 is genuinely beyond the rule
    // short panels resolve one oscillation to near machine accuracy
    double acc = 0.0;
    const int panels = 16;
    const double period = 2.0 * std::numbers::pi;
    for (int i = 0; i < panels; ++i) {
        acc += gauss_legendre7([](double t) { return std::sin(t) * std::sin(t); },
                               period * i / panels, period * (i + 1) / panels);
    }
    REQUIRE(acc == Catch::Approx(std::numbers::pi).margin(1e-13));
}
