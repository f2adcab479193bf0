#pragma once

#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cs_spectra/errors.hpp"

namespace cs_spectra {

// c1*t + c0 + sum_w (a_w cos(wt) + b_w sin(wt)), integer frequencies w >= 1.
class TrigPoly {
  public:
    TrigPoly() = default;
    TrigPoly(double linear, double constant) : c1_(linear), c0_(constant) {}

    void add_harmonic(long long freq, double cos_coeff, double sin_coeff) {
        if (freq < 0) throw validation_error("BadCurve", "harmonic frequency must be nonnegative",
                                             {{"freq", std::to_string(freq)}});
        if (freq == 0) {
            c0_ += cos_coeff;  // cos(0)=1; the sine part of a zero frequency vanishes
            return;
        }
        auto& [a, b] = harmonics_[freq];
        a += cos_coeff;
        b += sin_coeff;
    }

    double linear() const { return c1_; }
    double constant() const { return c0_; }
    const std::map<long long, std::pair<double, double>>& harmonics() const { return harmonics_; }

    double operator()(double t) const {
        double v = c1_ * t + c0_;
        for (const auto& [w, ab] : harmonics_) {
            const double wt = static_cast<double>(w) * t;
            v += ab.first * std::cos(wt) + ab.second * std::sin(wt);
        }
        return v;
    }

    TrigPoly derivative() const {
        TrigPoly d(0.0, c1_);
        for (const auto& [w, ab] : harmonics_) {
            const double wd = static_cast<double>(w);
            d.add_harmonic(w, ab.second * wd, -ab.first * wd);
        }
        return d;
    }

    friend TrigPoly operator*(double s, const TrigPoly& p) {
        TrigPoly r(s * p.c1_, s * p.c0_);
        for (const auto& [w, ab] : p.harmonics_) r.add_harmonic(w, s * ab.first, s * ab.second);
        return r;
    }
    friend TrigPoly operator+(const TrigPoly& p, const TrigPoly& q) {
        TrigPoly r(p.c1_ + q.c1_, p.c0_ + q.c0_);
        for (const auto& [w, ab] : p.harmonics_) r.add_harmonic(w, ab.first, ab.second);
        for (const auto& [w, ab] : q.harmonics_) r.add_harmonic(w, ab.first, ab.second);
        return r;
    }
    friend TrigPoly operator-(const TrigPoly& p, const TrigPoly& q) { return p + (-1.0 * q); }

  private:
    double c1_ = 0.0;  // coefficient of t
    double c0_ = 0.0;
    std::map<long long, std::pair<double, double>> harmonics_;
};

// c0 + c1*t + c2*t^2 + sum_w (a_w cos + b_w sin)(wt) + sum_w t*(c_w cos + d_w sin)(wt).
// Closed under one antiderivative as long as no t^2 term is present on input.
class SecularTrigPoly {
  public:
    double c0 = 0.0, c1 = 0.0, c2 = 0.0;
    std::map<long long, std::pair<double, double>> harmonics;  // (cos, sin)
    std::map<long long, std::pair<double, double>> secular;    // t * (cos, sin)

    void add_harmonic(long long w, double ca, double sb) {
        if (w == 0) { c0 += ca; return; }
        auto& [a, b] = harmonics[w];
        a += ca;
        b += sb;
    }
    void add_secular(long long w, double cc, double sd) {
        if (w == 0) { c1 += cc; return; }
        auto& [c, d] = secular[w];
        c += cc;
        d += sd;
    }

    double operator()(double t) const {
        double v = c0 + c1 * t + c2 * t * t;
        for (const auto& [w, ab] : harmonics) {
            const double wt = static_cast<double>(w) * t;
            v += ab.first * std::cos(wt) + ab.second * std::sin(wt);
        }
        for (const auto& [w, cd] : secular) {
            const double wt = static_cast<double>(w) * t;
            v += t * (cd.first * std::cos(wt) + cd.second * std::sin(wt));
        }
        return v;
    }

    // An antiderivative with F(0) arbitrary (callers difference two evaluations):
    //   int t cos(wt) = t sin(wt)/w + cos(wt)/w^2,  int t sin(wt) = -t cos(wt)/w + sin(wt)/w^2.
    SecularTrigPoly antiderivative() const {
        if (c2 != 0.0) throw numerical_error("NotIntegrable", "t^2 term has no representable antiderivative here");
        SecularTrigPoly F;
        F.c1 = c0;
        F.c2 = c1 / 2.0;
        for (const auto& [w, ab] : harmonics) {
            const double wd = static_cast<double>(w);
            F.add_harmonic(w, -ab.second / wd, ab.first / wd);
        }
        for (const auto& [w, cd] : secular) {
            const double wd = static_cast<double>(w);
            F.add_secular(w, -cd.second / wd, cd.first / wd);
            F.add_harmonic(w, cd.first / (wd * wd), cd.second / (wd * wd));
        }
        return F;
    }
};

// x*y' - y*x' for trig-polynomial x, y, expanded symbolically. The t^2-looking
// cross terms c_x*c_y*t cancel identically, so the result needs no t^2 slot:
//   x y' - y x' = t*(c_x P_y' - c_y P_x') + (c_y P_x - c_x P_y) + (P_x P_y' - P_y P_x')
// with P the bounded (harmonic + constant) parts. Products of harmonics expand
// by the product-to-sum identities into harmonics at |w1 +- w2|.
inline SecularTrigPoly wronskian(const TrigPoly& x, const TrigPoly& y) {
    const TrigPoly xp = x.derivative(), yp = y.derivative();
    SecularTrigPoly out;

    // Bounded parts: P = const + harmonics; P' = harmonics of the derivative
    // (its constant term is the linear coefficient of the original, excluded here).
    auto bounded_const = [](const TrigPoly& p) { return p.constant(); };

    // t * (c_x * P_y'_bounded - c_y * P_x'_bounded); P' bounded part = derivative harmonics.
    for (const auto& [w, ab] : yp.harmonics()) out.add_secular(w, x.linear() * ab.first, x.linear() * ab.second);
    for (const auto& [w, ab] : xp.harmonics()) out.add_secular(w, -y.linear() * ab.first, -y.linear() * ab.second);

    // c_y * P_x - c_x * P_y (constants and harmonics).
    out.c0 += y.linear() * bounded_const(x) - x.linear() * bounded_const(y);
    for (const auto& [w, ab] : x.harmonics()) out.add_harmonic(w, y.linear() * ab.first, y.linear() * ab.second);
    for (const auto& [w, ab] : y.harmonics()) out.add_harmonic(w, -x.linear() * ab.first, -x.linear() * ab.second);

    // P_x * P_y' - P_y * P_x' where each factor is const + harmonics.
    auto accumulate_product = [&out](const TrigPoly& p, const TrigPoly& dq, double sign) {
        // p.const * dq.harmonics
        for (const auto& [w, ab] : dq.harmonics()) {
            out.add_harmonic(w, sign * p.constant() * ab.first, sign * p.constant() * ab.second);
        }
        // dq has no constant part here (bounded part of a derivative); p.harmonics * dq.harmonics:
        // cos(u)cos(v) = (cos(u-v)+cos(u+v))/2, sin(u)sin(v) = (cos(u-v)-cos(u+v))/2,
        // sin(u)cos(v) = (sin(u-v)+sin(u+v))/2, cos(u)sin(v) = (sin(u+v)-sin(u-v))/2.
        for (const auto& [w1, ab1] : p.harmonics()) {
            for (const auto& [w2, ab2] : dq.harmonics()) {
                const double a1 = ab1.first, b1 = ab1.second;
                const double a2 = ab2.first, b2 = ab2.second;
                const long long wm = w1 - w2, wp = w1 + w2;
                // cos(w1 t)cos(w2 t), sin sin, sin cos, cos sin contributions:
                // a1*a2: 0.5 cos(wm) + 0.5 cos(wp)
                // b1*b2: 0.5 cos(wm) - 0.5 cos(wp)
                // b1*a2: 0.5 sin(wm) + 0.5 sin(wp)     [sin(u)cos(v)]
                // a1*b2: -0.5 sin(wm) + 0.5 sin(wp)    [cos(u)sin(v)]
                double cos_m = 0.5 * (a1 * a2 + b1 * b2);
                double sin_m = 0.5 * (b1 * a2 - a1 * b2);
                const double cos_p = 0.5 * (a1 * a2 - b1 * b2);
                const double sin_p = 0.5 * (b1 * a2 + a1 * b2);
                if (wm < 0) sin_m = -sin_m;  // cos even, sin odd in the frequency
                out.add_harmonic(wm < 0 ? -wm : wm, sign * cos_m, sign * sin_m);
                out.add_harmonic(wp, sign * cos_p, sign * sin_p);
            }
        }
    };
    accumulate_product(x, yp, 1.0);
    accumulate_product(y, xp, -1.0);
    return out;
}

}  // namespace cs_spectra
