#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "cs_spectra/circle_measure.hpp"
#include "cs_spectra/errors.hpp"
#include "cs_spectra/kahan.hpp"
#include "cs_spectra/numtheory.hpp"
#include "cs_spectra/parallel.hpp"
#include "cs_spectra/prequantum.hpp"
#include "cs_spectra/quadrature.hpp"
#include "cs_spectra/serialize.hpp"
#include "cs_spectra/trigpoly.hpp"

namespace cs_spectra {

namespace detail {

// Interior zeros of a trig polynomial on [a, b]: sign-change scan on a uniform
// grid, bisection to machine width; samples landing exactly on zero count as
// zeros directly. Sorted and deduped to 1e-12.
inline std::vector<double> poly_zeros(const TrigPoly& h, double a, double b, long long grid) {
    std::vector<double> zeros;
    const double cell = (b - a) / static_cast<double>(grid);
    double t0 = a, h0 = h(t0);
    for (long long i = 0; i < grid; ++i) {
        const double t1 = i + 1 == grid ? b : a + cell * static_cast<double>(i + 1);
        const double h1 = h(t1);
        if (h0 == 0.0) {
            if (t0 > a) zeros.push_back(t0);
        } else if (h1 != 0.0 && (h0 < 0.0) != (h1 < 0.0)) {
            double ta = t0, tb = t1, ha = h0;
            for (int it = 0; it < 80 && tb - ta > 1e-16 * (1.0 + std::abs(ta)); ++it) {
                const double tm = 0.5 * (ta + tb);
                const double hm = h(tm);
                if ((ha < 0.0) == (hm < 0.0)) {
                    ta = tm;
                    ha = hm;
                } else {
                    tb = tm;
                }
            }
            zeros.push_back(0.5 * (ta + tb));
        }
        t0 = t1;
        h0 = h1;
    }
    std::sort(zeros.begin(), zeros.end());
    std::vector<double> dedup;
    for (double z : zeros) {
        if (!dedup.empty() && z - dedup.back() < 1e-12) continue;
        if (z <= a || z >= b) continue;
        dedup.push_back(z);
    }
    return dedup;
}

}  // namespace detail

// ---- Poisson summation check ------------------------------------------------

struct PoissonResult {
    double lhs = 0.0;
    std::complex<double> rhs;
    double gap = 0.0;
};

// Both sides of sum_{f(t) in 2piZ} g(t) = (1/2pi) sum_k int_a^b e^{-ikf} |f'| g,
// the k-sum truncated at |k| <= K. The left side resolves the lattice hits by
// root solving; the right side integrates each mode adaptively. The gap decays
// in K with no fixed rate, so it is reported, not asserted, by callers.
inline PoissonResult poisson_check(const TrigPoly& f, const TrigPoly& g, double a, double b,
                                   long long K, long long grid = 1LL << 14) {
    if (!(a < b)) {
        throw validation_error("BadArgument", "interval must satisfy a < b",
                               {{"a", format_double(a)}, {"b", format_double(b)}});
    }
    if (K < 0) {
        throw validation_error("BadArgument", "truncation order must be nonnegative",
                               {{"K", std::to_string(K)}});
    }
    if (grid < min_intersect_grid) {
        throw validation_error("BadArgument", "bracketing grid must have at least 2^10 cells",
                               {{"grid", std::to_string(grid)}});
    }
    const TrigPoly fp = f.derivative();

    // The root count is only trustworthy when f is piecewise strictly monotone.
    // A run of vanishing f' samples means a plateau the sign-change scan cannot
    // segment; a plateau sitting on the lattice would hide a continuum of hits.
    {
        int run = 0;
        for (long long i = 0; i <= grid; ++i) {
            const double t = a + (b - a) * static_cast<double>(i) / static_cast<double>(grid);
            if (std::abs(fp(t)) < 1e-10) {
                if (++run >= 16) {
                    throw numerical_error("NonMonotonicUndetected",
                                          "f' vanishes on a sampling plateau; monotone segments "
                                          "cannot be detected",
                                          {{"t", format_double(t)}});
                }
            } else {
                run = 0;
            }
        }
    }

    const auto lattice_distance = [](double v) {
        return std::abs(v - two_pi * std::round(v / two_pi));
    };
    for (double endpoint : {a, b}) {
        if (lattice_distance(f(endpoint)) < 1e-10) {
            throw numerical_error("EndpointHit", "f lies on the lattice at an interval endpoint",
                                  {{"t", format_double(endpoint)},
                                   {"f", format_double(f(endpoint))}});
        }
    }

    // A critical value on the lattice is a tangential touch: f meets the level
    // without a sign change, so the bracketing scan cannot see the hit and the
    // root count comes out silently wrong.
    const auto fp_zeros = detail::poly_zeros(fp, a, b, grid);
    for (double z : fp_zeros) {
        if (lattice_distance(f(z)) < 1e-9) {
            throw numerical_error("NonMonotonicUndetected",
                                  "critical value of f lies on the lattice",
                                  {{"t", format_double(z)}, {"f", format_double(f(z))}});
        }
    }

    const auto roots = detail::level_roots(f, fp, a, b, grid, two_pi);
    KahanSum lhs;
    for (const Intersection& r : roots) {
        if (std::abs(fp(r.t)) < 1e-8) {
            throw numerical_error("NonMonotonicUndetected",
                                  "tangential lattice hit: |f'| below threshold at a root",
                                  {{"t", format_double(r.t)}, {"fprime", format_double(fp(r.t))}});
        }
        lhs.add(g(r.t));
    }

    // The mode integrand oscillates like e^{-ik f}. Split at the zeros of f'
    // so |f'| is analytic inside each piece, then cover each piece with fixed
    // Gauss-Legendre panels short against the local wavelength: at most a
    // quarter turn of phase |k| * max|f'| * panel length per panel, which the
    // 7-point rule resolves to full precision.
    double max_fp = 0.0;
    for (long long i = 0; i <= grid; ++i) {
        const double t = a + (b - a) * static_cast<double>(i) / static_cast<double>(grid);
        max_fp = std::max(max_fp, std::abs(fp(t)));
    }
    std::vector<double> cuts;
    cuts.push_back(a);
    for (double z : fp_zeros) cuts.push_back(z);
    cuts.push_back(b);

    const std::size_t modes = static_cast<std::size_t>(2 * K + 1);
    auto terms = map_chunks<std::complex<double>>(modes, 1, [&](std::size_t begin, std::size_t) {
        const double k = static_cast<double>(static_cast<long long>(begin) - K);
        KahanComplex mode;
        for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
            const double sa = cuts[s], sb = cuts[s + 1];
            if (sb - sa < 1e-12) continue;
            const double turns = std::abs(k) * max_fp * (sb - sa) / two_pi;
            const long long panels =
                std::max<long long>(8, 4 * static_cast<long long>(std::ceil(turns)));
            for (long long j = 0; j < panels; ++j) {
                const double pa = sa + (sb - sa) * static_cast<double>(j) / static_cast<double>(panels);
                const double pb = j + 1 == panels
                                      ? sb
                                      : sa + (sb - sa) * static_cast<double>(j + 1) /
                                                 static_cast<double>(panels);
                mode.add(gauss_legendre7(
                    [&](double t) {
                        const double ph = -k * f(t);
                        return std::complex<double>(std::cos(ph), std::sin(ph)) * std::abs(fp(t)) *
                               g(t);
                    },
                    pa, pb));
            }
        }
        return mode.value();
    });
    KahanComplex rhs;
    for (const auto& term : terms) rhs.add(term);
    PoissonResult out;
    out.lhs = lhs.value();
    out.rhs = rhs.value() / two_pi;
    out.gap = std::abs(std::complex<double>(out.lhs, 0.0) - out.rhs);
    return out;
}

// ---- stationary-phase moment predictor --------------------------------------

struct Crossing {
    double t = 0.0;
    long long k = 0;  // unreduced line index: y(t) = pi*k/ell
    std::complex<double> contribution;  // summand before the 1/sqrt(2n) prefactor
};

struct PredictedMoment {
    std::complex<double> value;
    std::vector<Crossing> crossings;
};

// Per-crossing unit from the stationary-phase expansion of the fibre integral:
// e^{i pi/4} from the Fresnel factor (the quadratic form is positive definite
// at every crossing), 1/sqrt(ell) from its Hessian. Calibrated once against
// exact_moment on an n-ladder (tools/calibrate_predictor.cpp keeps the
// experiment); do not fold other factors in here.
inline std::complex<double> predictor_correction(long long ell) {
    return std::polar(1.0 / std::sqrt(static_cast<double>(ell)), std::numbers::pi / 4.0);
}

// e^{-i pi n k^2 / (2 ell)} with the angle reduced exactly: the factor has
// period 4*ell in n*k^2, so reduce in integers first and only then multiply
// by the small float pi/(2 ell).
inline std::complex<double> quadratic_phase_factor(long long n, long long k, long long ell) {
    const std::uint64_t mod = static_cast<std::uint64_t>(4 * ell);
    const std::uint64_t kr = static_cast<std::uint64_t>(((k % (4 * ell)) + 4 * ell) % (4 * ell));
    const std::uint64_t nr = static_cast<std::uint64_t>(n % (4 * ell));
    const std::uint64_t m = mulmod_u64(nr, mulmod_u64(kr, kr, mod), mod);
    const double angle = -std::numbers::pi * static_cast<double>(m) / (2.0 * static_cast<double>(ell));
    return {std::cos(angle), std::sin(angle)};
}

inline constexpr long long predictor_grid = 1LL << 14;

// Leading term of the n-th moment: (1/sqrt(2n)) * sum over crossings of the
// lines y = pi*k/ell of e^{-i pi n k^2/(2 ell)} e^{i bs_phase} * correction.
// Horizontal-tangent points off the lines contribute at the next order and are
// dropped; a tangency on a line breaks the expansion's hypothesis and throws.
inline PredictedMoment predicted_moment(const LegendrianCurve& c, long long n, long long ell) {
    if (n < 1) {
        throw validation_error("BadArgument", "filling index n must be positive",
                               {{"n", std::to_string(n)}});
    }
    if (ell < 1) {
        throw validation_error("BadArgument", "moment order must be positive",
                               {{"ell", std::to_string(ell)}});
    }
    const TrigPoly& y = c.y_poly();
    const TrigPoly yp = y.derivative();
    const double spacing = std::numbers::pi / static_cast<double>(ell);
    const auto cuts =
        detail::level_roots(y, yp, c.domain_a(), c.domain_b(), predictor_grid, spacing);

    const std::complex<double> corr = predictor_correction(ell);
    PredictedMoment out;
    out.crossings.reserve(cuts.size());
    KahanComplex acc;
    for (const Intersection& r : cuts) {
        if (std::abs(yp(r.t)) < 1e-8) {
            throw numerical_error("NonTransverseToLine",
                                  "curve is tangent to a line y = pi*k/ell",
                                  {{"t", format_double(r.t)}, {"k", std::to_string(r.m)},
                                   {"yprime", format_double(yp(r.t))}});
        }
        const double phase = bs_phase(c, r.t, BohrSommerfeldSection(r.m, ell));
        const std::complex<double> term =
            quadratic_phase_factor(n, r.m, ell) *
            std::complex<double>(std::cos(phase), std::sin(phase)) * corr;
        acc.add(term);
        out.crossings.push_back({r.t, r.m, term});
    }
    out.value = acc.value() / std::sqrt(2.0 * static_cast<double>(n));
    return out;
}

// Limit of the zeroth moment: (1/2pi) * int_a^b |y'| dt, evaluated exactly as
// the total variation of y — sum of |delta y| over the monotone segments cut
// at the zeros of y'.
inline double predicted_moment_zero(const LegendrianCurve& c) {
    const TrigPoly& y = c.y_poly();
    const TrigPoly yp = y.derivative();
    const double a = c.domain_a(), b = c.domain_b();

    // Extra cuts inside a monotone stretch do not change the variation, so a
    // spurious zero from the scan is harmless.
    std::vector<double> cuts;
    cuts.push_back(a);
    for (double z : detail::poly_zeros(yp, a, b, predictor_grid)) cuts.push_back(z);
    cuts.push_back(b);

    KahanSum variation;
    double prev = cuts.front();
    for (std::size_t i = 1; i < cuts.size(); ++i) {
        if (cuts[i] - prev < 1e-12) continue;
        variation.add(std::abs(y(cuts[i]) - y(prev)));
        prev = cuts[i];
    }
    return variation.value() / two_pi;
}

// ---- Dehn filling families --------------------------------------------------

// Slopes p_n = p*n - r, q_n = q*n - s of the n-th filling. Unimodularity makes
// every pair coprime: (-q)*p_n + p*q_n = -(ps - qr) = -1.
struct DehnFamily {
    long long p = 1, q = 0, r = 0, s = 1;

    DehnFamily(long long p_, long long q_, long long r_, long long s_)
        : p(p_), q(q_), r(r_), s(s_) {
        const __int128 det = static_cast<__int128>(p) * s - static_cast<__int128>(q) * r;
        if (det != 1) {
            throw validation_error("NotUnimodular", "family slopes must satisfy ps - qr = 1",
                                   {{"p", std::to_string(p)}, {"q", std::to_string(q)},
                                    {"r", std::to_string(r)}, {"s", std::to_string(s)}});
        }
    }

    long long slope_p(long long n) const { return p * n - r; }
    long long slope_q(long long n) const { return q * n - s; }

    // Inverse of [[p, r], [q, s]]; sends (slope_p(n), slope_q(n)) to (n, -1),
    // the normalized family the moment formulas are written against.
    Mat2 normalizing() const { return Mat2{s, -r, -q, p}; }
};

// ---- exact vs predicted over an n-ladder ------------------------------------

struct PredictionReport {
    long long n = 0;
    long long ell = 0;
    std::complex<double> exact;
    std::complex<double> predicted;
    double residual = 0.0;  // |exact - predicted|
    std::vector<Crossing> crossing_data;
};

inline std::vector<PredictionReport> theorem_main_run(const LegendrianCurve& c,
                                                      const DehnFamily& fam, long long ell,
                                                      const std::vector<long long>& n_ladder) {
    if (ell < 0) {
        throw validation_error("BadArgument", "moment order must be nonnegative",
                               {{"ell", std::to_string(ell)}});
    }
    if (n_ladder.empty()) {
        throw validation_error("BadArgument", "ladder must be nonempty");
    }
    for (long long n : n_ladder) {
        if (n < 1) {
            throw validation_error("BadArgument", "ladder entries must be positive",
                                   {{"n", std::to_string(n)}});
        }
    }
    const LegendrianCurve normalized = sl2_transport_curve(fam.normalizing(), c);
    const double zero_limit = ell == 0 ? predicted_moment_zero(normalized) : 0.0;

    auto rows = map_chunks<PredictionReport>(
        n_ladder.size(), 1, [&](std::size_t begin, std::size_t) {
            const long long n = n_ladder[begin];
            PredictionReport rep;
            rep.n = n;
            rep.ell = ell;
            rep.exact = exact_moment(normalized, n, ell, grid_default(n));
            if (ell == 0) {
                rep.predicted = {zero_limit, 0.0};
            } else {
                PredictedMoment pm = predicted_moment(normalized, n, ell);
                rep.predicted = pm.value;
                rep.crossing_data = std::move(pm.crossings);
            }
            rep.residual = std::abs(rep.exact - rep.predicted);
            return rep;
        });
    return rows;
}

// ---- convergence-rate fit ---------------------------------------------------

inline constexpr double decay_floor = 1e-13;

struct DecayFit {
    double slope = 0.0;
    double r2 = 0.0;
    bool at_floor = false;  // too few residuals above decay_floor to fit
    int points_used = 0;
};

// Least-squares slope of log(residual) against log(n). Residuals at or below
// the numerical floor carry no rate information and are excluded; if fewer
// than four points survive, the run already converged and the fit degenerates
// to an at_floor pass.
inline DecayFit decay_fit(const std::vector<PredictionReport>& reports) {
    if (reports.size() < 4) {
        throw validation_error("BadArgument", "rate fit needs at least four reports",
                               {{"count", std::to_string(reports.size())}});
    }
    {
        std::vector<long long> ns;
        ns.reserve(reports.size());
        for (const auto& r : reports) ns.push_back(r.n);
        std::sort(ns.begin(), ns.end());
        if (std::adjacent_find(ns.begin(), ns.end()) != ns.end()) {
            throw validation_error("BadArgument", "rate fit needs distinct ladder entries");
        }
    }

    std::vector<std::pair<double, double>> pts;
    for (const auto& r : reports) {
        if (r.residual > decay_floor) {
            pts.emplace_back(std::log(static_cast<double>(r.n)), std::log(r.residual));
        }
    }
    DecayFit fit;
    fit.points_used = static_cast<int>(pts.size());
    if (pts.size() < 4) {
        fit.at_floor = true;
        return fit;
    }

    double mx = 0.0, my = 0.0;
    for (const auto& [x, yv] : pts) {
        mx += x;
        my += yv;
    }
    mx /= static_cast<double>(pts.size());
    my /= static_cast<double>(pts.size());
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& [x, yv] : pts) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (yv - my);
        syy += (yv - my) * (yv - my);
    }
    fit.slope = sxy / sxx;
    if (syy == 0.0) {
        fit.r2 = 1.0;
    } else {
        const double ss_res = syy - sxy * sxy / sxx;
        fit.r2 = 1.0 - ss_res / syy;
    }
    return fit;
}

// ---- report files -----------------------------------------------------------

inline std::string reports_to_csv(const std::vector<PredictionReport>& reports) {
    std::string out = "n,ell,exact_re,exact_im,pred_re,pred_im,residual\n";
    for (const auto& r : reports) {
        out += std::to_string(r.n);
        out += ',';
        out += std::to_string(r.ell);
        out += ',';
        out += format_double(r.exact.real());
        out += ',';
        out += format_double(r.exact.imag());
        out += ',';
        out += format_double(r.predicted.real());
        out += ',';
        out += format_double(r.predicted.imag());
        out += ',';
        out += format_double(r.residual);
        out += '\n';
    }
    return out;
}

inline std::string reports_to_json(const std::vector<PredictionReport>& reports) {
    std::string out = "{\"reports\":[";
    bool first_rep = true;
    for (const auto& r : reports) {
        if (!first_rep) out += ',';
        first_rep = false;
        out += "{\"n\":";
        out += std::to_string(r.n);
        out += ",\"ell\":";
        out += std::to_string(r.ell);
        out += ",\"exact\":{\"re\":";
        out += format_double(r.exact.real());
        out += ",\"im\":";
        out += format_double(r.exact.imag());
        out += "},\"predicted\":{\"re\":";
        out += format_double(r.predicted.real());
        out += ",\"im\":";
        out += format_double(r.predicted.imag());
        out += "},\"residual\":";
        out += format_double(r.residual);
        out += ",\"crossing_data\":[";
        bool first_cross = true;
        for (const auto& cr : r.crossing_data) {
            if (!first_cross) out += ',';
            first_cross = false;
            out += "{\"t\":";
            out += format_double(cr.t);
            out += ",\"k\":";
            out += std::to_string(cr.k);
            out += ",\"contribution\":{\"re\":";
            out += format_double(cr.contribution.real());
            out += ",\"im\":";
            out += format_double(cr.contribution.imag());
            out += "}}";
        }
        out += "]}";
    }
    out += "]}\n";
    return out;
}

}  // namespace cs_spectra
