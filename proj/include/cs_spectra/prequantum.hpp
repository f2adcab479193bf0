#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cs_spectra/circle_measure.hpp"
#include "cs_spectra/closed_families.hpp"
#include "cs_spectra/errors.hpp"
#include "cs_spectra/kahan.hpp"
#include "cs_spectra/numtheory.hpp"
#include "cs_spectra/parallel.hpp"
#include "cs_spectra/quadrature.hpp"
#include "cs_spectra/serialize.hpp"
#include "cs_spectra/trigpoly.hpp"

namespace cs_spectra {

// Point of R^2 x T with contact form d(theta) + (x dy - y dx)/2pi.
struct BundlePoint {
    double x = 0.0, y = 0.0, theta = 0.0;
    friend bool operator==(const BundlePoint&, const BundlePoint&) = default;
};

// (m,n).(x,y,theta) = (x + 2pi m, y + 2pi n, theta + m y - n x); the cocycle
// m*y - n*x makes this an action because x, y shift by full periods.
inline BundlePoint deck_action(long long m, long long n, const BundlePoint& pt) {
    return {pt.x + two_pi * static_cast<double>(m), pt.y + two_pi * static_cast<double>(n),
            wrap_angle(pt.theta + static_cast<double>(m) * pt.y - static_cast<double>(n) * pt.x)};
}

// Base-coordinate action of SL2(Z); theta untouched (the form is invariant).
inline BundlePoint sl2_transport(const Mat2& B, const BundlePoint& pt) {
    if (B.det() != 1) {
        throw validation_error("NotUnimodular", "transport matrix must have determinant 1",
                               {{"matrix", B.str()}});
    }
    return {static_cast<double>(B.a) * pt.x + static_cast<double>(B.b) * pt.y,
            static_cast<double>(B.c) * pt.x + static_cast<double>(B.d) * pt.y,
            wrap_angle(pt.theta)};
}

// [[p, r], [q, s]] with ps - qr = 1; the slope matrix of a p/q filling curve.
struct SlopeMatrix {
    long long p = 1, r = 0, q = 0, s = 1;

    SlopeMatrix(long long p_, long long r_, long long q_, long long s_)
        : p(p_), r(r_), q(q_), s(s_) {
        if (p * s - q * r != 1) {
            throw validation_error("NotUnimodular", "slope matrix must satisfy ps - qr = 1",
                                   {{"p", std::to_string(p)}, {"r", std::to_string(r)},
                                    {"q", std::to_string(q)}, {"s", std::to_string(s)}});
        }
    }

    // Canonical completion of a coprime slope via the Bezout complement.
    static SlopeMatrix from_slope(long long p, long long q) {
        auto [r, s] = bezout_complement(p, q);
        return SlopeMatrix(p, r, q, s);
    }
};

// F_A(x,y) = (s x - r y)(q x - p y)/2pi, not reduced mod 2pi.
inline double f_correction(const SlopeMatrix& A, double x, double y) {
    return (static_cast<double>(A.s) * x - static_cast<double>(A.r) * y) *
           (static_cast<double>(A.q) * x - static_cast<double>(A.p) * y) / two_pi;
}

enum class ThetaMode { closed_form, quadrature };

// Immersed curve t -> (x(t), y(t), theta(t)) with theta forced by flatness:
// theta'(t) = -(x y' - y x')/2pi. The lift integrates in closed form (the
// Wronskian of trig polynomials integrates symbolically); a quadrature mode
// exists to cross-check the closed form.
class LegendrianCurve {
  public:
    LegendrianCurve(double a, double b, TrigPoly x, TrigPoly y, double theta0,
                    ThetaMode mode = ThetaMode::closed_form)
        : a_(a), b_(b), x_(std::move(x)), y_(std::move(y)), xp_(x_.derivative()),
          yp_(y_.derivative()), theta0_(theta0), mode_(mode), wron_(wronskian(x_, y_)),
          wron_anti_(wron_.antiderivative()) {
        if (!(a < b)) {
            throw validation_error("BadCurve", "domain must satisfy a < b",
                                   {{"a", format_double(a)}, {"b", format_double(b)}});
        }
        wron_anti_a_ = wron_anti_(a_);
        constexpr int kGrid = 1 << 14;
        for (int i = 0; i <= kGrid; ++i) {
            const double t = a_ + (b_ - a_) * static_cast<double>(i) / kGrid;
            const double dx = xp_(t), dy = yp_(t);
            if (dx * dx + dy * dy < 1e-18) {
                throw validation_error("NotImmersed", "x'^2 + y'^2 vanishes on the sampling grid",
                                       {{"t", format_double(t)}});
            }
        }
    }

    double domain_a() const { return a_; }
    double domain_b() const { return b_; }
    double theta0() const { return theta0_; }
    ThetaMode mode() const { return mode_; }

    double x(double t) const { return x_(t); }
    double y(double t) const { return y_(t); }
    double x_prime(double t) const { return xp_(t); }
    double y_prime(double t) const { return yp_(t); }

    double theta(double t) const {
        if (mode_ == ThetaMode::closed_form) {
            return theta0_ - (wron_anti_(t) - wron_anti_a_) / two_pi;
        }
        return theta0_ - adaptive_simpson([this](double u) { return wron_(u); }, a_, t, 1e-12) / two_pi;
    }
    double theta_prime(double t) const { return -wron_(t) / two_pi; }

    const TrigPoly& x_poly() const { return x_; }
    const TrigPoly& y_poly() const { return y_; }

    LegendrianCurve with_mode(ThetaMode m) const {
        return LegendrianCurve(a_, b_, x_, y_, theta0_, m);
    }

  private:
    double a_, b_;
    TrigPoly x_, y_, xp_, yp_;
    double theta0_;
    ThetaMode mode_;
    SecularTrigPoly wron_, wron_anti_;
    double wron_anti_a_ = 0.0;
};

inline LegendrianCurve lift_theta(double a, double b, TrigPoly x, TrigPoly y, double theta0,
                                  ThetaMode mode = ThetaMode::closed_form) {
    return LegendrianCurve(a, b, std::move(x), std::move(y), theta0, mode);
}

// i_{p/q}(t) = (pt, qt, 0); flat because x y' - y x' = 0 identically.
inline LegendrianCurve standard_curve(long long p, long long q, double a = 0.0, double b = two_pi) {
    if (std::gcd(p, q) != 1) {
        throw validation_error("NotCoprime", "standard curve requires gcd(p,q) = 1",
                               {{"p", std::to_string(p)}, {"q", std::to_string(q)}});
    }
    return LegendrianCurve(a, b, TrigPoly(static_cast<double>(p), 0.0),
                           TrigPoly(static_cast<double>(q), 0.0), 0.0);
}

// Base change (x,y) -> B(x,y) of a curve; theta is untouched because the
// Wronskian x y' - y x' picks up det(B) = 1.
inline LegendrianCurve sl2_transport_curve(const Mat2& B, const LegendrianCurve& c) {
    if (B.det() != 1) {
        throw validation_error("NotUnimodular", "transport matrix must have determinant 1",
                               {{"matrix", B.str()}});
    }
    TrigPoly nx = static_cast<double>(B.a) * c.x_poly() + static_cast<double>(B.b) * c.y_poly();
    TrigPoly ny = static_cast<double>(B.c) * c.x_poly() + static_cast<double>(B.d) * c.y_poly();
    return LegendrianCurve(c.domain_a(), c.domain_b(), std::move(nx), std::move(ny), c.theta0(),
                           c.mode());
}

struct Intersection {
    double t = 0.0;
    long long m = 0;  // the level index: g(t) = spacing * m
};

inline constexpr long long min_intersect_grid = 1 << 10;

namespace detail {

// All t in [a,b] with f(t) in spacing*Z: uniform bracketing at `grid` cells,
// bisection to machine width, Newton polish, dedup within 1e-10 in t.
// Deterministic and independent of the thread count (fixed cells, fixed
// merge order). No endpoint or transversality policy — callers enforce theirs.
inline std::vector<Intersection> level_roots(const TrigPoly& f, const TrigPoly& fp, double a,
                                             double b, long long grid, double spacing) {
    const double cell = (b - a) / static_cast<double>(grid);
    constexpr std::size_t kChunk = std::size_t{1} << 12;
    auto chunks = map_chunks<std::vector<Intersection>>(
        static_cast<std::size_t>(grid), kChunk, [&](std::size_t begin, std::size_t end) {
            std::vector<Intersection> found;
            double t0 = a + cell * static_cast<double>(begin);
            double g0 = f(t0);
            for (std::size_t i = begin; i < end; ++i) {
                const double t1 = i + 1 == static_cast<std::size_t>(grid)
                                      ? b
                                      : a + cell * static_cast<double>(i + 1);
                const double g1 = f(t1);
                const double lo = std::min(g0, g1), hi = std::max(g0, g1);
                // Widened by one so division rounding can never drop a level;
                // levels with no actual crossing fall out of the guards below.
                const long long mlo = static_cast<long long>(std::ceil(lo / spacing)) - 1;
                const long long mhi = static_cast<long long>(std::floor(hi / spacing)) + 1;
                for (long long m = mlo; m <= mhi; ++m) {
                    const double target = spacing * static_cast<double>(m);
                    // A sample can land exactly on a level; the left sample owns
                    // such a root (the right one recurs as the next cell's left
                    // sample; a hit at t=b is the caller's endpoint problem).
                    if (g0 == target) {
                        found.push_back({t0, m});
                        continue;
                    }
                    if (g1 == target) continue;
                    if ((g0 < target) == (g1 < target)) continue;  // grazing, no crossing
                    double ta = t0, tb = t1;
                    double ha = g0 - target;
                    for (int it = 0; it < 80 && tb - ta > 1e-16 * (1.0 + std::abs(ta)); ++it) {
                        const double tm = 0.5 * (ta + tb);
                        const double hm = f(tm) - target;
                        if ((ha < 0.0) == (hm < 0.0)) {
                            ta = tm;
                            ha = hm;
                        } else {
                            tb = tm;
                        }
                    }
                    double root = 0.5 * (ta + tb);
                    double best = root, best_h = std::abs(f(root) - target);
                    for (int it = 0; it < 4; ++it) {
                        const double d = fp(root);
                        if (d == 0.0) break;
                        root -= (f(root) - target) / d;
                        if (root < ta - cell || root > tb + cell) break;  // diverged
                        const double h = std::abs(f(root) - target);
                        if (h < best_h) {
                            best = root;
                            best_h = h;
                        }
                    }
                    found.push_back({best, m});
                }
                t0 = t1;
                g0 = g1;
            }
            std::sort(found.begin(), found.end(),
                      [](const Intersection& u, const Intersection& v) { return u.t < v.t; });
            return found;
        });

    std::vector<Intersection> roots;
    for (auto& part : chunks) roots.insert(roots.end(), part.begin(), part.end());
    std::sort(roots.begin(), roots.end(), [](const Intersection& u, const Intersection& v) {
        return u.t != v.t ? u.t < v.t : u.m < v.m;
    });
    std::vector<Intersection> dedup;
    for (const Intersection& r : roots) {
        if (!dedup.empty() && r.t - dedup.back().t < 1e-10) continue;
        dedup.push_back(r);
    }
    return dedup;
}

}  // namespace detail

// All t in [a,b] with g(t) = q*x(t) - p*y(t) in 2*pi*Z.
inline std::vector<Intersection> intersect(const LegendrianCurve& c, long long p, long long q,
                                           long long grid) {
    if (std::gcd(p, q) != 1) {
        throw validation_error("NotCoprime", "intersect requires gcd(p,q) = 1",
                               {{"p", std::to_string(p)}, {"q", std::to_string(q)}});
    }
    if (grid < min_intersect_grid) {
        throw validation_error("BadArgument", "bracketing grid must have at least 2^10 cells",
                               {{"grid", std::to_string(grid)}});
    }
    const TrigPoly g = static_cast<double>(q) * c.x_poly() - static_cast<double>(p) * c.y_poly();
    const TrigPoly gp = g.derivative();
    const double a = c.domain_a(), b = c.domain_b();

    const auto lattice_distance = [](double v) {
        return std::abs(v - two_pi * std::round(v / two_pi));
    };
    for (double endpoint : {a, b}) {
        if (lattice_distance(g(endpoint)) < 1e-10) {
            if (std::abs(gp(endpoint)) < 1e-8) {
                throw numerical_error("NonTransverse",
                                      "tangential intersection: |g'| below threshold at a root",
                                      {{"t", format_double(endpoint)},
                                       {"gprime", format_double(gp(endpoint))}});
            }
            throw numerical_error("EndpointHit", "g lies on the intersection lattice at a domain endpoint",
                                  {{"t", format_double(endpoint)}, {"g", format_double(g(endpoint))}});
        }
    }

    auto roots = detail::level_roots(g, gp, a, b, grid, two_pi);
    for (const Intersection& r : roots) {
        if (std::abs(gp(r.t)) < 1e-8) {
            throw numerical_error("NonTransverse", "tangential intersection: |g'| below threshold at a root",
                                  {{"t", format_double(r.t)}, {"gprime", format_double(gp(r.t))}});
        }
    }
    return roots;
}

// Eq.-style phase measure: one unit atom at theta(t) - F_A(x(t), y(t)) per
// intersection with the p/q line field. At a root q*x - p*y = 2*pi*m, so
// F_A = (s*x - r*y)*m exactly; that form avoids the catastrophic product.
inline CircleMeasure phase_measure(const LegendrianCurve& c, const SlopeMatrix& A, long long grid) {
    const auto cuts = intersect(c, A.p, A.q, grid);
    std::vector<Atom> atoms;
    atoms.reserve(cuts.size());
    for (const Intersection& r : cuts) {
        const double corr = (static_cast<double>(A.s) * c.x(r.t) - static_cast<double>(A.r) * c.y(r.t)) *
                            static_cast<double>(r.m);
        atoms.push_back({wrap_angle(c.theta(r.t) - corr), 1.0});
    }
    return CircleMeasure(std::move(atoms), "");
}

inline long long grid_default(long long n) {
    return (1LL << 14) * std::max(1LL, n / 64);
}

// (1/n) * sum over x(t) + n*y(t) = 2*pi*m of exp(i*l*(theta(t) + y(t)*m)).
// The multiplier y*(x + n*y)/2pi collapses to y*m at a root, exactly.
inline std::complex<double> exact_moment(const LegendrianCurve& c, long long n, long long ell,
                                         long long grid) {
    if (n < 1) {
        throw validation_error("BadArgument", "filling index n must be positive",
                               {{"n", std::to_string(n)}});
    }
    if (ell < 0) {
        throw validation_error("BadArgument", "moment order must be nonnegative",
                               {{"ell", std::to_string(ell)}});
    }
    const auto cuts = intersect(c, -n, 1, grid);  // g = x + n*y
    KahanComplex acc;
    for (const Intersection& r : cuts) {
        const double phase = static_cast<double>(ell) *
                             (c.theta(r.t) + c.y(r.t) * static_cast<double>(r.m));
        acc.add({std::cos(phase), std::sin(phase)});
    }
    return acc.value() / static_cast<double>(n);
}

// Flat section data of L^l along the horizontal line y = pi*k/l: the section
// t -> (t, pi*k/l, k*t/2). k is kept as handed in (the line upstairs in R^2
// remembers it); normalized() reduces to the torus labeling 0 <= k < 2l.
struct BohrSommerfeldSection {
    long long k = 0;
    long long ell = 1;

    BohrSommerfeldSection(long long k_, long long ell_) : k(k_), ell(ell_) {
        if (ell < 1) {
            throw validation_error("BadArgument", "section level must be positive",
                                   {{"ell", std::to_string(ell_)}});
        }
    }
    long long normalized() const { return ((k % (2 * ell)) + 2 * ell) % (2 * ell); }
};

// Pairing phase of the curve's l-th power against the flat section:
// l*theta(t) - k*x(t)/2 mod 2pi, defined only on the section's line.
inline double bs_phase(const LegendrianCurve& c, double t, const BohrSommerfeldSection& bs) {
    const double line = std::numbers::pi * static_cast<double>(bs.k) / static_cast<double>(bs.ell);
    if (std::abs(c.y(t) - line) >= 1e-9) {
        throw validation_error("OffLine", "point does not lie on the Bohr-Sommerfeld line",
                               {{"t", format_double(t)}, {"y", format_double(c.y(t))},
                                {"line", format_double(line)}});
    }
    return wrap_angle(static_cast<double>(bs.ell) * c.theta(t) -
                      static_cast<double>(bs.k) * c.x(t) / 2.0);
}

// ---- curve files ------------------------------------------------------------

namespace detail {

inline TrigPoly trigpoly_from_json(const nlohmann::json& j, const char* which) {
    if (!j.is_object()) {
        throw validation_error("ParseError", std::string("curve component must be an object: ") + which);
    }
    for (const auto& [key, val] : j.items()) {
        (void)val;
        if (key != "linear" && key != "harmonics") {
            throw validation_error("ParseError", std::string("unknown key in curve component ") + which,
                                   {{"key", key}});
        }
    }
    TrigPoly p(j.contains("linear") ? j["linear"].get<double>() : 0.0, 0.0);
    if (j.contains("harmonics")) {
        if (!j["harmonics"].is_array()) {
            throw validation_error("ParseError", std::string("harmonics must be an array: ") + which);
        }
        for (const auto& h : j["harmonics"]) {
            if (!h.is_array() || h.size() != 3 || !h[0].is_number_integer()) {
                throw validation_error("ParseError",
                                       std::string("harmonic rows are [freq, cos, sin]: ") + which);
            }
            p.add_harmonic(h[0].get<long long>(), h[1].get<double>(), h[2].get<double>());
        }
    }
    return p;
}

inline std::string trigpoly_to_json(const TrigPoly& p) {
    std::string out = "{\"linear\":" + format_double(p.linear()) + ",\"harmonics\":[";
    bool first = true;
    if (p.constant() != 0.0) {
        out += "[0," + format_double(p.constant()) + ",0]";
        first = false;
    }
    for (const auto& [w, ab] : p.harmonics()) {
        if (!first) out += ',';
        first = false;
        out += "[" + std::to_string(w) + "," + format_double(ab.first) + "," +
               format_double(ab.second) + "]";
    }
    out += "]}";
    return out;
}

}  // namespace detail

inline LegendrianCurve curve_from_json(const std::string& text,
                                       ThetaMode mode = ThetaMode::closed_form) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw validation_error("ParseError", "curve file is not a JSON object");
    }
    for (const auto& [key, val] : j.items()) {
        (void)val;
        if (key != "domain" && key != "x" && key != "y" && key != "theta0") {
            throw validation_error("ParseError", "unknown key in curve file", {{"key", key}});
        }
    }
    if (!j.contains("domain") || !j["domain"].is_array() || j["domain"].size() != 2 ||
        !j.contains("x") || !j.contains("y")) {
        throw validation_error("ParseError", "curve file needs domain:[a,b], x:{...}, y:{...}");
    }
    const double a = j["domain"][0].get<double>(), b = j["domain"][1].get<double>();
    const double theta0 = j.contains("theta0") ? j["theta0"].get<double>() : 0.0;
    return LegendrianCurve(a, b, detail::trigpoly_from_json(j["x"], "x"),
                           detail::trigpoly_from_json(j["y"], "y"), theta0, mode);
}

inline std::string curve_to_json(const LegendrianCurve& c) {
    return "{\"domain\":[" + format_double(c.domain_a()) + "," + format_double(c.domain_b()) +
           "],\"x\":" + detail::trigpoly_to_json(c.x_poly()) +
           ",\"y\":" + detail::trigpoly_to_json(c.y_poly()) +
           ",\"theta0\":" + format_double(c.theta0()) + "}\n";
}

}  // namespace cs_spectra
