#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cs_spectra/circle_measure.hpp"
#include "cs_spectra/errors.hpp"
#include "cs_spectra/numtheory.hpp"
#include "cs_spectra/rational.hpp"

namespace cs_spectra {

// ---- lens spaces ------------------------------------------------------------

struct LensSpace {
    long long p = 1;
    long long q = 0;  // stored reduced mod p

    LensSpace(long long p_, long long q_) : p(p_) {
        if (p < 1) throw validation_error("BadArgument", "lens space requires p >= 1",
                                          {{"p", std::to_string(p_)}});
        q = ((q_ % p) + p) % p;
        if (std::gcd(p, q) != 1) {
            throw validation_error("NotCoprime", "lens space requires gcd(p,q) = 1",
                                   {{"p", std::to_string(p_)}, {"q", std::to_string(q_)}});
        }
    }
};

// Atoms 2*pi*q*n^2/p (q* the inverse of q mod p), n = 0..p-1, weight 1/p each;
// equal residues merged exactly before any floating point enters.
inline CircleMeasure lens_measure(const LensSpace& L) {
    const long long qstar = mod_inverse(L.q, L.p).value;
    std::map<long long, long long> counts;  // residue q*n^2 mod p -> multiplicity
    for (long long n = 0; n < L.p; ++n) {
        const long long r = static_cast<long long>(
            mulmod_u64(static_cast<std::uint64_t>(qstar),
                       mulmod_u64(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(n),
                                  static_cast<std::uint64_t>(L.p)),
                       static_cast<std::uint64_t>(L.p)));
        ++counts[r];
    }
    std::vector<Atom> atoms;
    atoms.reserve(counts.size());
    for (const auto& [r, c] : counts) {
        atoms.push_back({two_pi * static_cast<double>(r) / static_cast<double>(L.p),
                         static_cast<double>(c) / static_cast<double>(L.p)});
    }
    return CircleMeasure(std::move(atoms),
                         "L(" + std::to_string(L.p) + "," + std::to_string(L.q) + ")");
}

// The quadratic-residue measure of a modulus p: atoms 2*pi*k^2/p, weight 1/p.
inline CircleMeasure residue_measure(long long p) {
    CircleMeasure m = lens_measure(LensSpace(p, 1));
    return CircleMeasure(m.atoms(), "residues(" + std::to_string(p) + ")");
}

// ---- Brieskorn spheres ------------------------------------------------------

// Triple parametrization shared by Brieskorn spheres and their pairwise-coprime
// generalizations: one atom per (n1,n2,n3) with 0 < ni < pi, at angle
// 2*pi*n^2/(4*p1*p2*p3) for n = n1*p2*p3 + p1*n2*p3 + p1*p2*n3, each triple
// weighted 1/((p1-1)(p2-1)(p3-1)). Residues mod 4p merged exactly.
inline std::map<long long, long long> triple_phase_multiplicities(long long p1, long long p2,
                                                                  long long p3) {
    const std::array<long long, 3> ps{p1, p2, p3};
    for (long long p : ps) {
        if (p < 2) throw validation_error("BadArgument", "triple entries must be >= 2",
                                          {{"p", std::to_string(p)}});
    }
    if (std::gcd(p1, p2) != 1 || std::gcd(p1, p3) != 1 || std::gcd(p2, p3) != 1) {
        throw validation_error("NotCoprime", "triple entries must be pairwise coprime",
                               {{"p1", std::to_string(p1)},
                                {"p2", std::to_string(p2)},
                                {"p3", std::to_string(p3)}});
    }
    const long long p = p1 * p2 * p3;
    const long long M = 4 * p;
    std::map<long long, long long> counts;  // n^2 mod 4p -> multiplicity
    for (long long n1 = 1; n1 < p1; ++n1) {
        for (long long n2 = 1; n2 < p2; ++n2) {
            for (long long n3 = 1; n3 < p3; ++n3) {
                const long long n = n1 * p2 * p3 + p1 * n2 * p3 + p1 * p2 * n3;  // < 3p
                const long long r = static_cast<long long>(
                    mulmod_u64(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(n),
                               static_cast<std::uint64_t>(M)));
                ++counts[r];
            }
        }
    }
    return counts;
}

inline CircleMeasure triple_phase_measure(long long p1, long long p2, long long p3,
                                          std::string label = "") {
    const auto counts = triple_phase_multiplicities(p1, p2, p3);
    const double M = 4.0 * static_cast<double>(p1) * static_cast<double>(p2) *
                     static_cast<double>(p3);
    const double total = static_cast<double>((p1 - 1) * (p2 - 1) * (p3 - 1));
    std::vector<Atom> atoms;
    atoms.reserve(counts.size());
    for (const auto& [r, c] : counts) {
        atoms.push_back({two_pi * static_cast<double>(r) / M, static_cast<double>(c) / total});
    }
    if (label.empty()) {
        label = "triples(" + std::to_string(p1) + "," + std::to_string(p2) + "," +
                std::to_string(p3) + ")";
    }
    return CircleMeasure(std::move(atoms), std::move(label));
}

struct BrieskornSphere {
    long long p1 = 2, p2 = 3, p3 = 5;

    BrieskornSphere(long long a, long long b, long long c) : p1(a), p2(b), p3(c) {
        for (long long p : {a, b, c}) {
            if (p < 2 || !is_prime_u64(static_cast<std::uint64_t>(p))) {
                throw validation_error("NotPrime", "Brieskorn parameters must be prime",
                                       {{"p", std::to_string(p)}});
            }
        }
        if (a == b || a == c || b == c) {
            throw validation_error("BadArgument", "Brieskorn parameters must be pairwise distinct",
                                   {{"p1", std::to_string(a)},
                                    {"p2", std::to_string(b)},
                                    {"p3", std::to_string(c)}});
        }
    }
};

inline CircleMeasure brieskorn_measure(const BrieskornSphere& B) {
    return triple_phase_measure(B.p1, B.p2, B.p3,
                                "Sigma(" + std::to_string(B.p1) + "," + std::to_string(B.p2) +
                                    "," + std::to_string(B.p3) + ")");
}

// ---- torus bundles ----------------------------------------------------------

struct Mat2 {
    long long a = 1, b = 0, c = 0, d = 1;  // [[a, b], [c, d]]

    long long det() const { return a * d - b * c; }
    long long trace() const { return a + d; }
    friend Mat2 operator*(const Mat2& x, const Mat2& y) {
        return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d,
                x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
    }
    friend bool operator==(const Mat2&, const Mat2&) = default;
    std::string str() const {
        return "[[" + std::to_string(a) + "," + std::to_string(b) + "],[" + std::to_string(c) +
               "," + std::to_string(d) + "]]";
    }
};

struct RatVec2 {
    Rational x, y;
    friend bool operator==(const RatVec2&, const RatVec2&) = default;
    friend bool operator<(const RatVec2& u, const RatVec2& v) {
        return u.x != v.x ? u.x < v.x : u.y < v.y;
    }
};

inline RatVec2 mat_apply(const Mat2& A, const RatVec2& v) {
    return {Rational(A.a) * v.x + Rational(A.b) * v.y, Rational(A.c) * v.x + Rational(A.d) * v.y};
}

inline Rational rat_det(const RatVec2& v, const RatVec2& w) { return v.x * w.y - v.y * w.x; }

inline RatVec2 vec_mod_z2(const RatVec2& v) { return {v.x.frac(), v.y.frac()}; }

struct TorusBundle {
    Mat2 A;

    explicit TorusBundle(const Mat2& A_) : A(A_) {
        if (A.det() != 1) {
            throw validation_error("NotUnimodular", "monodromy must have determinant 1",
                                   {{"matrix", A.str()}});
        }
        if (A.trace() == 2) {
            throw validation_error("ParabolicMonodromy", "monodromy trace 2 is excluded",
                                   {{"matrix", A.str()}});
        }
    }
};

struct FixedPointGroup {
    std::vector<RatVec2> elements;  // canonical: coordinates in [0,1), sorted
};

// 2x2 Smith normal form: returns (U, V, d1, d2) with U*M*V = diag(d1, d2),
// U, V invertible over Z, d1 | d2, both nonnegative.
struct Smith2 {
    Mat2 U, V;
    long long d1 = 0, d2 = 0;
};

inline Smith2 smith_normal_form(Mat2 M) {
    Mat2 U{}, V{};
    auto row_op = [&](long long u0, long long u1, long long l0, long long l1) {
        // rows <- [[u0, u1], [l0, l1]] * rows; det of the op must be +-1
        M = Mat2{u0, u1, l0, l1} * M;
        U = Mat2{u0, u1, l0, l1} * U;
    };
    auto col_op = [&](long long a0, long long b0, long long a1, long long b1) {
        M = M * Mat2{a0, b0, a1, b1};
        V = V * Mat2{a0, b0, a1, b1};
    };

    // Reduce until the off-diagonal entries vanish. When M.a already divides
    // the entry an elementary shear clears it, leaving M.a and the other
    // off-diagonal entry alone (a general Bezout mix here can reintroduce the
    // entry just cleared and cycle forever: extended_gcd(1, -1) = (1, 0, -1));
    // otherwise the Bezout mix puts the gcd at the top-left and |M.a| strictly
    // decreases, so each pass either exits or shrinks |M.a|.
    auto clear_c = [&] {
        if (M.c % M.a == 0) {
            row_op(1, 0, -M.c / M.a, 1);
        } else {
            auto [g, u, v] = extended_gcd(M.a, M.c);
            row_op(u, v, -M.c / g, M.a / g);
        }
    };
    auto clear_b = [&] {
        if (M.b % M.a == 0) {
            col_op(1, -M.b / M.a, 0, 1);
        } else {
            auto [g, u, v] = extended_gcd(M.a, M.b);
            col_op(u, -M.b / g, v, M.a / g);
        }
    };
    if (M.a == 0 && M.c == 0) col_op(0, 1, 1, 0);
    if (M.a == 0) row_op(0, 1, 1, 0);
    while (M.b != 0 || M.c != 0) {
        if (M.c != 0) clear_c();
        if (M.b != 0) clear_b();
    }
    // Divisibility: fold d2 into the first column and re-reduce once.
    if (M.d != 0 && M.a != 0 && M.d % M.a != 0) {
        col_op(1, 0, 1, 1);  // col1 += col2
        while (M.b != 0 || M.c != 0) {
            if (M.c != 0) clear_c();
            if (M.b != 0) clear_b();
        }
    }
    if (M.a < 0) row_op(-1, 0, 0, 1);
    if (M.d < 0) row_op(1, 0, 0, -1);
    return {U, V, M.a, M.d};
}

// G_A = {v in Q^2/Z^2 : (A - I)v = 0 mod Z^2}, enumerated through the Smith
// form of A - I: the solutions are V*(a/d1, b/d2) over 0 <= a < d1, 0 <= b < d2.
inline FixedPointGroup torus_bundle_group(const TorusBundle& T) {
    const Mat2 M{T.A.a - 1, T.A.b, T.A.c, T.A.d - 1};
    const Smith2 s = smith_normal_form(M);
    FixedPointGroup G;
    G.elements.reserve(static_cast<std::size_t>(s.d1 * s.d2));
    for (long long a = 0; a < s.d1; ++a) {
        for (long long b = 0; b < s.d2; ++b) {
            const RatVec2 w{Rational(a, s.d1), Rational(b, s.d2)};
            G.elements.push_back(vec_mod_z2(mat_apply(s.V, w)));
        }
    }
    std::sort(G.elements.begin(), G.elements.end());
    return G;
}

// Oracle enumeration: every element of G_A has denominator dividing
// D = |det(A - I)|, so scan all (a/D, b/D).
inline FixedPointGroup torus_bundle_group_bruteforce(const TorusBundle& T) {
    const Mat2 M{T.A.a - 1, T.A.b, T.A.c, T.A.d - 1};
    const long long D = std::abs(M.det());
    FixedPointGroup G;
    for (long long a = 0; a < D; ++a) {
        for (long long b = 0; b < D; ++b) {
            const RatVec2 v{Rational(a, D), Rational(b, D)};
            const RatVec2 Mv = mat_apply(M, v);
            if (Mv.x.is_integer() && Mv.y.is_integer()) G.elements.push_back(vec_mod_z2(v));
        }
    }
    std::sort(G.elements.begin(), G.elements.end());
    return G;
}

inline bool is_fixed_point(const TorusBundle& T, const RatVec2& v) {
    const Mat2 M{T.A.a - 1, T.A.b, T.A.c, T.A.d - 1};
    const RatVec2 Mv = mat_apply(M, v);
    return Mv.x.is_integer() && Mv.y.is_integer();
}

// f(v) = det(v, Av) mod Z, the quadratic phase of a fixed point.
inline Rational torus_bundle_phase(const TorusBundle& T, const RatVec2& v) {
    return rat_det(v, mat_apply(T.A, v)).frac();
}

// b(v, w) = det(v, Aw) + det(w, Av) mod Z, the polarization of f.
inline Rational torus_bundle_bilinear(const TorusBundle& T, const RatVec2& v, const RatVec2& w) {
    if (!is_fixed_point(T, v) || !is_fixed_point(T, w)) {
        throw validation_error("NotFixedPoint", "bilinear form arguments must lie in G_A",
                               {{"matrix", T.A.str()}});
    }
    return (rat_det(v, mat_apply(T.A, w)) + rat_det(w, mat_apply(T.A, v))).frac();
}

// mu_A = |det(A-I)|^{-1} * sum over G_A of delta at 2*pi*f(v); equal rational
// phases merged exactly.
inline CircleMeasure torus_bundle_measure(const TorusBundle& T) {
    const FixedPointGroup G = torus_bundle_group(T);
    std::map<Rational, long long> counts;
    for (const RatVec2& v : G.elements) ++counts[torus_bundle_phase(T, v)];
    const double order = static_cast<double>(G.elements.size());
    std::vector<Atom> atoms;
    atoms.reserve(counts.size());
    for (const auto& [phase, c] : counts) {
        atoms.push_back({two_pi * phase.value(), static_cast<double>(c) / order});
    }
    return CircleMeasure(std::move(atoms), "torus_bundle" + T.A.str());
}

// Random monodromies: words of length <= 12 in S, T and their inverses,
// keeping non-parabolic results with 0 < |det(A - I)| <= max_order, distinct.
// Deterministic for a fixed seed.
inline std::vector<Mat2> sample_torus_bundles(std::size_t count, unsigned long seed,
                                              long long max_order) {
    const Mat2 gens[4] = {{0, -1, 1, 0}, {1, 1, 0, 1}, {0, 1, -1, 0}, {1, -1, 0, 1}};
    std::mt19937 rng(static_cast<std::uint32_t>(seed));
    std::uniform_int_distribution<int> pick(0, 3);
    std::uniform_int_distribution<int> word_len(1, 12);
    std::set<std::array<long long, 4>> seen;
    std::vector<Mat2> out;
    for (long long guard = 0; out.size() < count && guard < 1000000; ++guard) {
        Mat2 A;
        const int len = word_len(rng);
        for (int i = 0; i < len; ++i) A = A * gens[pick(rng)];
        if (A.trace() == 2) continue;
        const long long order = std::llabs((A.a - 1) * (A.d - 1) - A.b * A.c);
        if (order > max_order) continue;
        if (!seen.insert({A.a, A.b, A.c, A.d}).second) continue;
        out.push_back(A);
    }
    if (out.size() < count) {
        throw numerical_error("SamplerExhausted", "could not sample enough distinct monodromies",
                              {{"count", std::to_string(count)},
                               {"found", std::to_string(out.size())}});
    }
    return out;
}

// Whether v -> k*v is a bijection of G_A (it always maps G_A into itself).
inline bool scalar_multiple_bijective(const FixedPointGroup& G, long long k) {
    std::vector<RatVec2> image;
    image.reserve(G.elements.size());
    for (const RatVec2& v : G.elements) {
        image.push_back(vec_mod_z2({Rational(k) * v.x, Rational(k) * v.y}));
    }
    std::sort(image.begin(), image.end());
    image.erase(std::unique(image.begin(), image.end()), image.end());
    return image.size() == G.elements.size();
}

}  // namespace cs_spectra
