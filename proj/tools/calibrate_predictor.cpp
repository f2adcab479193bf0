// One-time calibration of the stationary-phase correction constant, kept as a
// regression guard. The per-crossing prefactor is determined empirically: for
// each candidate unit * scale the predicted moments are rescaled and the decay
// of |exact - predicted| is refit over the n-ladder. Only the true constant
// makes the residual drop at ~1/n on every (curve, ell) combination; a wrong
// phase or a wrong ell-power leaves a first-order mismatch that decays like
// 1/sqrt(n). The shipped predictor_correction must win outright.

#include <cmath>
#include <complex>
#include <cstdio>
#include <string>
#include <vector>

#include "cs_spectra/cs_spectra.hpp"

using namespace cs_spectra;

namespace {

LegendrianCurve line_fixture() {
    TrigPoly x(1.0, 0.0);
    TrigPoly y(0.6, 0.21);
    return LegendrianCurve(0.05, 6.0, x, y, 0.3);
}

LegendrianCurve closed_fixture() {
    TrigPoly x(1.0, 0.0);
    x.add_harmonic(1, 0.0, 0.35);
    TrigPoly y(0.0, 2.1);
    y.add_harmonic(1, 1.55, 0.0);
    y.add_harmonic(2, 0.0, 0.15);
    return LegendrianCurve(0.0, two_pi, x, y, 0.2);
}

struct Candidate {
    const char* name;
    std::complex<double> unit;
    bool ell_scaled;
};

}  // namespace

int main() {
    const std::vector<long long> ladder = {64, 128, 256, 512, 1024, 2048, 4096};
    const DehnFamily identity(1, 0, 0, 1);
    const std::complex<double> quarter = std::polar(1.0, std::numbers::pi / 4.0);

    // unit in {1, e^{ipi/4}, e^{-ipi/4}, i} crossed with scale in {1, 1/sqrt(ell)}.
    const Candidate candidates[] = {
        {"1", {1.0, 0.0}, false},
        {"1 * l^-1/2", {1.0, 0.0}, true},
        {"e^{ipi/4}", quarter, false},
        {"e^{ipi/4} * l^-1/2", quarter, true},
        {"e^{-ipi/4}", std::conj(quarter), false},
        {"e^{-ipi/4} * l^-1/2", std::conj(quarter), true},
        {"i", {0.0, 1.0}, false},
        {"i * l^-1/2", {0.0, 1.0}, true},
    };
    const std::size_t shipped = 3;  // e^{ipi/4} * l^-1/2 is predictor_correction

    struct Combo {
        const char* curve_name;
        LegendrianCurve curve;
        long long ell;
    };
    // ell >= 2 so the two scale choices actually differ.
    std::vector<Combo> combos;
    combos.push_back({"line", line_fixture(), 2});
    combos.push_back({"line", line_fixture(), 3});
    combos.push_back({"closed", closed_fixture(), 2});
    combos.push_back({"closed", closed_fixture(), 3});

    bool ok = true;
    std::vector<std::vector<double>> slopes(std::size(candidates));
    for (const Combo& combo : combos) {
        const auto reports = theorem_main_run(combo.curve, identity, combo.ell, ladder);
        const std::complex<double> shipped_corr = predictor_correction(combo.ell);
        for (std::size_t ci = 0; ci < std::size(candidates); ++ci) {
            const Candidate& cand = candidates[ci];
            std::complex<double> corr = cand.unit;
            if (cand.ell_scaled) corr /= std::sqrt(static_cast<double>(combo.ell));
            std::vector<PredictionReport> rescaled = reports;
            for (auto& r : rescaled) {
                r.predicted *= corr / shipped_corr;
                r.residual = std::abs(r.exact - r.predicted);
            }
            const DecayFit fit = decay_fit(rescaled);
            slopes[ci].push_back(fit.at_floor ? -99.0 : fit.slope);
        }
    }

    std::printf("%-22s %10s %10s %10s %10s  verdict\n", "candidate", "line l=2", "line l=3",
                "closed l=2", "closed l=3");
    std::size_t passing = 0, winner = std::size(candidates);
    for (std::size_t ci = 0; ci < std::size(candidates); ++ci) {
        bool all_fast = true;
        for (double s : slopes[ci]) all_fast = all_fast && s <= -0.9;
        if (all_fast) {
            ++passing;
            winner = ci;
        }
        std::printf("%-22s %10.4f %10.4f %10.4f %10.4f  %s\n", candidates[ci].name,
                    slopes[ci][0], slopes[ci][1], slopes[ci][2], slopes[ci][3],
                    all_fast ? "1/n decay" : "first-order mismatch");
    }

    if (passing != 1 || winner != shipped) {
        std::printf("FAIL: expected exactly the shipped constant %s to reach slope <= -0.9\n",
                    candidates[shipped].name);
        ok = false;
    } else {
        std::printf("OK: shipped constant %s is the unique candidate with 1/n decay\n",
                    candidates[shipped].name);
    }
    return ok ? 0 : 1;
}
