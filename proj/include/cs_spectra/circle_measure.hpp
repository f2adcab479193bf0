#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "cs_spectra/errors.hpp"
#include "cs_spectra/kahan.hpp"
#include "cs_spectra/serialize.hpp"

namespace cs_spectra {

inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr double default_merge_tolerance = 1e-9;

inline double wrap_angle(double x) {
    double w = std::fmod(x, two_pi);
    if (w < 0.0) w += two_pi;
    if (w >= two_pi) w = 0.0;  // fmod result can round up to the period
    return w;
}

// Signed circular difference in (-pi, pi].
inline double wrap_signed(double x) {
    double w = std::fmod(x, two_pi);
    if (w > std::numbers::pi) w -= two_pi;
    if (w <= -std::numbers::pi) w += two_pi;
    return w;
}

struct Atom {
    double theta = 0.0;
    double weight = 0.0;
    friend bool operator==(const Atom&, const Atom&) = default;
};

// Finite atomic measure on R/2piZ. Canonical form: angles wrapped to
// [0, 2pi), zero-weight atoms dropped, atoms sorted by (angle, weight).
class CircleMeasure {
  public:
    CircleMeasure() = default;
    CircleMeasure(std::vector<Atom> atoms, std::string label) : label_(std::move(label)) {
        atoms_.reserve(atoms.size());
        for (const Atom& a : atoms) {
            if (!std::isfinite(a.theta) || !std::isfinite(a.weight)) {
                throw validation_error("BadMeasure", "non-finite atom",
                                       {{"label", label_}});
            }
            if (a.weight < 0.0) {
                throw validation_error("BadMeasure", "negative atom weight",
                                       {{"label", label_}, {"weight", format_double(a.weight)}});
            }
            if (a.weight == 0.0) continue;
            atoms_.push_back({wrap_angle(a.theta), a.weight});
        }
        std::sort(atoms_.begin(), atoms_.end(), [](const Atom& a, const Atom& b) {
            return a.theta != b.theta ? a.theta < b.theta : a.weight < b.weight;
        });
    }

    const std::vector<Atom>& atoms() const { return atoms_; }
    const std::string& label() const { return label_; }

    double total_mass() const {
        KahanSum s;
        for (const Atom& a : atoms_) s.add(a.weight);
        return s.value();
    }

    friend bool operator==(const CircleMeasure&, const CircleMeasure&) = default;

  private:
    std::vector<Atom> atoms_;
    std::string label_;
};

inline std::complex<double> moment(const CircleMeasure& m, long long ell) {
    KahanComplex acc;
    for (const Atom& a : m.atoms()) {
        const double phase = static_cast<double>(ell) * a.theta;
        acc.add({a.weight * std::cos(phase), a.weight * std::sin(phase)});
    }
    return acc.value();
}

inline constexpr double probability_tolerance = 1e-12;

inline void require_probability(const CircleMeasure& m, const char* who) {
    const double mass = m.total_mass();
    if (std::abs(mass - 1.0) > probability_tolerance) {
        throw validation_error("NotProbability",
                               std::string(who) + " requires a probability measure",
                               {{"label", m.label()}, {"mass", format_double(mass)}});
    }
}

// scale * moment: for ell >= 1 the uniform limit has vanishing moment, so the
// rescaled fluctuation needs no subtraction term.
inline std::complex<double> fluctuation_moment(const CircleMeasure& m, long long ell, double scale) {
    if (ell < 1) {
        throw validation_error("BadArgument", "fluctuation_moment requires ell >= 1",
                               {{"ell", std::to_string(ell)}});
    }
    require_probability(m, "fluctuation_moment");
    return scale * moment(m, ell);
}

// Cluster atoms whose circular distance is <= tau and replace each cluster by
// one atom at its mass-weighted circular mean. Wraparound across 0 handled by
// rotating the final cluster onto the first.
inline CircleMeasure merge_atoms(const CircleMeasure& m, double tau) {
    if (tau < 0.0) {
        throw validation_error("BadArgument", "merge tolerance must be nonnegative",
                               {{"tau", format_double(tau)}});
    }
    const auto& atoms = m.atoms();
    if (atoms.size() < 2) return m;

    // Consecutive clustering on the sorted angles, then possibly merge the
    // last cluster into the first across the 0/2pi seam.
    std::vector<std::pair<std::size_t, std::size_t>> clusters;  // [begin, end)
    std::size_t begin = 0;
    for (std::size_t i = 1; i < atoms.size(); ++i) {
        if (atoms[i].theta - atoms[i - 1].theta > tau) {
            clusters.emplace_back(begin, i);
            begin = i;
        }
    }
    clusters.emplace_back(begin, atoms.size());

    bool wrap = false;
    if (clusters.size() > 1) {
        const double seam = atoms.front().theta + two_pi - atoms.back().theta;
        wrap = seam <= tau;
    }

    std::vector<Atom> merged;
    merged.reserve(clusters.size());
    auto emit = [&](std::size_t lo, std::size_t hi) {
        KahanSum mass, weighted;
        const double base = atoms[lo].theta;
        for (std::size_t i = lo; i < hi; ++i) {
            mass.add(atoms[i].weight);
            weighted.add(atoms[i].weight * (atoms[i].theta - base));
        }
        merged.push_back({wrap_angle(base + weighted.value() / mass.value()), mass.value()});
    };

    if (wrap) {
        // Rotate the last cluster by -2pi so it sits just before the first,
        // and emit the combined seam cluster once.
        const auto last = clusters.back();
        clusters.pop_back();
        const auto first = clusters.front();
        KahanSum mass, weighted;
        const double base = atoms[last.first].theta - two_pi;
        for (std::size_t i = last.first; i < last.second; ++i) {
            mass.add(atoms[i].weight);
            weighted.add(atoms[i].weight * (atoms[i].theta - two_pi - base));
        }
        for (std::size_t i = first.first; i < first.second; ++i) {
            mass.add(atoms[i].weight);
            weighted.add(atoms[i].weight * (atoms[i].theta - base));
        }
        merged.push_back({wrap_angle(base + weighted.value() / mass.value()), mass.value()});
        for (std::size_t c = 1; c < clusters.size(); ++c) emit(clusters[c].first, clusters[c].second);
    } else {
        for (const auto& [lo, hi] : clusters) emit(lo, hi);
    }
    return CircleMeasure(std::move(merged), m.label());
}

// Pushforward by theta -> -theta; conjugates every moment.
inline CircleMeasure reflect(const CircleMeasure& m) {
    std::vector<Atom> atoms;
    atoms.reserve(m.atoms().size());
    for (const Atom& a : m.atoms()) atoms.push_back({wrap_angle(-a.theta), a.weight});
    return CircleMeasure(std::move(atoms), m.label());
}

// Average with the reflection: the measure seen from the quotient by
// (x, y, theta) ~ (-x, -y, -theta). Moments become real.
inline CircleMeasure symmetrize(const CircleMeasure& m) {
    std::vector<Atom> atoms;
    atoms.reserve(2 * m.atoms().size());
    for (const Atom& a : m.atoms()) {
        atoms.push_back({a.theta, 0.5 * a.weight});
        atoms.push_back({wrap_angle(-a.theta), 0.5 * a.weight});
    }
    return CircleMeasure(std::move(atoms), m.label());
}

enum class Provenance { exact_sum, closed_form, stationary_phase_prediction };

inline const char* provenance_name(Provenance p) {
    switch (p) {
        case Provenance::exact_sum: return "exact-sum";
        case Provenance::closed_form: return "closed-form";
        case Provenance::stationary_phase_prediction: return "stationary-phase-prediction";
    }
    throw validation_error("BadArgument", "unknown provenance");
}

inline Provenance provenance_from_name(const std::string& s) {
    if (s == "exact-sum") return Provenance::exact_sum;
    if (s == "closed-form") return Provenance::closed_form;
    if (s == "stationary-phase-prediction") return Provenance::stationary_phase_prediction;
    throw validation_error("ParseError", "unknown provenance", {{"value", s}});
}

struct MomentEntry {
    std::complex<double> value;
    Provenance provenance = Provenance::exact_sum;
    friend bool operator==(const MomentEntry&, const MomentEntry&) = default;
};

struct MomentTable {
    std::map<long long, MomentEntry> entries;
    friend bool operator==(const MomentTable&, const MomentTable&) = default;
};

// --- canonical serialization -------------------------------------------------

inline std::string to_json(const CircleMeasure& m) {
    std::string out = "{\"label\":\"" + json_escape(m.label()) + "\",\"atoms\":[";
    bool first = true;
    for (const Atom& a : m.atoms()) {
        if (!first) out += ',';
        first = false;
        out += "{\"theta\":" + format_double(a.theta) + ",\"weight\":" + format_double(a.weight) + "}";
    }
    out += "]}\n";
    return out;
}

inline std::string to_csv(const CircleMeasure& m) {
    std::string out = "theta,weight\n";
    for (const Atom& a : m.atoms()) {
        out += format_double(a.theta) + "," + format_double(a.weight) + "\n";
    }
    return out;
}

inline CircleMeasure measure_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("atoms") || !j["atoms"].is_array()) {
        throw validation_error("ParseError", "measure JSON must be {label, atoms:[{theta,weight}]}");
    }
    std::vector<Atom> atoms;
    for (const auto& ja : j["atoms"]) {
        if (!ja.is_object() || !ja.contains("theta") || !ja.contains("weight") ||
            !ja["theta"].is_number() || !ja["weight"].is_number()) {
            throw validation_error("ParseError", "measure atom must be {theta: number, weight: number}");
        }
        atoms.push_back({ja["theta"].get<double>(), ja["weight"].get<double>()});
    }
    std::string label = j.contains("label") && j["label"].is_string() ? j["label"].get<std::string>() : "";
    return CircleMeasure(std::move(atoms), std::move(label));
}

inline CircleMeasure measure_from_csv(const std::string& text, std::string label = "") {
    const auto lines = split_lines(text);
    if (lines.empty() || lines[0] != "theta,weight") {
        throw validation_error("ParseError", "measure CSV must start with header theta,weight");
    }
    std::vector<Atom> atoms;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto fields = split_fields(lines[i]);
        if (fields.size() != 2) {
            throw validation_error("ParseError", "measure CSV row must have 2 fields",
                                   {{"line", std::to_string(i + 1)}});
        }
        atoms.push_back({parse_double_field(fields[0], "measure CSV"),
                         parse_double_field(fields[1], "measure CSV")});
    }
    return CircleMeasure(std::move(atoms), std::move(label));
}

inline std::string to_json(const MomentTable& t) {
    std::string out = "{\"moments\":[";
    bool first = true;
    for (const auto& [ell, e] : t.entries) {
        if (!first) out += ',';
        first = false;
        out += "{\"ell\":" + std::to_string(ell) + ",\"re\":" + format_double(e.value.real()) +
               ",\"im\":" + format_double(e.value.imag()) + ",\"provenance\":\"" +
               provenance_name(e.provenance) + "\"}";
    }
    out += "]}\n";
    return out;
}

inline std::string to_csv(const MomentTable& t) {
    std::string out = "ell,re,im,provenance\n";
    for (const auto& [ell, e] : t.entries) {
        out += std::to_string(ell) + "," + format_double(e.value.real()) + "," +
               format_double(e.value.imag()) + "," + provenance_name(e.provenance) + "\n";
    }
    return out;
}

inline MomentTable moments_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("moments") || !j["moments"].is_array()) {
        throw validation_error("ParseError", "moment JSON must be {moments:[{ell,re,im,provenance}]}");
    }
    MomentTable t;
    for (const auto& je : j["moments"]) {
        if (!je.is_object() || !je.contains("ell") || !je.contains("re") || !je.contains("im") ||
            !je.contains("provenance")) {
            throw validation_error("ParseError", "moment entry must be {ell,re,im,provenance}");
        }
        t.entries[je["ell"].get<long long>()] = {
            {je["re"].get<double>(), je["im"].get<double>()},
            provenance_from_name(je["provenance"].get<std::string>())};
    }
    return t;
}

inline MomentTable moments_from_csv(const std::string& text) {
    const auto lines = split_lines(text);
    if (lines.empty() || lines[0] != "ell,re,im,provenance") {
        throw validation_error("ParseError", "moment CSV must start with header ell,re,im,provenance");
    }
    MomentTable t;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (lines[i].empty()) continue;
        const auto fields = split_fields(lines[i]);
        if (fields.size() != 4) {
            throw validation_error("ParseError", "moment CSV row must have 4 fields",
                                   {{"line", std::to_string(i + 1)}});
        }
        t.entries[parse_int_field(fields[0], "moment CSV")] = {
            {parse_double_field(fields[1], "moment CSV"), parse_double_field(fields[2], "moment CSV")},
            provenance_from_name(fields[3])};
    }
    return t;
}

}  // namespace cs_spectra
