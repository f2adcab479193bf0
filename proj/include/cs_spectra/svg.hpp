#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <string>

#include "cs_spectra/circle_measure.hpp"

namespace cs_spectra {

namespace detail {

// Fixed two-decimal pixel coordinates; enough for display, and a single
// canonical spelling per value keeps the bytes reproducible.
inline std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    std::string s = buf;
    if (s == "-0.00") s = "0.00";
    return s;
}

inline std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += ch;
        }
    }
    return out;
}

}  // namespace detail

// 64-bin weight histogram over [0, 2pi) next to a unit-circle atom plot.
// Fixed layout and palette; byte-identical output for identical measures.
inline std::string svg_histogram(const CircleMeasure& m) {
    constexpr int bins = 64;
    std::array<double, bins> mass{};
    for (const Atom& a : m.atoms()) {
        int b = static_cast<int>(a.theta / two_pi * bins);
        if (b >= bins) b = bins - 1;  // theta = 2pi - eps rounding
        if (b < 0) b = 0;
        mass[static_cast<std::size_t>(b)] += a.weight;
    }
    const double peak = std::max(1e-300, *std::max_element(mass.begin(), mass.end()));

    const double hx0 = 40.0, hx1 = 420.0, hy0 = 40.0, hy1 = 340.0;
    const double cx = 560.0, cy = 190.0, cr = 140.0;

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"720\" height=\"400\" "
         "viewBox=\"0 0 720 400\">\n";
    s += "<rect width=\"720\" height=\"400\" fill=\"#ffffff\"/>\n";
    s += "<text x=\"40\" y=\"24\" font-family=\"monospace\" font-size=\"14\" fill=\"#222222\">" +
         detail::xml_escape(m.label()) + "</text>\n";

    const double bw = (hx1 - hx0) / bins;
    for (int b = 0; b < bins; ++b) {
        const double h = (hy1 - hy0) * mass[static_cast<std::size_t>(b)] / peak;
        if (h <= 0.0) continue;
        s += "<rect x=\"" + detail::svg_num(hx0 + bw * b) + "\" y=\"" + detail::svg_num(hy1 - h) +
             "\" width=\"" + detail::svg_num(bw - 1.0) + "\" height=\"" + detail::svg_num(h) +
             "\" fill=\"#3b6ea5\"/>\n";
    }
    s += "<line x1=\"" + detail::svg_num(hx0) + "\" y1=\"" + detail::svg_num(hy1) + "\" x2=\"" +
         detail::svg_num(hx1) + "\" y2=\"" + detail::svg_num(hy1) +
         "\" stroke=\"#222222\" stroke-width=\"1\"/>\n";
    s += "<text x=\"" + detail::svg_num(hx0) + "\" y=\"" + detail::svg_num(hy1 + 16.0) +
         "\" font-family=\"monospace\" font-size=\"11\" fill=\"#222222\">0</text>\n";
    s += "<text x=\"" + detail::svg_num(hx1 - 24.0) + "\" y=\"" + detail::svg_num(hy1 + 16.0) +
         "\" font-family=\"monospace\" font-size=\"11\" fill=\"#222222\">2&#960;</text>\n";

    s += "<circle cx=\"" + detail::svg_num(cx) + "\" cy=\"" + detail::svg_num(cy) + "\" r=\"" +
         detail::svg_num(cr) + "\" fill=\"none\" stroke=\"#888888\" stroke-width=\"1\"/>\n";
    s += "<line x1=\"" + detail::svg_num(cx + cr - 6.0) + "\" y1=\"" + detail::svg_num(cy) +
         "\" x2=\"" + detail::svg_num(cx + cr + 6.0) + "\" y2=\"" + detail::svg_num(cy) +
         "\" stroke=\"#888888\" stroke-width=\"1\"/>\n";
    for (const Atom& a : m.atoms()) {
        const double px = cx + cr * std::cos(a.theta);
        const double py = cy - cr * std::sin(a.theta);
        s += "<circle cx=\"" + detail::svg_num(px) + "\" cy=\"" + detail::svg_num(py) +
             "\" r=\"4\" fill=\"#c0392b\"/>\n";
    }
    s += "</svg>\n";
    return s;
}

}  // namespace cs_spectra
