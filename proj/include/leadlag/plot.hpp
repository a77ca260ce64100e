#pragma once

// Minimal static SVG line charts with optional shaded confidence bands.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "leadlag/panel.hpp"

namespace leadlag::plot {

struct Series {
    std::string name;
    std::vector<double> x, y;
    std::vector<double> half_width;  // empty: no band
};

struct Chart {
    std::string title, x_label, y_label;
    std::vector<Series> series;
    int width = 720, height = 440;
};

namespace detail {

inline const char* colour(std::size_t i) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    return palette[i % 10];
}

inline std::string num(double v) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(2);
    os << v;
    return os.str();
}

inline std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else if (c == '&') out += "&amp;";
        else out += c;
    }
    return out;
}

}  // namespace detail

inline std::string render_svg(const Chart& c) {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : c.series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const double h = s.half_width.empty() ? 0.0 : s.half_width[i];
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i] - h);
            y1 = std::max(y1, s.y[i] + h);
        }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;

    const double left = 70, right = 170, top = 40, bottom = 60;
    const double w = c.width - left - right, h = c.height - top - bottom;
    auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * w; };
    auto py = [&](double y) { return top + (y1 - y) / (y1 - y0) * h; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << c.width << "\" height=\"" << c.height
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << c.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << detail::escape(c.title)
       << "</text>\n";
    os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << w << "\" height=\"" << h
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 5; ++t) {
        const double yv = y0 + (y1 - y0) * t / 5.0, xv = x0 + (x1 - x0) * t / 5.0;
        os << "<text x=\"" << left - 6 << "\" y=\"" << detail::num(py(yv) + 4) << "\" text-anchor=\"end\">"
           << leadlag::detail::format_double(std::round(yv * 1000) / 1000) << "</text>\n";
        os << "<text x=\"" << detail::num(px(xv)) << "\" y=\"" << top + h + 16 << "\" text-anchor=\"middle\">"
           << leadlag::detail::format_double(std::round(xv * 1000) / 1000) << "</text>\n";
    }
    os << "<text x=\"" << left + w / 2 << "\" y=\"" << c.height - 18 << "\" text-anchor=\"middle\">"
       << detail::escape(c.x_label) << "</text>\n";
    os << "<text transform=\"translate(18," << top + h / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
       << detail::escape(c.y_label) << "</text>\n";

    for (std::size_t k = 0; k < c.series.size(); ++k) {
        const auto& s = c.series[k];
        if (s.x.empty()) continue;
        if (!s.half_width.empty()) {
            os << "<polygon fill=\"" << detail::colour(k) << "\" fill-opacity=\"0.18\" stroke=\"none\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i) os << detail::num(px(s.x[i])) << ',' << detail::num(py(s.y[i] + s.half_width[i])) << ' ';
            for (std::size_t i = s.x.size(); i-- > 0;) os << detail::num(px(s.x[i])) << ',' << detail::num(py(s.y[i] - s.half_width[i])) << ' ';
            os << "\"/>\n";
        }
        os << "<polyline fill=\"none\" stroke-width=\"1.6\" stroke=\"" << detail::colour(k) << "\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) os << detail::num(px(s.x[i])) << ',' << detail::num(py(s.y[i])) << ' ';
        os << "\"/>\n";
        const double ly = top + 14 + 16.0 * static_cast<double>(k);
        os << "<line x1=\"" << left + w + 10 << "\" x2=\"" << left + w + 30 << "\" y1=\"" << ly - 4 << "\" y2=\"" << ly - 4
           << "\" stroke=\"" << detail::colour(k) << "\" stroke-width=\"2\"/>\n";
        os << "<text x=\"" << left + w + 34 << "\" y=\"" << ly << "\">" << detail::escape(s.name) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace leadlag::plot
