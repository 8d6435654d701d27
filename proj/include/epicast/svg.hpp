#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "epicast/common.hpp"

namespace epicast {

struct SvgSeries {
    std::string label;
    std::string color;
    std::vector<double> x, y;
};

namespace detail {

inline std::string svg_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

inline std::string svg_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

} // namespace detail

/// Minimal static line chart. Deterministic text output; no external assets.
inline std::string render_line_chart(const std::string& title, const std::string& x_label,
                                     const std::string& y_label,
                                     const std::vector<SvgSeries>& series) {
    const double width = 720, height = 420;
    const double ml = 64, mr = 160, mt = 44, mb = 48;
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool any = false;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size()) fail(Errc::LengthMismatch, "series x/y lengths differ");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            if (!any) {
                xmin = xmax = s.x[i];
                ymin = ymax = s.y[i];
                any = true;
            } else {
                xmin = std::min(xmin, s.x[i]);
                xmax = std::max(xmax, s.x[i]);
                ymin = std::min(ymin, s.y[i]);
                ymax = std::max(ymax, s.y[i]);
            }
        }
    }
    if (xmax - xmin < 1e-12) xmax = xmin + 1.0;
    if (ymax - ymin < 1e-12) ymax = ymin + 1.0;
    const double pad = 0.06 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;
    const auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (width - ml - mr); };
    const auto py = [&](double y) {
        return height - mb - (y - ymin) / (ymax - ymin) * (height - mt - mb);
    };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + detail::svg_num(width) +
           "\" height=\"" + detail::svg_num(height) + "\" viewBox=\"0 0 " +
           detail::svg_num(width) + " " + detail::svg_num(height) + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += "<text x=\"" + detail::svg_num(width / 2) +
           "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
           detail::svg_escape(title) + "</text>\n";

    // axes with 5 ticks each
    for (int i = 0; i <= 5; ++i) {
        const double fx = xmin + (xmax - xmin) * i / 5.0;
        const double fy = ymin + (ymax - ymin) * i / 5.0;
        out += "<line x1=\"" + detail::svg_num(px(fx)) + "\" y1=\"" + detail::svg_num(py(ymin)) +
               "\" x2=\"" + detail::svg_num(px(fx)) + "\" y2=\"" + detail::svg_num(py(ymin) + 5) +
               "\" stroke=\"black\"/>\n";
        out += "<text x=\"" + detail::svg_num(px(fx)) + "\" y=\"" +
               detail::svg_num(py(ymin) + 20) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
               detail::svg_num(fx) + "</text>\n";
        out += "<line x1=\"" + detail::svg_num(ml - 5) + "\" y1=\"" + detail::svg_num(py(fy)) +
               "\" x2=\"" + detail::svg_num(ml) + "\" y2=\"" + detail::svg_num(py(fy)) +
               "\" stroke=\"black\"/>\n";
        out += "<text x=\"" + detail::svg_num(ml - 9) + "\" y=\"" + detail::svg_num(py(fy) + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
               detail::svg_num(fy) + "</text>\n";
    }
    out += "<line x1=\"" + detail::svg_num(ml) + "\" y1=\"" + detail::svg_num(py(ymin)) +
           "\" x2=\"" + detail::svg_num(width - mr) + "\" y2=\"" + detail::svg_num(py(ymin)) +
           "\" stroke=\"black\"/>\n";
    out += "<line x1=\"" + detail::svg_num(ml) + "\" y1=\"" + detail::svg_num(py(ymin)) +
           "\" x2=\"" + detail::svg_num(ml) + "\" y2=\"" + detail::svg_num(py(ymax)) +
           "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + detail::svg_num((ml + width - mr) / 2) + "\" y=\"" +
           detail::svg_num(height - 10) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
           detail::svg_escape(x_label) + "</text>\n";
    out += "<text x=\"16\" y=\"" + detail::svg_num((mt + height - mb) / 2) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 16 " +
           detail::svg_num((mt + height - mb) / 2) + ")\">" + detail::svg_escape(y_label) +
           "</text>\n";

    double legend_y = mt + 10;
    for (const auto& s : series) {
        std::string points;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            if (!points.empty()) points += " ";
            points += detail::svg_num(px(s.x[i])) + "," + detail::svg_num(py(s.y[i]));
        }
        out += "<polyline fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"2\" points=\"" +
               points + "\"/>\n";
        out += "<line x1=\"" + detail::svg_num(width - mr + 12) + "\" y1=\"" +
               detail::svg_num(legend_y) + "\" x2=\"" + detail::svg_num(width - mr + 36) +
               "\" y2=\"" + detail::svg_num(legend_y) + "\" stroke=\"" + s.color +
               "\" stroke-width=\"2\"/>\n";
        out += "<text x=\"" + detail::svg_num(width - mr + 42) + "\" y=\"" +
               detail::svg_num(legend_y + 4) + "\" font-family=\"sans-serif\" font-size=\"11\">" +
               detail::svg_escape(s.label) + "</text>\n";
        legend_y += 18;
    }
    out += "</svg>\n";
    return out;
}

} // namespace epicast
