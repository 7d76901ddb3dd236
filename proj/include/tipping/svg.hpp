// Tiny deterministic SVG line/scatter plots. Text output only, fixed-point
// coordinates, no timestamps: identical inputs give identical bytes, so the
// figures are diffable in golden-file tests.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tipping/common.hpp"

namespace tipping::svg {

struct line_series {
    std::vector<double> x, y;
    std::string color = "#2c3e50";
};

struct scatter_series {
    std::vector<double> x, y;
    std::string color = "#2980b9";
};

struct panel {
    std::string title;
    std::string y_label;
    std::vector<line_series> lines;
    std::vector<scatter_series> points;
    std::vector<double> vlines;  // event markers, data x
    std::string vline_color = "#c0392b";
    std::optional<double> hline;  // threshold, data y
    std::string hline_color = "#8e44ad";
};

namespace detail {

struct range {
    double lo = 0, hi = 1;
    double span() const { return hi - lo; }
};

inline range find_range(const std::vector<double>& vs) {
    range r;
    if (vs.empty()) return r;
    r.lo = *std::min_element(vs.begin(), vs.end());
    r.hi = *std::max_element(vs.begin(), vs.end());
    if (!(r.hi > r.lo)) {  // flat data still needs a drawable band
        r.lo -= 0.5;
        r.hi += 0.5;
    }
    return r;
}

inline double nice_step(double span, int target_ticks = 5) {
    double raw = span / target_ticks;
    double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (raw <= m * mag) return m * mag;
    return 10.0 * mag;
}

inline std::string px(double v) { return format_fixed(v, 2); }

}  // namespace detail

// Renders stacked panels sharing one x axis. `comments` go into the file head
// as `<!-- ... -->` lines (parameter metadata).
inline void write_figure(std::ostream& out, const std::vector<panel>& panels,
                         const std::string& x_label,
                         const std::vector<std::string>& comments = {}, int width = 900,
                         int panel_height = 200) {
    const double margin_l = 64, margin_r = 16, margin_t = 28, margin_b = 34;
    const double plot_w = width - margin_l - margin_r;
    const int height = static_cast<int>(panels.size()) * panel_height;

    // Shared x range across panels.
    std::vector<double> all_x;
    for (const auto& p : panels) {
        for (const auto& l : p.lines) all_x.insert(all_x.end(), l.x.begin(), l.x.end());
        for (const auto& s : p.points) all_x.insert(all_x.end(), s.x.begin(), s.x.end());
        all_x.insert(all_x.end(), p.vlines.begin(), p.vlines.end());
    }
    auto xr = detail::find_range(all_x);

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    for (const auto& c : comments) out << "<!-- " << c << " -->\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";

    for (size_t pi = 0; pi < panels.size(); ++pi) {
        const auto& p = panels[pi];
        const double top = static_cast<double>(pi) * panel_height + margin_t;
        const double plot_h = panel_height - margin_t - margin_b;

        std::vector<double> all_y;
        for (const auto& l : p.lines) all_y.insert(all_y.end(), l.y.begin(), l.y.end());
        for (const auto& s : p.points) all_y.insert(all_y.end(), s.y.begin(), s.y.end());
        if (p.hline) all_y.push_back(*p.hline);
        auto yr = detail::find_range(all_y);

        auto sx = [&](double v) { return margin_l + (v - xr.lo) / xr.span() * plot_w; };
        auto sy = [&](double v) { return top + plot_h - (v - yr.lo) / yr.span() * plot_h; };

        out << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
        out << "<rect x=\"" << detail::px(margin_l) << "\" y=\"" << detail::px(top)
            << "\" width=\"" << detail::px(plot_w) << "\" height=\"" << detail::px(plot_h)
            << "\" fill=\"none\" stroke=\"#444444\"/>\n";
        if (!p.title.empty())
            out << "<text x=\"" << detail::px(margin_l) << "\" y=\"" << detail::px(top - 8)
                << "\" font-weight=\"bold\">" << p.title << "</text>\n";
        if (!p.y_label.empty())
            out << "<text x=\"4\" y=\"" << detail::px(top + 12) << "\" fill=\"#555555\">"
                << p.y_label << "</text>\n";

        double ystep = detail::nice_step(yr.span());
        for (double tick = std::ceil(yr.lo / ystep) * ystep; tick <= yr.hi + 1e-12;
             tick += ystep) {
            out << "<line x1=\"" << detail::px(margin_l - 4) << "\" y1=\"" << detail::px(sy(tick))
                << "\" x2=\"" << detail::px(margin_l) << "\" y2=\"" << detail::px(sy(tick))
                << "\" stroke=\"#444444\"/>\n";
            out << "<text x=\"" << detail::px(margin_l - 8) << "\" y=\""
                << detail::px(sy(tick) + 4) << "\" text-anchor=\"end\">"
                << format_general(tick, 6) << "</text>\n";
        }
        double xstep = detail::nice_step(xr.span(), 8);
        for (double tick = std::ceil(xr.lo / xstep) * xstep; tick <= xr.hi + 1e-12;
             tick += xstep) {
            out << "<line x1=\"" << detail::px(sx(tick)) << "\" y1=\""
                << detail::px(top + plot_h) << "\" x2=\"" << detail::px(sx(tick)) << "\" y2=\""
                << detail::px(top + plot_h + 4) << "\" stroke=\"#444444\"/>\n";
            out << "<text x=\"" << detail::px(sx(tick)) << "\" y=\""
                << detail::px(top + plot_h + 16) << "\" text-anchor=\"middle\">"
                << format_general(tick, 6) << "</text>\n";
        }
        if (pi + 1 == panels.size())
            out << "<text x=\"" << detail::px(margin_l + plot_w / 2) << "\" y=\""
                << detail::px(top + plot_h + 30) << "\" text-anchor=\"middle\">" << x_label
                << "</text>\n";

        if (p.hline)
            out << "<line x1=\"" << detail::px(margin_l) << "\" y1=\"" << detail::px(sy(*p.hline))
                << "\" x2=\"" << detail::px(margin_l + plot_w) << "\" y2=\""
                << detail::px(sy(*p.hline)) << "\" stroke=\"" << p.hline_color
                << "\" stroke-dasharray=\"6 3\"/>\n";
        for (double v : p.vlines)
            out << "<line x1=\"" << detail::px(sx(v)) << "\" y1=\"" << detail::px(top)
                << "\" x2=\"" << detail::px(sx(v)) << "\" y2=\"" << detail::px(top + plot_h)
                << "\" stroke=\"" << p.vline_color << "\" stroke-dasharray=\"4 3\"/>\n";
        for (const auto& l : p.lines) {
            if (l.x.empty()) continue;
            out << "<polyline fill=\"none\" stroke=\"" << l.color << "\" stroke-width=\"1.2\" points=\"";
            for (size_t i = 0; i < l.x.size(); ++i) {
                if (i) out << ' ';
                out << detail::px(sx(l.x[i])) << ',' << detail::px(sy(l.y[i]));
            }
            out << "\"/>\n";
        }
        for (const auto& s : p.points)
            for (size_t i = 0; i < s.x.size(); ++i)
                out << "<circle cx=\"" << detail::px(sx(s.x[i])) << "\" cy=\""
                    << detail::px(sy(s.y[i])) << "\" r=\"2.5\" fill=\"" << s.color << "\"/>\n";
        out << "</g>\n";
    }
    out << "</svg>\n";
}

}  // namespace tipping::svg
