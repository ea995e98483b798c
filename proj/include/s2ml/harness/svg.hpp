#pragma once

#include "s2ml/harness/trace.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <string>

namespace s2ml {

enum class PlotMetric { optimality_gap, test_accuracy };

/// Floor applied to gaps before taking logarithms.
inline constexpr double kGapFloor = 1e-16;

namespace detail {

inline std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

inline std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace detail

/// Standalone SVG 1.1 line chart of `metric` against wall_time_s, one
/// polyline per solver (its lowest-numbered repetition). Gaps use a log10
/// axis with decade ticks; accuracy a linear axis.
inline std::string convergence_svg(const std::vector<SolverTrace>& traces, PlotMetric metric) {
    if (traces.empty()) throw Error("plot: no traces");

    // First repetition of each solver, in order of first appearance.
    std::vector<const SolverTrace*> lines;
    for (const auto& t : traces) {
        auto it = std::find_if(lines.begin(), lines.end(), [&](auto* l) { return l->solver == t.solver; });
        if (it == lines.end())
            lines.push_back(&t);
        else if (t.rep < (*it)->rep)
            *it = &t;
    }

    const bool log_y = metric == PlotMetric::optimality_gap;
    struct Series {
        const SolverTrace* trace;
        std::vector<std::pair<double, double>> pts;
    };
    std::vector<Series> series;
    double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
    double y_min = x_min, y_max = -x_min;
    for (const auto* t : lines) {
        Series s{t, {}};
        for (const auto& r : t->records) {
            double y;
            if (log_y) {
                y = std::log10(std::max(r.optimality_gap, kGapFloor));
            } else {
                if (!r.test_accuracy) continue;
                y = *r.test_accuracy;
            }
            s.pts.emplace_back(r.wall_time_s, y);
            x_min = std::min(x_min, r.wall_time_s);
            x_max = std::max(x_max, r.wall_time_s);
            y_min = std::min(y_min, y);
            y_max = std::max(y_max, y);
        }
        if (!s.pts.empty()) series.push_back(std::move(s));
    }
    if (series.empty()) throw Error("plot: no data points for the requested metric");
    if (!(x_max > x_min)) throw Error("plot: degenerate time range (all wall_time_s equal)");

    if (log_y) {
        y_min = std::floor(y_min);
        y_max = std::ceil(y_max);
        if (y_max <= y_min) y_max = y_min + 1.0;
    } else if (y_max - y_min < 1e-12) {
        y_min -= 0.05;
        y_max += 0.05;
    }

    constexpr double kWidth = 720, kHeight = 440;
    constexpr double kLeft = 80, kRight = 170, kTop = 30, kBottom = 60;
    const double plot_w = kWidth - kLeft - kRight, plot_h = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * plot_w; };
    auto py = [&](double y) { return kTop + (y_max - y) / (y_max - y_min) * plot_h; };

    static constexpr std::array<const char*, 8> kColors = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                           "#9467bd", "#8c564b", "#e377c2", "#17becf"};

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"720\" height=\"440\" "
           "viewBox=\"0 0 720 440\">\n";
    svg += "<rect x=\"0\" y=\"0\" width=\"720\" height=\"440\" fill=\"white\"/>\n";
    svg += "<g font-family=\"sans-serif\" font-size=\"12\">\n";
    svg += "<rect x=\"" + detail::fmt("%.2f", kLeft) + "\" y=\"" + detail::fmt("%.2f", kTop) + "\" width=\"" +
           detail::fmt("%.2f", plot_w) + "\" height=\"" + detail::fmt("%.2f", plot_h) +
           "\" fill=\"none\" stroke=\"black\"/>\n";

    // y ticks
    std::vector<double> y_ticks;
    if (log_y) {
        const double decades = y_max - y_min;
        const double step = decades > 16 ? std::ceil(decades / 16) : 1.0;
        for (double e = y_min; e <= y_max + 1e-9; e += step) y_ticks.push_back(e);
    } else {
        for (int k = 0; k <= 4; ++k) y_ticks.push_back(y_min + (y_max - y_min) * k / 4.0);
    }
    for (double y : y_ticks) {
        const std::string yy = detail::fmt("%.2f", py(y));
        const std::string label = log_y ? "1e" + std::to_string(static_cast<int>(std::lround(y))) : detail::fmt("%.3g", y);
        svg += "<line x1=\"" + detail::fmt("%.2f", kLeft - 5) + "\" y1=\"" + yy + "\" x2=\"" +
               detail::fmt("%.2f", kLeft) + "\" y2=\"" + yy + "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + detail::fmt("%.2f", kLeft - 8) + "\" y=\"" + yy +
               "\" text-anchor=\"end\" dominant-baseline=\"middle\">" + label + "</text>\n";
    }

    // x ticks
    for (int k = 0; k <= 4; ++k) {
        const double x = x_min + (x_max - x_min) * k / 4.0;
        const std::string xx = detail::fmt("%.2f", px(x));
        svg += "<line x1=\"" + xx + "\" y1=\"" + detail::fmt("%.2f", kTop + plot_h) + "\" x2=\"" + xx +
               "\" y2=\"" + detail::fmt("%.2f", kTop + plot_h + 5) + "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + xx + "\" y=\"" + detail::fmt("%.2f", kTop + plot_h + 20) +
               "\" text-anchor=\"middle\">" + detail::fmt("%.3g", x) + "</text>\n";
    }

    svg += "<text x=\"" + detail::fmt("%.2f", kLeft + plot_w / 2) + "\" y=\"" + detail::fmt("%.2f", kHeight - 15) +
           "\" text-anchor=\"middle\">training time (s)</text>\n";
    svg += "<text x=\"20\" y=\"" + detail::fmt("%.2f", kTop + plot_h / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 20 " +
           detail::fmt("%.2f", kTop + plot_h / 2) + ")\">" +
           (log_y ? std::string("optimality gap") : std::string("test accuracy")) + "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const char* color = kColors[k % kColors.size()];
        std::string points;
        for (const auto& [x, y] : series[k].pts) {
            if (!points.empty()) points += ' ';
            points += detail::fmt("%.2f", px(x)) + "," + detail::fmt("%.2f", py(y));
        }
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"" +
               points + "\"/>\n";

        const double ly = kTop + 10 + 20.0 * static_cast<double>(k);
        const double lx = kLeft + plot_w + 15;
        svg += "<line x1=\"" + detail::fmt("%.2f", lx) + "\" y1=\"" + detail::fmt("%.2f", ly) + "\" x2=\"" +
               detail::fmt("%.2f", lx + 25) + "\" y2=\"" + detail::fmt("%.2f", ly) + "\" stroke=\"" + color +
               "\" stroke-width=\"1.5\"/>\n";
        svg += "<text x=\"" + detail::fmt("%.2f", lx + 32) + "\" y=\"" + detail::fmt("%.2f", ly) +
               "\" dominant-baseline=\"middle\">" + detail::xml_escape(series[k].trace->solver) + "</text>\n";
    }
    svg += "</g>\n</svg>\n";
    return svg;
}

inline void render_convergence_svg(const std::vector<SolverTrace>& traces, PlotMetric metric,
                                   const std::string& path) {
    const std::string svg = convergence_svg(traces, metric);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write '" + path + "'");
    f << svg;
    if (!f) throw Error("write failed on '" + path + "'");
}

}  // namespace s2ml
