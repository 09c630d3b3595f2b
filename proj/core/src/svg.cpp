#include "tmfm/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace tmfm::svg {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

std::string num(double v) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%.6g", v);
    return buffer;
}

struct AxisRange {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void include(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    bool valid() const { return lo <= hi; }
    void pad() {
        if (!valid()) {
            lo = 0.0;
            hi = 1.0;
            return;
        }
        if (lo == hi) {
            lo -= 0.5;
            hi += 0.5;
            return;
        }
        const double margin = 0.05 * (hi - lo);
        lo -= margin;
        hi += margin;
    }
};

double transform(double v, bool log_scale) { return log_scale ? std::log10(v) : v; }

bool usable(double v, bool log_scale) {
    return std::isfinite(v) && (!log_scale || v > 0.0);
}

// Round tick positions in the transformed coordinate.
std::vector<double> make_ticks(double lo, double hi, int target) {
    std::vector<double> ticks;
    if (!(hi > lo)) return ticks;
    const double raw_step = (hi - lo) / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw_step)));
    double step = mag;
    for (double mult : {1.0, 2.0, 5.0, 10.0}) {
        if (mag * mult >= raw_step) {
            step = mag * mult;
            break;
        }
    }
    const double first = std::ceil(lo / step) * step;
    for (double v = first; v <= hi + 1e-12 * step; v += step) ticks.push_back(v);
    return ticks;
}

std::string escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string render_chart(const ChartSpec& spec, std::span<const Series> series) {
    const int margin_left = 70;
    const int margin_right = 20;
    const int margin_top = 40;
    const int margin_bottom = 55;
    const double plot_w = spec.width - margin_left - margin_right;
    const double plot_h = spec.height - margin_top - margin_bottom;

    AxisRange xr;
    AxisRange yr;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (usable(s.x[i], spec.log_x) && usable(s.y[i], spec.log_y)) {
                xr.include(transform(s.x[i], spec.log_x));
                yr.include(transform(s.y[i], spec.log_y));
            }
        }
    }
    xr.pad();
    yr.pad();

    const auto px = [&](double v) {
        return margin_left + (transform(v, spec.log_x) - xr.lo) / (xr.hi - xr.lo) * plot_w;
    };
    const auto py = [&](double v) {
        return margin_top + plot_h - (transform(v, spec.log_y) - yr.lo) / (yr.hi - yr.lo) * plot_h;
    };

    std::ostringstream out;
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << spec.width << "' height='"
        << spec.height << "' font-family='sans-serif' font-size='12'>\n";
    out << "<rect width='100%' height='100%' fill='white'/>\n";
    out << "<text x='" << spec.width / 2 << "' y='20' text-anchor='middle' font-size='15'>"
        << escape(spec.title) << "</text>\n";

    // Frame.
    out << "<rect x='" << margin_left << "' y='" << margin_top << "' width='" << plot_w
        << "' height='" << plot_h << "' fill='none' stroke='#444'/>\n";

    for (double tick : make_ticks(xr.lo, xr.hi, 6)) {
        const double x = margin_left + (tick - xr.lo) / (xr.hi - xr.lo) * plot_w;
        out << "<line x1='" << num(x) << "' y1='" << margin_top + plot_h << "' x2='" << num(x)
            << "' y2='" << margin_top + plot_h + 4 << "' stroke='#444'/>\n";
        const double value = spec.log_x ? std::pow(10.0, tick) : tick;
        out << "<text x='" << num(x) << "' y='" << margin_top + plot_h + 18
            << "' text-anchor='middle'>" << num(value) << "</text>\n";
    }
    for (double tick : make_ticks(yr.lo, yr.hi, 6)) {
        const double y = margin_top + plot_h - (tick - yr.lo) / (yr.hi - yr.lo) * plot_h;
        out << "<line x1='" << margin_left - 4 << "' y1='" << num(y) << "' x2='" << margin_left
            << "' y2='" << num(y) << "' stroke='#444'/>\n";
        const double value = spec.log_y ? std::pow(10.0, tick) : tick;
        out << "<text x='" << margin_left - 8 << "' y='" << num(y + 4)
            << "' text-anchor='end'>" << num(value) << "</text>\n";
    }
    out << "<text x='" << margin_left + plot_w / 2 << "' y='" << spec.height - 12
        << "' text-anchor='middle'>" << escape(spec.x_label) << "</text>\n";
    out << "<text x='18' y='" << margin_top + plot_h / 2
        << "' text-anchor='middle' transform='rotate(-90 18 " << margin_top + plot_h / 2 << ")'>"
        << escape(spec.y_label) << "</text>\n";

    if (spec.diagonal_guide) {
        const double lo = std::max(xr.lo, yr.lo);
        const double hi = std::min(xr.hi, yr.hi);
        if (hi > lo) {
            const double x1 = margin_left + (lo - xr.lo) / (xr.hi - xr.lo) * plot_w;
            const double x2 = margin_left + (hi - xr.lo) / (xr.hi - xr.lo) * plot_w;
            const double y1 = margin_top + plot_h - (lo - yr.lo) / (yr.hi - yr.lo) * plot_h;
            const double y2 = margin_top + plot_h - (hi - yr.lo) / (yr.hi - yr.lo) * plot_h;
            out << "<line x1='" << num(x1) << "' y1='" << num(y1) << "' x2='" << num(x2)
                << "' y2='" << num(y2) << "' stroke='#999' stroke-dasharray='5,4'/>\n";
        }
    }

    int color_index = 0;
    double legend_y = margin_top + 14;
    for (const auto& s : series) {
        const char* color = kPalette[color_index % 8];
        ++color_index;
        if (s.draw_line) {
            std::ostringstream pts;
            bool first = true;
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!usable(s.x[i], spec.log_x) || !usable(s.y[i], spec.log_y)) continue;
                if (!first) pts << ' ';
                pts << num(px(s.x[i])) << ',' << num(py(s.y[i]));
                first = false;
            }
            out << "<polyline points='" << pts.str() << "' fill='none' stroke='" << color
                << "' stroke-width='1.8'/>\n";
        }
        if (s.draw_markers) {
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!usable(s.x[i], spec.log_x) || !usable(s.y[i], spec.log_y)) continue;
                out << "<circle cx='" << num(px(s.x[i])) << "' cy='" << num(py(s.y[i]))
                    << "' r='3' fill='" << color << "'/>\n";
            }
        }
        out << "<rect x='" << margin_left + 10 << "' y='" << num(legend_y - 8)
            << "' width='14' height='4' fill='" << color << "'/>\n";
        out << "<text x='" << margin_left + 30 << "' y='" << num(legend_y) << "'>"
            << escape(s.label) << "</text>\n";
        legend_y += 16;
    }
    out << "</svg>\n";
    return out.str();
}

std::string render_histogram_panels(const std::string& title,
                                    std::span<const HistogramPanel> panels, int width,
                                    int panel_height) {
    const int margin_left = 55;
    const int margin_right = 15;
    const int margin_top = 36;
    const int per_panel_gap = 26;
    const int height = margin_top +
                       static_cast<int>(panels.size()) * (panel_height + per_panel_gap) + 20;
    const double plot_w = width - margin_left - margin_right;

    std::ostringstream out;
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
        << "' font-family='sans-serif' font-size='12'>\n";
    out << "<rect width='100%' height='100%' fill='white'/>\n";
    out << "<text x='" << width / 2 << "' y='20' text-anchor='middle' font-size='15'>"
        << escape(title) << "</text>\n";

    int top = margin_top;
    for (const auto& panel : panels) {
        double max_height = 0.0;
        for (double h : panel.heights) max_height = std::max(max_height, h);
        if (max_height <= 0.0) max_height = 1.0;
        const double lo = panel.edges.front();
        const double hi = panel.edges.back();

        out << "<text x='" << margin_left << "' y='" << top - 6 << "'>" << escape(panel.label)
            << "</text>\n";
        out << "<rect x='" << margin_left << "' y='" << top << "' width='" << plot_w
            << "' height='" << panel_height << "' fill='none' stroke='#444'/>\n";
        for (std::size_t b = 0; b < panel.heights.size(); ++b) {
            const double x0 = margin_left + (panel.edges[b] - lo) / (hi - lo) * plot_w;
            const double x1 = margin_left + (panel.edges[b + 1] - lo) / (hi - lo) * plot_w;
            const double h = panel.heights[b] / max_height * (panel_height - 6);
            if (h <= 0.0) continue;
            out << "<rect x='" << num(x0) << "' y='" << num(top + panel_height - h) << "' width='"
                << num(std::max(x1 - x0 - 0.5, 0.5)) << "' height='" << num(h)
                << "' fill='#1f77b4'/>\n";
        }
        for (double tick : {lo, 0.5 * (lo + hi), hi}) {
            const double x = margin_left + (tick - lo) / (hi - lo) * plot_w;
            out << "<text x='" << num(x) << "' y='" << top + panel_height + 16
                << "' text-anchor='middle'>" << num(tick) << "</text>\n";
        }
        top += panel_height + per_panel_gap;
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace tmfm::svg
