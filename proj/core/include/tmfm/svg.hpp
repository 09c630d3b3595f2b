// Static SVG rendering of the CSV outputs: line charts (optionally log-log),
// scatter plots with a reference diagonal, and stacked histogram panels.
// Plots are a viewing convenience; the CSVs are the contract.

#ifndef TMFM_SVG_HPP
#define TMFM_SVG_HPP

#include <span>
#include <string>
#include <vector>

namespace tmfm::svg {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    bool draw_line = true;
    bool draw_markers = true;
};

struct ChartSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    int width = 760;
    int height = 480;
    bool diagonal_guide = false;  // y = x reference line (scatter use)
};

// Nonpositive values are dropped from log axes.
std::string render_chart(const ChartSpec& spec, std::span<const Series> series);

struct HistogramPanel {
    std::string label;
    std::vector<double> edges;    // size bins + 1
    std::vector<double> heights;  // size bins
};

std::string render_histogram_panels(const std::string& title,
                                    std::span<const HistogramPanel> panels, int width = 760,
                                    int panel_height = 150);

}  // namespace tmfm::svg

#endif  // TMFM_SVG_HPP
