#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bscript {

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    double x_min = 0.0;
    double x_max = 1.0;
    double y_min = 0.0;
    double y_max = 1.0;
    /// Optional dashed horizontal reference line.
    std::optional<double> reference_y;
};

/// Standalone SVG with axes, four ticks per axis and one polyline.
std::string line_plot_svg(const std::vector<std::pair<double, double>>& points, const PlotSpec& spec);

}  // namespace bscript
