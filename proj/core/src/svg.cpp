#include "bscript/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace bscript {

namespace {

constexpr double kWidth = 640;
constexpr double kHeight = 360;
constexpr double kLeft = 60;
constexpr double kRight = 20;
constexpr double kTop = 40;
constexpr double kBottom = 50;

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string escape(const std::string& s)
{
    std::string out;
    for (const char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string line_plot_svg(const std::vector<std::pair<double, double>>& points, const PlotSpec& spec)
{
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    const double x_span = spec.x_max > spec.x_min ? spec.x_max - spec.x_min : 1.0;
    const double y_span = spec.y_max > spec.y_min ? spec.y_max - spec.y_min : 1.0;
    const auto px = [&](double x) { return kLeft + (std::clamp(x, spec.x_min, spec.x_max) - spec.x_min) / x_span * plot_w; };
    const auto py = [&](double y) { return kTop + plot_h - (std::clamp(y, spec.y_min, spec.y_max) - spec.y_min) / y_span * plot_h; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"16\">" << escape(spec.title) << "</text>\n";
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << kLeft + plot_w << "\" y2=\""
        << kTop + plot_h << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kTop + plot_h
        << "\" stroke=\"black\"/>\n";

    for (int i = 0; i <= 4; ++i) {
        const double xv = spec.x_min + x_span * i / 4.0;
        const double yv = spec.y_min + y_span * i / 4.0;
        svg << "<text x=\"" << px(xv) << "\" y=\"" << kTop + plot_h + 16
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(xv) << "</text>\n";
        svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << py(yv) + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(yv) << "</text>\n";
    }
    svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 10
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << escape(spec.x_label)
        << "</text>\n";
    svg << "<text x=\"14\" y=\"" << kTop + plot_h / 2 << "\" transform=\"rotate(-90 14 " << kTop + plot_h / 2
        << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << escape(spec.y_label)
        << "</text>\n";

    if (spec.reference_y) {
        svg << "<line x1=\"" << kLeft << "\" y1=\"" << py(*spec.reference_y) << "\" x2=\"" << kLeft + plot_w
            << "\" y2=\"" << py(*spec.reference_y) << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
    }

    svg << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : points)
        svg << fmt(px(x)) << ',' << fmt(py(y)) << ' ';
    svg << "\"/>\n</svg>\n";
    return svg.str();
}

}  // namespace bscript
