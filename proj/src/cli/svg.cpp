#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "qhj/cli.hpp"

namespace qhj::cli {

namespace {

constexpr double width = 640.0;
constexpr double height = 400.0;
constexpr double margin = 50.0;
const char* const palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

}  // namespace

std::string render_svg(const std::string& title, const CsvTable& table) {
    const auto& x = table.columns.at(0);
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0;
    double y0 = x0, y1 = -x0;
    for (double v : x)
        if (std::isfinite(v)) x0 = std::min(x0, v), x1 = std::max(x1, v);
    for (std::size_t c = 1; c < table.columns.size(); ++c)
        for (double v : table.columns[c])
            if (std::isfinite(v)) y0 = std::min(y0, v), y1 = std::max(y1, v);
    if (!(x1 > x0)) x1 = x0 + 1.0;
    if (!(y1 > y0)) y1 = y0 + 1.0;
    auto px = [&](double v) { return margin + (v - x0) / (x1 - x0) * (width - 2 * margin); };
    auto py = [&](double v) { return height - margin - (v - y0) / (y1 - y0) * (height - 2 * margin); };

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
    s << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
    s << "<g stroke=\"black\" fill=\"none\"><rect x=\"" << margin << "\" y=\"" << margin << "\" width=\""
      << width - 2 * margin << "\" height=\"" << height - 2 * margin << "\"/></g>\n";
    s << "<g font-size=\"10\">\n";
    for (int k = 0; k <= 4; ++k) {
        const double xv = x0 + (x1 - x0) * k / 4.0;
        const double yv = y0 + (y1 - y0) * k / 4.0;
        s << "<text x=\"" << px(xv) << "\" y=\"" << height - margin + 14 << "\" text-anchor=\"middle\">" << fmt(xv)
          << "</text>\n";
        s << "<text x=\"" << margin - 4 << "\" y=\"" << py(yv) + 3 << "\" text-anchor=\"end\">" << fmt(yv)
          << "</text>\n";
    }
    s << "</g>\n";
    for (std::size_t c = 1; c < table.columns.size(); ++c) {
        const char* colour = palette[(c - 1) % std::size(palette)];
        s << "<path fill=\"none\" stroke=\"" << colour << "\" d=\"";
        bool pen = false;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double v = table.columns[c][i];
            if (!std::isfinite(v) || !std::isfinite(x[i])) {
                pen = false;
                continue;
            }
            s << (pen ? 'L' : 'M') << px(x[i]) << ' ' << py(v) << ' ';
            pen = true;
        }
        s << "\"/>\n";
        s << "<text x=\"" << width - margin + 4 << "\" y=\"" << margin + 14.0 * static_cast<double>(c)
          << "\" font-size=\"10\" fill=\"" << colour << "\">" << table.header[c] << "</text>\n";
    }
    s << "</svg>\n";
    return s.str();
}

}  // namespace qhj::cli
