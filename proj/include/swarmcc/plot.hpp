#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace swarmcc {

// Trailing rolling mean; entry i averages the last min(i+1, window) values.
inline std::vector<double> rolling_mean(const std::vector<double>& xs, int window) {
    if (window < 1) throw std::invalid_argument("rolling_mean: window must be >= 1");
    std::vector<double> out(xs.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        acc += xs[i];
        if (i >= static_cast<std::size_t>(window)) acc -= xs[i - window];
        out[i] = acc / static_cast<double>(std::min<std::size_t>(i + 1, window));
    }
    return out;
}

struct Series {
    std::string label;
    std::vector<double> x, y;
};

// Minimal self-contained SVG line chart, enough for the training figures.
inline void render_line_chart(const std::string& path, const std::string& title,
                              const std::string& x_label, const std::string& y_label,
                              const std::vector<Series>& series,
                              std::optional<double> reference_line = std::nullopt) {
    static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                     "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    const double width = 800, height = 500;
    const double ml = 70, mr = 20, mt = 40, mb = 55;
    const double pw = width - ml - mr, ph = height - mt - mb;

    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const Series& s : series) {
        for (double v : s.x) { xmin = std::min(xmin, v); xmax = std::max(xmax, v); }
        for (double v : s.y) { ymin = std::min(ymin, v); ymax = std::max(ymax, v); }
    }
    if (reference_line) {
        ymin = std::min(ymin, *reference_line);
        ymax = std::max(ymax, *reference_line);
    }
    if (xmin > xmax) { xmin = 0; xmax = 1; }
    if (ymin > ymax) { ymin = 0; ymax = 1; }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return mt + ph - (y - ymin) / (ymax - ymin) * ph; };
    auto num = [](double v) {
        char b[32];
        std::snprintf(b, sizeof(b), "%.4g", v);
        return std::string(b);
    };

    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
      << "' viewBox='0 0 " << width << " " << height << "'>\n";
    f << "<rect width='100%' height='100%' fill='white'/>\n";
    f << "<text x='" << width / 2 << "' y='24' text-anchor='middle' font-size='16' "
      << "font-family='sans-serif'>" << title << "</text>\n";

    const int ticks = 6;
    f << "<g font-size='11' font-family='sans-serif' fill='#333'>\n";
    for (int i = 0; i <= ticks; ++i) {
        const double xv = xmin + (xmax - xmin) * i / ticks;
        const double yv = ymin + (ymax - ymin) * i / ticks;
        f << "<line x1='" << px(xv) << "' y1='" << mt << "' x2='" << px(xv) << "' y2='"
          << mt + ph << "' stroke='#e0e0e0'/>\n";
        f << "<line x1='" << ml << "' y1='" << py(yv) << "' x2='" << ml + pw << "' y2='"
          << py(yv) << "' stroke='#e0e0e0'/>\n";
        f << "<text x='" << px(xv) << "' y='" << mt + ph + 16 << "' text-anchor='middle'>"
          << num(xv) << "</text>\n";
        f << "<text x='" << ml - 6 << "' y='" << py(yv) + 4 << "' text-anchor='end'>" << num(yv)
          << "</text>\n";
    }
    f << "</g>\n";
    f << "<rect x='" << ml << "' y='" << mt << "' width='" << pw << "' height='" << ph
      << "' fill='none' stroke='#333'/>\n";
    f << "<text x='" << ml + pw / 2 << "' y='" << height - 12
      << "' text-anchor='middle' font-size='13' font-family='sans-serif'>" << x_label
      << "</text>\n";
    f << "<text x='16' y='" << mt + ph / 2 << "' text-anchor='middle' font-size='13' "
      << "font-family='sans-serif' transform='rotate(-90 16 " << mt + ph / 2 << ")'>" << y_label
      << "</text>\n";

    if (reference_line) {
        f << "<line x1='" << ml << "' y1='" << py(*reference_line) << "' x2='" << ml + pw
          << "' y2='" << py(*reference_line)
          << "' stroke='#555' stroke-dasharray='6,4' stroke-width='1.5'/>\n";
    }

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
        f << "<polyline fill='none' stroke='" << color << "' stroke-width='1.6' points='";
        for (std::size_t i = 0; i < series[s].x.size(); ++i) {
            f << px(series[s].x[i]) << ',' << py(series[s].y[i]);
            if (i + 1 < series[s].x.size()) f << ' ';
        }
        f << "'/>\n";
        const double ly = mt + 16 + 16 * static_cast<double>(s);
        f << "<line x1='" << ml + 10 << "' y1='" << ly - 4 << "' x2='" << ml + 34 << "' y2='"
          << ly - 4 << "' stroke='" << color << "' stroke-width='2'/>\n";
        f << "<text x='" << ml + 40 << "' y='" << ly
          << "' font-size='12' font-family='sans-serif'>" << series[s].label << "</text>\n";
    }
    f << "</svg>\n";
}

}  // namespace swarmcc
