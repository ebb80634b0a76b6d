#include "monlab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace monlab::svg {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

constexpr double kW = 640, kH = 440;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};

}  // namespace

LinePlot::LinePlot(std::string title, std::string x_label, std::string y_label)
    : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

void LinePlot::write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);

    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool first = true;
    for (const auto& s : series_)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (first) {
                xmin = xmax = s.x[i];
                ymin = ymax = s.y[i];
                first = false;
            }
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    if (xmax <= xmin) xmax = xmin + 1;
    if (ymax <= ymin) ymax = ymin + 1;
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    const double pw = kW - kLeft - kRight, ph = kH - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return kTop + ph - (y - ymin) / (ymax - ymin) * ph; };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
        << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
        << title_ << "</text>\n";
    out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\""
        << ph << "\" fill=\"none\" stroke=\"#333\"/>\n";

    for (int i = 0; i <= 4; ++i) {
        const double fx = xmin + (xmax - xmin) * i / 4.0;
        const double fy = ymin + (ymax - ymin) * i / 4.0;
        out << "<text x=\"" << num(px(fx)) << "\" y=\"" << kTop + ph + 18
            << "\" text-anchor=\"middle\" font-size=\"11\">" << num(fx) << "</text>\n";
        out << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(py(fy) + 4)
            << "\" text-anchor=\"end\" font-size=\"11\">" << num(fy) << "</text>\n";
        out << "<line x1=\"" << kLeft << "\" y1=\"" << num(py(fy)) << "\" x2=\"" << kLeft + pw
            << "\" y2=\"" << num(py(fy)) << "\" stroke=\"#ddd\"/>\n";
    }
    out << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 12
        << "\" text-anchor=\"middle\" font-size=\"13\">" << x_label_ << "</text>\n";
    out << "<text x=\"16\" y=\"" << kTop + ph / 2
        << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
        << kTop + ph / 2 << ")\">" << y_label_ << "</text>\n";

    std::size_t ci = 0;
    double legend_y = kTop + 14;
    for (const auto& s : series_) {
        const std::string color = s.color.empty() ? kPalette[ci % 6] : s.color;
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (i) out << ' ';
            out << num(px(s.x[i])) << ',' << num(py(s.y[i]));
        }
        out << "\"/>\n";
        if (!s.label.empty()) {
            out << "<rect x=\"" << kLeft + pw - 150 << "\" y=\"" << legend_y - 8
                << "\" width=\"14\" height=\"3\" fill=\"" << color << "\"/>\n";
            out << "<text x=\"" << kLeft + pw - 132 << "\" y=\"" << legend_y
                << "\" font-size=\"11\">" << s.label << "</text>\n";
            legend_y += 16;
        }
        ++ci;
    }
    out << "</svg>\n";
}

namespace {

// three-stop color ramp, dark blue -> teal -> yellow
void ramp(double t, int rgb[3]) {
    const int stops[3][3] = {{68, 1, 84}, {33, 145, 140}, {253, 231, 37}};
    t = std::clamp(t, 0.0, 1.0);
    const int seg = t < 0.5 ? 0 : 1;
    const double f = (t - 0.5 * seg) * 2.0;
    for (int c = 0; c < 3; ++c)
        rgb[c] = static_cast<int>(std::lround(stops[seg][c] + f * (stops[seg + 1][c] - stops[seg][c])));
}

}  // namespace

void write_heatmap(const std::vector<double>& values, int nx, int ny, const std::string& title,
                   const std::string& path) {
    if (nx < 1 || ny < 1 || values.size() != static_cast<std::size_t>(nx) * ny)
        throw std::invalid_argument("write_heatmap: shape mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    const double vmax = *std::max_element(values.begin(), values.end());
    const double cell = std::min(520.0 / nx, 520.0 / ny);
    const double w = cell * nx + 40, h = cell * ny + 60;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w) << "\" height=\""
        << num(h) << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << num(w / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
        << title << "</text>\n";
    for (int ix = 0; ix < nx; ++ix)
        for (int iy = 0; iy < ny; ++iy) {
            int rgb[3];
            const double v = values[static_cast<std::size_t>(ix) * ny + iy];
            ramp(vmax > 0 ? v / vmax : 0.0, rgb);
            char color[10];
            std::snprintf(color, sizeof(color), "#%02x%02x%02x", rgb[0], rgb[1], rgb[2]);
            // y axis points up
            out << "<rect x=\"" << num(20 + ix * cell) << "\" y=\""
                << num(40 + (ny - 1 - iy) * cell) << "\" width=\"" << num(cell + 0.5)
                << "\" height=\"" << num(cell + 0.5) << "\" fill=\"" << color << "\"/>\n";
        }
    out << "</svg>\n";
}

}  // namespace monlab::svg
