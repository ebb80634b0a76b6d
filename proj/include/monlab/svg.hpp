#pragma once

#include <string>
#include <vector>

namespace monlab::svg {

struct Series {
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f77b4";
    std::string label;
};

// Minimal line/scatter plot writer; CSV stays the canonical output, these are
// best-effort companions.
class LinePlot {
public:
    LinePlot(std::string title, std::string x_label, std::string y_label);
    void add_series(Series s) { series_.push_back(std::move(s)); }
    void write(const std::string& path) const;

private:
    std::string title_, x_label_, y_label_;
    std::vector<Series> series_;
};

// Row-major (x-major) cell values rendered as a colored grid.
void write_heatmap(const std::vector<double>& values, int nx, int ny, const std::string& title,
                   const std::string& path);

}  // namespace monlab::svg
