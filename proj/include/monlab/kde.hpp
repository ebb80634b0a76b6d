#pragma once

#include <optional>
#include <string>
#include <vector>

#include "monlab/trajio.hpp"

namespace monlab {

// 2-d kernel density estimate with an isotropic Gaussian kernel.
class KdeModel {
public:
    KdeModel(std::vector<Point2> support_points, double bandwidth);

    double pdf(double x, double y) const;
    double bandwidth() const { return bandwidth_; }
    const std::vector<Point2>& support_points() const { return points_; }

private:
    std::vector<Point2> points_;
    double bandwidth_;
};

KdeModel kde_fit(const std::vector<Point2>& points, double bandwidth);

// Bandwidth maximizing the average validation log density; candidates are
// floored at h_floor, ties go to the smaller bandwidth.
double select_bandwidth(const std::vector<Point2>& train, const std::vector<Point2>& validation,
                        const std::vector<double>& bandwidth_grid, double h_floor = 0.05);

struct GridSpec2D {
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    int nx = 100, ny = 100;

    double dx() const { return (x1 - x0) / nx; }
    double dy() const { return (y1 - y0) / ny; }
    double cell_area() const { return dx() * dy(); }
    void validate() const {
        if (nx < 2 || ny < 2) throw std::invalid_argument("GridSpec2D: resolution must be >= 2x2");
        if (!(x1 > x0) || !(y1 > y0)) throw std::invalid_argument("GridSpec2D: empty extent");
    }
};

// bounding box of the points (plus one extra point) padded by pad
GridSpec2D auto_extent(const std::vector<Point2>& points, const Point2& include, double pad,
                       int nx, int ny);

// Cell masses on a 2-d grid, normalized to sum 1.
struct DensityGrid {
    GridSpec2D spec;
    std::vector<double> masses;  // row-major, x index major

    double mass_at(std::size_t ix, std::size_t iy) const {
        return masses[ix * static_cast<std::size_t>(spec.ny) + iy];
    }
};

// KDE evaluated at the cell centers, raised to exponent and normalized.
DensityGrid eval_on_grid(const KdeModel& m, const GridSpec2D& spec, double exponent);

// Log of (containing-cell mass / cell area). Zero and out-of-grid masses are
// floored at 1e-12 of the maximum cell mass, which keeps values finite
// without disturbing the ranking over exponents.
double grid_loglik(const DensityGrid& g, const Point2& point);

struct CompensationConfig {
    int n_sample = 1000;        // samples used per scene
    double alpha_split = 0.7;   // fit fraction; the rest selects the bandwidth
    std::vector<double> k_search;      // default: 25 linear values in [0.001, 3]
    int grid_nx = 100, grid_ny = 100;
    std::vector<double> bandwidth_grid;  // default: 10 log-spaced in [0.05, 1.0]
    double bandwidth_floor = 0.05;
    double pad_bandwidths = 3.0;  // grid extent padding, in bandwidths

    CompensationConfig();
    void validate() const;
};

struct CompensationCurve {
    int timestep = 0;  // 1-based; 0 marks a joint fit over all timesteps
    double k_best = 0.0;
    std::vector<double> k_values;
    std::vector<double> avg_loglik;
    int n_scenes = 0;
};

struct CompensationResult {
    std::vector<CompensationCurve> per_timestep;
    std::optional<CompensationCurve> joint;
};

// Compensation-parameter search: per scene, fit a KDE on the first
// alpha_split fraction of the timestep-t sample positions, select the
// bandwidth on the remainder, evaluate on an auto-extent grid, and score the
// ground-truth log likelihood for every exponent in k_search. The curve
// averages over scenes; ties break toward the smaller exponent.
CompensationCurve find_best_compensation(const SceneSet& scenes, int timestep,
                                         const CompensationConfig& cfg, int threads = 1);

// Single exponent fit jointly across all timesteps (log likelihoods summed
// over t, reported per scene-timestep pair).
CompensationCurve find_best_compensation_joint(const SceneSet& scenes,
                                               const CompensationConfig& cfg, int threads = 1);

// Average ground-truth log likelihood at one exponent.
double marginalized_loglik(const SceneSet& scenes, int timestep, double k_bar,
                           const CompensationConfig& cfg, int threads = 1);

// rows t,k_bar,avg_loglik (curves) and t,k_best (summary); joint rows use "joint"
void write_compensation_curves_csv(const CompensationResult& res, const std::string& path);
void write_compensation_summary_csv(const CompensationResult& res, const std::string& path);

}  // namespace monlab
