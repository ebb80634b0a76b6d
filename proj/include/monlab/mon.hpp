#pragma once

#include <string>
#include <vector>

#include "monlab/densities.hpp"

namespace monlab {

enum class Distance { euclidean_l2 };

struct MonConfig {
    int n_candidates = 256;   // N: candidates per draw
    int repetitions = 20;     // R: independent draws averaged per target point
    std::uint64_t seed = 0;
    Distance distance = Distance::euclidean_l2;

    void validate() const {
        if (n_candidates < 1) throw std::invalid_argument("MonConfig: N must be >= 1");
        if (repetitions < 1) throw std::invalid_argument("MonConfig: R must be >= 1");
    }
};

struct MonEstimate {
    double value = 0.0;
    double std_error = 0.0;
    MonConfig config;
};

// One MoN draw: the minimum L2 distance between x_star and N iid samples
// from p. The candidate stream is a fixed function of draw_seed, so a larger
// N extends the same prefix of candidates.
double mon_draw(const Density& p, std::span<const double> x_star, const MonConfig& cfg,
                std::uint64_t draw_seed);

// Average of R independent mon_draws; per-repetition seeds are derived from
// (cfg.seed, hash of x_star, repetition index).
MonEstimate emon_estimate(const Density& p, std::span<const double> x_star, const MonConfig& cfg,
                          int threads = 1);

// Closed-form expected minimum distance when z samples fall uniformly in a
// bin of half-width epsilon and the target sits at x_star_offset from the
// bin center: (eps / (z+1)) * (1 + |offset/eps|^(z+1)).
double expected_min_in_bin(double epsilon, double x_star_offset, int z);

// Dataset-level MoN loss: emon averaged over ground-truth points. Invariant
// under permutation of the dataset (repetition streams are keyed by point
// content, and the reduction is order-independent). With R == 1 the reported
// std_error falls back to the across-point spread, an upper bound.
MonEstimate mon_loss_estimate(const Density& p, const SampleSet& ground_truth,
                              const MonConfig& cfg, int threads = 1);

struct ExponentScan {
    double k_star = 0.0;
    std::vector<double> k_grid;
    std::vector<MonEstimate> losses;  // aligned with k_grid
};

// default search grid: 25 linear values on [0.3, 1.5]
std::vector<double> default_k_grid();
std::vector<double> linspace(double lo, double hi, int count);

// Grid search for the exponent k whose power-family member minimizes the
// dataset MoN loss. All k share the same candidate uniform streams (common
// random numbers), which keeps adjacent losses tightly coupled. Ties break
// toward the smaller k.
ExponentScan minimizing_exponent_search(const DensityPtr& base, const SampleSet& ground_truth,
                                        const std::vector<double>& k_grid, const MonConfig& cfg,
                                        int threads = 1);

struct NScanEntry {
    int n = 0;
    ExponentScan scan;
};

// One minimizing_exponent_search per N in ascending n_list.
std::vector<NScanEntry> k_vs_n_scan(const DensityPtr& base, const SampleSet& ground_truth,
                                    const std::vector<int>& n_list,
                                    const std::vector<double>& k_grid, const MonConfig& cfg,
                                    int threads = 1);

// rows: N,k,loss,std_error
void write_scan_csv(const std::vector<NScanEntry>& entries, const std::string& path);

}  // namespace monlab
