#pragma once

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "monlab/common.hpp"

namespace monlab {

// Regular binning grid in n dimensions.
struct GridSpec {
    std::vector<double> origin;  // lower corner
    std::vector<double> width;   // bin width per dimension
    std::vector<int> shape;      // bin count per dimension

    int dim() const { return static_cast<int>(origin.size()); }
    std::size_t n_bins() const;
    // flat row-major index of the bin containing x; clamps when clip is true,
    // returns nullopt for out-of-range points otherwise
    std::optional<std::size_t> bin_of(std::span<const double> x, bool clip) const;
    std::vector<double> bin_center(std::size_t flat) const;
    double bin_volume() const;
    void validate() const;

    static GridSpec regular(std::vector<double> lo, std::vector<double> hi, std::vector<int> shape);
};

struct SampleSet {
    int dim = 0;
    std::vector<double> data;  // flat, point-major
    std::optional<std::uint64_t> seed;

    std::size_t size() const { return dim ? data.size() / static_cast<std::size_t>(dim) : 0; }
    std::span<const double> point(std::size_t i) const {
        return {data.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
    }
    void push(std::span<const double> x) { data.insert(data.end(), x.begin(), x.end()); }
};

// Evaluable and sampleable probability density. Implementations are immutable
// after construction and safe to share across threads.
class Density {
public:
    virtual ~Density() = default;
    virtual int dim() const = 0;
    virtual double pdf(std::span<const double> x) const = 0;
    virtual void sample(Rng& rng, std::span<double> out) const = 0;
    // per-dimension [lo, hi] covering essentially all mass
    virtual std::vector<std::array<double, 2>> support_box() const = 0;
};

using DensityPtr = std::shared_ptr<const Density>;

struct GaussianComponent {
    double weight;
    std::vector<double> mean;
    std::vector<double> stddev;
};

class GaussianMixture final : public Density {
public:
    explicit GaussianMixture(std::vector<GaussianComponent> components);

    int dim() const override { return dim_; }
    double pdf(std::span<const double> x) const override;
    void sample(Rng& rng, std::span<double> out) const override;
    std::vector<std::array<double, 2>> support_box() const override;

    // CDF, 1-d mixtures only
    double cdf(double x) const;
    const std::vector<GaussianComponent>& components() const { return components_; }

    static DensityPtr isotropic(double weight_unused, std::vector<double> mean, double stddev);
    static DensityPtr standard_normal(int dims = 1);

private:
    std::vector<GaussianComponent> components_;
    std::vector<double> cum_weights_;
    int dim_;
};

// Product of independent factors; pdf factorizes and sampling is per factor.
class ProductDensity final : public Density {
public:
    explicit ProductDensity(std::vector<DensityPtr> factors);

    int dim() const override { return dim_; }
    double pdf(std::span<const double> x) const override;
    void sample(Rng& rng, std::span<double> out) const override;
    std::vector<std::array<double, 2>> support_box() const override;
    const std::vector<DensityPtr>& factors() const { return factors_; }

private:
    std::vector<DensityPtr> factors_;
    int dim_;
};

// Member of the power family base(x)^k / C, truncated to the base's support
// box. C comes from trapezoidal quadrature on a reference grid; sampling is
// grid inverse-CDF with linear interpolation inside the cells. Supported for
// 1-d and 2-d bases directly, and for product bases by distributing the
// exponent over the factors.
class PowerDensity final : public Density {
public:
    // nodes_2d overrides the 2-d reference grid resolution (0 = default);
    // useful when downstream consumers resolve scales near the cell size
    static DensityPtr make(DensityPtr base, double exponent, int nodes_2d = 0);

    int dim() const override;
    double pdf(std::span<const double> x) const override;
    void sample(Rng& rng, std::span<double> out) const override;
    std::vector<std::array<double, 2>> support_box() const override;

    // Inverse-CDF draw with an explicit quantile for the cell selection;
    // within-cell jitter still comes from the stream. Lets callers stratify
    // the quantiles across a batch of draws. 1-d and 2-d grids only.
    void sample_quantile(double u, Rng& rng, std::span<double> out) const;

    double exponent() const { return exponent_; }
    double norm_constant() const { return norm_constant_; }
    const DensityPtr& base() const { return base_; }

    // grid nodes per dimension of the reference quadrature grid
    static constexpr int kNodes1D = 4096;
    static constexpr int kNodes2D = 513;

private:
    PowerDensity(DensityPtr base, double exponent, int nodes_2d);

    DensityPtr base_;
    double exponent_;
    double norm_constant_ = 0.0;
    std::vector<std::array<double, 2>> box_;
    // 1-d: node positions and normalized CDF at nodes
    std::vector<double> nodes_;
    std::vector<double> node_cdf_;
    // 2-d: flat row-major cell-mass CDF
    int nx_ = 0, ny_ = 0;
    double x0_ = 0, y0_ = 0, hx_ = 0, hy_ = 0;
    std::vector<double> cell_cdf_;
    // product base: per-factor power densities
    std::vector<DensityPtr> factor_powers_;
};

// Probability masses on a regular grid; pdf() reports mass / bin volume.
class BinnedDensity final : public Density {
public:
    BinnedDensity(GridSpec grid, std::vector<double> masses);

    int dim() const override { return grid_.dim(); }
    double pdf(std::span<const double> x) const override;
    void sample(Rng& rng, std::span<double> out) const override;
    std::vector<std::array<double, 2>> support_box() const override;

    const GridSpec& grid() const { return grid_; }
    const std::vector<double>& masses() const { return masses_; }

private:
    GridSpec grid_;
    std::vector<double> masses_;
    std::vector<double> cum_masses_;
};

// --- operations ---

double density_eval(const Density& d, std::span<const double> x);
SampleSet density_sample(const Density& d, std::size_t n, std::uint64_t seed);

// histogram of a sample set; masses are counts / n
BinnedDensity bin_samples(const SampleSet& s, const GridSpec& grid, bool clip = false);

// masses_i^k / sum_j masses_j^k
BinnedDensity power_transform_binned(const BinnedDensity& b, double exponent);

// Jensen-Shannon divergence between two binned densities on the same grid,
// natural log convention (upper bound ln 2)
double js_divergence(const BinnedDensity& a, const BinnedDensity& b);

// bin masses from pointwise density evaluation at bin centers, normalized
BinnedDensity binned_from_density(const Density& d, const GridSpec& grid);
// exact bin masses of a 1-d Gaussian mixture via CDF differences
BinnedDensity binned_from_mixture_cdf(const GaussianMixture& m, const GridSpec& grid);

// CSV with header bin_center_0,...,bin_center_{n-1},mass
void write_binned_csv(const BinnedDensity& b, const std::string& path);
void write_samples_csv(const SampleSet& s, const std::string& path);

// N iid standard-normal factors (used by the high-dimensional experiments)
DensityPtr iid_standard_normal(int dims);

}  // namespace monlab
