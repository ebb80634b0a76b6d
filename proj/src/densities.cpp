#include "monlab/densities.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "monlab/csv.hpp"

namespace monlab {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kWeightTol = 1e-9;
constexpr double kSigmaCoverage = 8.0;  // reference grids span mean +/- 8 stddev
}  // namespace

// --- GridSpec ---

void GridSpec::validate() const {
    if (origin.empty() || origin.size() != width.size() || origin.size() != shape.size())
        throw std::invalid_argument("GridSpec: inconsistent dimensions");
    for (double w : width)
        if (!(w > 0.0)) throw std::invalid_argument("GridSpec: bin width must be positive");
    for (int s : shape)
        if (s < 1) throw std::invalid_argument("GridSpec: shape must be >= 1 per dimension");
}

std::size_t GridSpec::n_bins() const {
    std::size_t n = 1;
    for (int s : shape) n *= static_cast<std::size_t>(s);
    return n;
}

std::optional<std::size_t> GridSpec::bin_of(std::span<const double> x, bool clip) const {
    std::size_t flat = 0;
    for (int d = 0; d < dim(); ++d) {
        double rel = (x[d] - origin[d]) / width[d];
        long idx = static_cast<long>(std::floor(rel));
        if (idx < 0 || idx >= shape[d]) {
            if (!clip) return std::nullopt;
            idx = std::clamp<long>(idx, 0, shape[d] - 1);
        }
        flat = flat * static_cast<std::size_t>(shape[d]) + static_cast<std::size_t>(idx);
    }
    return flat;
}

std::vector<double> GridSpec::bin_center(std::size_t flat) const {
    std::vector<double> c(origin.size());
    for (int d = dim() - 1; d >= 0; --d) {
        std::size_t idx = flat % static_cast<std::size_t>(shape[d]);
        flat /= static_cast<std::size_t>(shape[d]);
        c[d] = origin[d] + (static_cast<double>(idx) + 0.5) * width[d];
    }
    return c;
}

double GridSpec::bin_volume() const {
    double v = 1.0;
    for (double w : width) v *= w;
    return v;
}

GridSpec GridSpec::regular(std::vector<double> lo, std::vector<double> hi, std::vector<int> shape) {
    GridSpec g;
    g.origin = std::move(lo);
    g.shape = std::move(shape);
    g.width.resize(g.origin.size());
    for (std::size_t d = 0; d < g.origin.size(); ++d)
        g.width[d] = (hi[d] - g.origin[d]) / static_cast<double>(g.shape[d]);
    g.validate();
    return g;
}

// --- GaussianMixture ---

GaussianMixture::GaussianMixture(std::vector<GaussianComponent> components)
    : components_(std::move(components)) {
    if (components_.empty()) throw std::invalid_argument("GaussianMixture: no components");
    dim_ = static_cast<int>(components_[0].mean.size());
    double wsum = 0.0;
    for (const auto& c : components_) {
        if (static_cast<int>(c.mean.size()) != dim_ || static_cast<int>(c.stddev.size()) != dim_)
            throw std::invalid_argument("GaussianMixture: component dimension mismatch");
        for (double s : c.stddev)
            if (!(s > 0.0)) throw std::invalid_argument("GaussianMixture: stddev must be positive");
        wsum += c.weight;
        cum_weights_.push_back(wsum);
    }
    if (std::abs(wsum - 1.0) > kWeightTol)
        throw std::invalid_argument("GaussianMixture: weights must sum to 1");
    cum_weights_.back() = 1.0;
}

double GaussianMixture::pdf(std::span<const double> x) const {
    double p = 0.0;
    for (const auto& c : components_) {
        double q = 0.0;
        double norm = 1.0;
        for (int d = 0; d < dim_; ++d) {
            const double z = (x[d] - c.mean[d]) / c.stddev[d];
            q += z * z;
            norm *= c.stddev[d] * std::sqrt(kTwoPi);
        }
        p += c.weight * std::exp(-0.5 * q) / norm;
    }
    return p;
}

void GaussianMixture::sample(Rng& rng, std::span<double> out) const {
    const double u = rng.uniform();
    std::size_t ci =
        std::lower_bound(cum_weights_.begin(), cum_weights_.end(), u) - cum_weights_.begin();
    if (ci >= components_.size()) ci = components_.size() - 1;
    const auto& c = components_[ci];
    for (int d = 0; d < dim_; ++d) out[d] = rng.normal(c.mean[d], c.stddev[d]);
}

std::vector<std::array<double, 2>> GaussianMixture::support_box() const {
    std::vector<std::array<double, 2>> box(static_cast<std::size_t>(dim_),
                                           {std::numeric_limits<double>::max(),
                                            std::numeric_limits<double>::lowest()});
    for (const auto& c : components_)
        for (int d = 0; d < dim_; ++d) {
            box[d][0] = std::min(box[d][0], c.mean[d] - kSigmaCoverage * c.stddev[d]);
            box[d][1] = std::max(box[d][1], c.mean[d] + kSigmaCoverage * c.stddev[d]);
        }
    return box;
}

double GaussianMixture::cdf(double x) const {
    if (dim_ != 1) throw std::invalid_argument("GaussianMixture::cdf: 1-d only");
    double f = 0.0;
    for (const auto& c : components_) f += c.weight * normal_cdf(x, c.mean[0], c.stddev[0]);
    return f;
}

DensityPtr GaussianMixture::isotropic(double weight, std::vector<double> mean, double stddev) {
    GaussianComponent c;
    c.weight = weight;
    c.stddev.assign(mean.size(), stddev);
    c.mean = std::move(mean);
    return std::make_shared<GaussianMixture>(std::vector<GaussianComponent>{std::move(c)});
}

DensityPtr GaussianMixture::standard_normal(int dims) {
    return isotropic(1.0, std::vector<double>(static_cast<std::size_t>(dims), 0.0), 1.0);
}

// --- ProductDensity ---

ProductDensity::ProductDensity(std::vector<DensityPtr> factors) : factors_(std::move(factors)) {
    if (factors_.empty()) throw std::invalid_argument("ProductDensity: no factors");
    dim_ = 0;
    for (const auto& f : factors_) dim_ += f->dim();
}

double ProductDensity::pdf(std::span<const double> x) const {
    double p = 1.0;
    std::size_t off = 0;
    for (const auto& f : factors_) {
        p *= f->pdf(x.subspan(off, static_cast<std::size_t>(f->dim())));
        off += static_cast<std::size_t>(f->dim());
    }
    return p;
}

void ProductDensity::sample(Rng& rng, std::span<double> out) const {
    std::size_t off = 0;
    for (const auto& f : factors_) {
        f->sample(rng, out.subspan(off, static_cast<std::size_t>(f->dim())));
        off += static_cast<std::size_t>(f->dim());
    }
}

std::vector<std::array<double, 2>> ProductDensity::support_box() const {
    std::vector<std::array<double, 2>> box;
    for (const auto& f : factors_) {
        auto b = f->support_box();
        box.insert(box.end(), b.begin(), b.end());
    }
    return box;
}

DensityPtr iid_standard_normal(int dims) {
    std::vector<DensityPtr> factors(static_cast<std::size_t>(dims),
                                    GaussianMixture::standard_normal(1));
    if (dims == 1) return factors[0];
    return std::make_shared<ProductDensity>(std::move(factors));
}

// --- PowerDensity ---

DensityPtr PowerDensity::make(DensityPtr base, double exponent, int nodes_2d) {
    if (!base) throw std::invalid_argument("PowerDensity: null base");
    if (!(exponent >= 0.0)) throw std::invalid_argument("PowerDensity: exponent must be >= 0");
    if (nodes_2d != 0 && nodes_2d < 3)
        throw std::invalid_argument("PowerDensity: grid override too small");
    return std::shared_ptr<const PowerDensity>(
        new PowerDensity(std::move(base), exponent, nodes_2d));
}

PowerDensity::PowerDensity(DensityPtr base, double exponent, int nodes_2d)
    : base_(std::move(base)), exponent_(exponent) {
    // product structure distributes the exponent over the factors
    if (const auto* prod = dynamic_cast<const ProductDensity*>(base_.get())) {
        box_ = base_->support_box();
        norm_constant_ = 1.0;
        for (const auto& f : prod->factors()) {
            auto fp = make(f, exponent_, nodes_2d);
            norm_constant_ *=
                static_cast<const PowerDensity*>(fp.get())->norm_constant();
            factor_powers_.push_back(std::move(fp));
        }
        return;
    }
    box_ = base_->support_box();
    const int n = base_->dim();
    if (n == 1) {
        const int m = kNodes1D;
        nodes_.resize(m);
        node_cdf_.assign(m, 0.0);
        const double lo = box_[0][0], hi = box_[0][1];
        const double h = (hi - lo) / static_cast<double>(m - 1);
        std::vector<double> vals(m);
        for (int i = 0; i < m; ++i) {
            nodes_[i] = lo + h * static_cast<double>(i);
            double x = nodes_[i];
            vals[i] = std::pow(base_->pdf({&x, 1}), exponent_);
        }
        for (int i = 1; i < m; ++i)
            node_cdf_[i] = node_cdf_[i - 1] + 0.5 * h * (vals[i - 1] + vals[i]);
        norm_constant_ = node_cdf_.back();
        if (!(norm_constant_ > 0.0) || !std::isfinite(norm_constant_))
            throw std::runtime_error("PowerDensity: degenerate normalization");
        for (double& f : node_cdf_) f /= norm_constant_;
        node_cdf_.back() = 1.0;
    } else if (n == 2) {
        const int m = nodes_2d > 0 ? nodes_2d : kNodes2D;
        nx_ = ny_ = m - 1;
        x0_ = box_[0][0];
        y0_ = box_[1][0];
        hx_ = (box_[0][1] - x0_) / static_cast<double>(nx_);
        hy_ = (box_[1][1] - y0_) / static_cast<double>(ny_);
        // node values, then per-cell trapezoid masses (corner average x area)
        std::vector<double> nodes(static_cast<std::size_t>(m) * m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                double xy[2] = {x0_ + hx_ * i, y0_ + hy_ * j};
                nodes[static_cast<std::size_t>(i) * m + j] =
                    std::pow(base_->pdf({xy, 2}), exponent_);
            }
        cell_cdf_.resize(static_cast<std::size_t>(nx_) * ny_);
        double cum = 0.0;
        for (int i = 0; i < nx_; ++i)
            for (int j = 0; j < ny_; ++j) {
                const std::size_t a = static_cast<std::size_t>(i) * m + j;
                double mass = 0.25 * (nodes[a] + nodes[a + 1] + nodes[a + m] + nodes[a + m + 1]) *
                              hx_ * hy_;
                cum += mass;
                cell_cdf_[static_cast<std::size_t>(i) * ny_ + j] = cum;
            }
        norm_constant_ = cum;
        if (!(norm_constant_ > 0.0) || !std::isfinite(norm_constant_))
            throw std::runtime_error("PowerDensity: degenerate normalization");
        for (double& f : cell_cdf_) f /= norm_constant_;
        cell_cdf_.back() = 1.0;
    } else {
        throw std::invalid_argument(
            "PowerDensity: bases above 2 dimensions need product structure");
    }
}

int PowerDensity::dim() const { return base_->dim(); }

double PowerDensity::pdf(std::span<const double> x) const {
    if (!factor_powers_.empty()) {
        double p = 1.0;
        std::size_t off = 0;
        for (const auto& f : factor_powers_) {
            p *= f->pdf(x.subspan(off, static_cast<std::size_t>(f->dim())));
            off += static_cast<std::size_t>(f->dim());
        }
        return p;
    }
    for (std::size_t d = 0; d < box_.size(); ++d)
        if (x[d] < box_[d][0] || x[d] > box_[d][1]) return 0.0;
    return std::pow(base_->pdf(x), exponent_) / norm_constant_;
}

void PowerDensity::sample(Rng& rng, std::span<double> out) const {
    if (!factor_powers_.empty()) {
        std::size_t off = 0;
        for (const auto& f : factor_powers_) {
            f->sample(rng, out.subspan(off, static_cast<std::size_t>(f->dim())));
            off += static_cast<std::size_t>(f->dim());
        }
        return;
    }
    sample_quantile(rng.uniform(), rng, out);
}

void PowerDensity::sample_quantile(double u, Rng& rng, std::span<double> out) const {
    if (!factor_powers_.empty())
        throw std::invalid_argument("PowerDensity::sample_quantile: grid bases only");
    if (base_->dim() == 1) {
        auto it = std::upper_bound(node_cdf_.begin(), node_cdf_.end(), u);
        std::size_t j = static_cast<std::size_t>(it - node_cdf_.begin());
        if (j == 0) j = 1;
        if (j >= node_cdf_.size()) j = node_cdf_.size() - 1;
        const double f0 = node_cdf_[j - 1], f1 = node_cdf_[j];
        const double t = f1 > f0 ? (u - f0) / (f1 - f0) : 0.5;
        out[0] = nodes_[j - 1] + t * (nodes_[j] - nodes_[j - 1]);
    } else {
        const double ux = rng.uniform();
        const double uy = rng.uniform();
        auto it = std::upper_bound(cell_cdf_.begin(), cell_cdf_.end(), u);
        std::size_t c = static_cast<std::size_t>(it - cell_cdf_.begin());
        if (c >= cell_cdf_.size()) c = cell_cdf_.size() - 1;
        const std::size_t i = c / static_cast<std::size_t>(ny_);
        const std::size_t j = c % static_cast<std::size_t>(ny_);
        out[0] = x0_ + (static_cast<double>(i) + ux) * hx_;
        out[1] = y0_ + (static_cast<double>(j) + uy) * hy_;
    }
}

std::vector<std::array<double, 2>> PowerDensity::support_box() const { return box_; }

// --- BinnedDensity ---

BinnedDensity::BinnedDensity(GridSpec grid, std::vector<double> masses)
    : grid_(std::move(grid)), masses_(std::move(masses)) {
    grid_.validate();
    if (masses_.size() != grid_.n_bins())
        throw std::invalid_argument("BinnedDensity: mass count does not match grid");
    double sum = 0.0;
    for (double m : masses_) {
        if (!(m >= 0.0)) throw std::invalid_argument("BinnedDensity: negative or NaN mass");
        sum += m;
    }
    if (std::abs(sum - 1.0) > kWeightTol)
        throw std::invalid_argument("BinnedDensity: masses must sum to 1");
    cum_masses_.resize(masses_.size());
    double cum = 0.0;
    for (std::size_t i = 0; i < masses_.size(); ++i) {
        cum += masses_[i];
        cum_masses_[i] = cum;
    }
    cum_masses_.back() = 1.0;
}

double BinnedDensity::pdf(std::span<const double> x) const {
    auto bin = grid_.bin_of(x, false);
    if (!bin) return 0.0;
    return masses_[*bin] / grid_.bin_volume();
}

void BinnedDensity::sample(Rng& rng, std::span<double> out) const {
    const double u = rng.uniform();
    auto it = std::upper_bound(cum_masses_.begin(), cum_masses_.end(), u);
    std::size_t flat = static_cast<std::size_t>(it - cum_masses_.begin());
    if (flat >= masses_.size()) flat = masses_.size() - 1;
    // uniform inside the bin (linear interpolation of the inverse CDF)
    std::size_t rem = flat;
    const int n = grid_.dim();
    std::vector<std::size_t> idx(static_cast<std::size_t>(n));
    for (int d = n - 1; d >= 0; --d) {
        idx[d] = rem % static_cast<std::size_t>(grid_.shape[d]);
        rem /= static_cast<std::size_t>(grid_.shape[d]);
    }
    for (int d = 0; d < n; ++d)
        out[d] = grid_.origin[d] + (static_cast<double>(idx[d]) + rng.uniform()) * grid_.width[d];
}

std::vector<std::array<double, 2>> BinnedDensity::support_box() const {
    std::vector<std::array<double, 2>> box(static_cast<std::size_t>(grid_.dim()));
    for (int d = 0; d < grid_.dim(); ++d)
        box[d] = {grid_.origin[d], grid_.origin[d] + grid_.width[d] * grid_.shape[d]};
    return box;
}

// --- operations ---

double density_eval(const Density& d, std::span<const double> x) {
    if (static_cast<int>(x.size()) != d.dim())
        throw std::invalid_argument("density_eval: dimension mismatch");
    return d.pdf(x);
}

SampleSet density_sample(const Density& d, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("density_sample: n must be >= 1");
    SampleSet s;
    s.dim = d.dim();
    s.seed = seed;
    s.data.resize(n * static_cast<std::size_t>(s.dim));
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i)
        d.sample(rng, {s.data.data() + i * static_cast<std::size_t>(s.dim),
                       static_cast<std::size_t>(s.dim)});
    return s;
}

BinnedDensity bin_samples(const SampleSet& s, const GridSpec& grid, bool clip) {
    grid.validate();
    if (s.size() == 0) throw std::invalid_argument("bin_samples: empty sample set");
    if (s.dim != grid.dim()) throw std::invalid_argument("bin_samples: dimension mismatch");
    std::vector<double> masses(grid.n_bins(), 0.0);
    const double w = 1.0 / static_cast<double>(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        auto bin = grid.bin_of(s.point(i), clip);
        if (!bin)
            throw std::invalid_argument("bin_samples: sample outside grid (pass clip=true)");
        masses[*bin] += w;
    }
    return BinnedDensity(grid, std::move(masses));
}

BinnedDensity power_transform_binned(const BinnedDensity& b, double exponent) {
    if (!(exponent >= 0.0))
        throw std::invalid_argument("power_transform_binned: exponent must be >= 0");
    const auto& m = b.masses();
    const double mmax = *std::max_element(m.begin(), m.end());
    if (!(mmax > 0.0) || !std::isfinite(mmax))
        throw std::runtime_error("power_transform_binned: degenerate transform");
    // scale by the max first so large exponents cannot underflow everything
    std::vector<double> out(m.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        out[i] = std::pow(m[i] / mmax, exponent);
        sum += out[i];
    }
    if (!(sum > 0.0) || !std::isfinite(sum))
        throw std::runtime_error("power_transform_binned: degenerate transform");
    for (double& v : out) v /= sum;
    return BinnedDensity(b.grid(), std::move(out));
}

namespace {
bool same_grid(const GridSpec& a, const GridSpec& b) {
    if (a.shape != b.shape) return false;
    for (std::size_t d = 0; d < a.origin.size(); ++d) {
        if (std::abs(a.origin[d] - b.origin[d]) > 1e-12) return false;
        if (std::abs(a.width[d] - b.width[d]) > 1e-12) return false;
    }
    return true;
}
}  // namespace

double js_divergence(const BinnedDensity& a, const BinnedDensity& b) {
    if (!same_grid(a.grid(), b.grid()))
        throw std::invalid_argument("js_divergence: grid mismatch");
    const auto& p = a.masses();
    const auto& q = b.masses();
    double kl_pm = 0.0, kl_qm = 0.0;  // accumulated symmetrically in bin order
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double m = 0.5 * (p[i] + q[i]);
        if (p[i] > 0.0) kl_pm += p[i] * std::log(p[i] / m);
        if (q[i] > 0.0) kl_qm += q[i] * std::log(q[i] / m);
    }
    return 0.5 * (kl_pm + kl_qm);
}

BinnedDensity binned_from_density(const Density& d, const GridSpec& grid) {
    grid.validate();
    if (d.dim() != grid.dim())
        throw std::invalid_argument("binned_from_density: dimension mismatch");
    std::vector<double> masses(grid.n_bins());
    double sum = 0.0;
    for (std::size_t i = 0; i < masses.size(); ++i) {
        auto c = grid.bin_center(i);
        masses[i] = d.pdf(c);
        sum += masses[i];
    }
    if (!(sum > 0.0)) throw std::runtime_error("binned_from_density: zero mass on grid");
    for (double& v : masses) v /= sum;
    return BinnedDensity(grid, std::move(masses));
}

BinnedDensity binned_from_mixture_cdf(const GaussianMixture& m, const GridSpec& grid) {
    grid.validate();
    if (m.dim() != 1 || grid.dim() != 1)
        throw std::invalid_argument("binned_from_mixture_cdf: 1-d only");
    std::vector<double> masses(grid.n_bins());
    double sum = 0.0;
    for (int i = 0; i < grid.shape[0]; ++i) {
        const double lo = grid.origin[0] + grid.width[0] * i;
        masses[static_cast<std::size_t>(i)] = m.cdf(lo + grid.width[0]) - m.cdf(lo);
        sum += masses[static_cast<std::size_t>(i)];
    }
    for (double& v : masses) v /= sum;
    return BinnedDensity(grid, std::move(masses));
}

void write_binned_csv(const BinnedDensity& b, const std::string& path) {
    csv::Writer w(path);
    std::vector<std::string> head;
    for (int d = 0; d < b.dim(); ++d) head.push_back("bin_center_" + std::to_string(d));
    head.push_back("mass");
    w.header(head);
    for (std::size_t i = 0; i < b.masses().size(); ++i) {
        auto row = b.grid().bin_center(i);
        row.push_back(b.masses()[i]);
        w.row(row);
    }
}

void write_samples_csv(const SampleSet& s, const std::string& path) {
    csv::Writer w(path);
    std::vector<std::string> head;
    for (int d = 0; d < s.dim; ++d) head.push_back("x" + std::to_string(d));
    w.header(head);
    for (std::size_t i = 0; i < s.size(); ++i) {
        auto p = s.point(i);
        w.row(std::vector<double>(p.begin(), p.end()));
    }
}

}  // namespace monlab
