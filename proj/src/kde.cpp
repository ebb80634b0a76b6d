#include "monlab/kde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "monlab/csv.hpp"

namespace monlab {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kMassFloorRel = 1e-12;
}  // namespace

KdeModel::KdeModel(std::vector<Point2> support_points, double bandwidth)
    : points_(std::move(support_points)), bandwidth_(bandwidth) {
    if (points_.empty()) throw std::invalid_argument("KdeModel: no support points");
    if (!(bandwidth_ > 0.0)) throw std::invalid_argument("KdeModel: bandwidth must be > 0");
}

double KdeModel::pdf(double x, double y) const {
    const double inv2h2 = 1.0 / (2.0 * bandwidth_ * bandwidth_);
    double sum = 0.0;
    for (const auto& p : points_) {
        const double dx = x - p[0];
        const double dy = y - p[1];
        sum += std::exp(-(dx * dx + dy * dy) * inv2h2);
    }
    return sum / (static_cast<double>(points_.size()) * kTwoPi * bandwidth_ * bandwidth_);
}

KdeModel kde_fit(const std::vector<Point2>& points, double bandwidth) {
    return KdeModel(points, bandwidth);
}

double select_bandwidth(const std::vector<Point2>& train, const std::vector<Point2>& validation,
                        const std::vector<double>& bandwidth_grid, double h_floor) {
    if (train.empty() || validation.empty())
        throw std::invalid_argument("select_bandwidth: empty split");
    if (bandwidth_grid.empty())
        throw std::invalid_argument("select_bandwidth: empty bandwidth grid");
    std::vector<double> candidates;
    for (double h : bandwidth_grid) candidates.push_back(std::max(h, h_floor));
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    double best_h = 0.0;
    double best_ll = -std::numeric_limits<double>::infinity();
    for (double h : candidates) {
        KdeModel kde(train, h);
        double ll = 0.0;
        for (const auto& v : validation) {
            const double p = kde.pdf(v[0], v[1]);
            if (p <= 0.0) {
                ll = -std::numeric_limits<double>::infinity();
                break;
            }
            ll += std::log(p);
        }
        if (ll > best_ll) {  // strict: ties keep the smaller h
            best_ll = ll;
            best_h = h;
        }
    }
    if (!(best_h > 0.0))
        throw std::runtime_error("select_bandwidth: all candidates yield -inf likelihood");
    return best_h;
}

GridSpec2D auto_extent(const std::vector<Point2>& points, const Point2& include, double pad,
                       int nx, int ny) {
    if (points.empty()) throw std::invalid_argument("auto_extent: no points");
    GridSpec2D g;
    g.x0 = include[0];
    g.x1 = include[0];
    g.y0 = include[1];
    g.y1 = include[1];
    for (const auto& p : points) {
        g.x0 = std::min(g.x0, p[0]);
        g.x1 = std::max(g.x1, p[0]);
        g.y0 = std::min(g.y0, p[1]);
        g.y1 = std::max(g.y1, p[1]);
    }
    g.x0 -= pad;
    g.x1 += pad;
    g.y0 -= pad;
    g.y1 += pad;
    g.nx = nx;
    g.ny = ny;
    g.validate();
    return g;
}

namespace {

std::vector<double> kde_raw_on_grid(const KdeModel& m, const GridSpec2D& spec) {
    std::vector<double> raw(static_cast<std::size_t>(spec.nx) * spec.ny);
    for (int ix = 0; ix < spec.nx; ++ix) {
        const double x = spec.x0 + (ix + 0.5) * spec.dx();
        for (int iy = 0; iy < spec.ny; ++iy) {
            const double y = spec.y0 + (iy + 0.5) * spec.dy();
            raw[static_cast<std::size_t>(ix) * spec.ny + iy] = m.pdf(x, y);
        }
    }
    return raw;
}

// exponentiate (rescaled by the max so big exponents cannot underflow
// everything at once) and normalize to unit mass
std::vector<double> compensate(const std::vector<double>& raw, double exponent) {
    const double vmax = *std::max_element(raw.begin(), raw.end());
    if (!(vmax > 0.0) || !std::isfinite(vmax))
        throw std::runtime_error("eval_on_grid: degenerate normalization");
    std::vector<double> out(raw.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        out[i] = std::pow(raw[i] / vmax, exponent);
        sum += out[i];
    }
    if (!(sum > 0.0) || !std::isfinite(sum))
        throw std::runtime_error("eval_on_grid: degenerate normalization");
    for (double& v : out) v /= sum;
    return out;
}

}  // namespace

DensityGrid eval_on_grid(const KdeModel& m, const GridSpec2D& spec, double exponent) {
    spec.validate();
    if (!(exponent >= 0.0)) throw std::invalid_argument("eval_on_grid: exponent must be >= 0");
    DensityGrid g;
    g.spec = spec;
    g.masses = compensate(kde_raw_on_grid(m, spec), exponent);
    return g;
}

double grid_loglik(const DensityGrid& g, const Point2& point) {
    const double vmax = *std::max_element(g.masses.begin(), g.masses.end());
    const double floor = kMassFloorRel * vmax;
    double mass = 0.0;
    const long ix = static_cast<long>(std::floor((point[0] - g.spec.x0) / g.spec.dx()));
    const long iy = static_cast<long>(std::floor((point[1] - g.spec.y0) / g.spec.dy()));
    if (ix >= 0 && ix < g.spec.nx && iy >= 0 && iy < g.spec.ny)
        mass = g.mass_at(static_cast<std::size_t>(ix), static_cast<std::size_t>(iy));
    return std::log(std::max(mass, floor) / g.spec.cell_area());
}

CompensationConfig::CompensationConfig() {
    k_search = linspace(0.001, 3.0, 25);
    const double lo = std::log(0.05), hi = std::log(1.0);
    for (int i = 0; i < 10; ++i) bandwidth_grid.push_back(std::exp(lo + (hi - lo) * i / 9.0));
}

void CompensationConfig::validate() const {
    if (n_sample < 2) throw std::invalid_argument("CompensationConfig: n_sample too small");
    if (!(alpha_split > 0.0) || !(alpha_split < 1.0))
        throw std::invalid_argument("CompensationConfig: alpha_split must be in (0,1)");
    if (static_cast<double>(n_sample) * alpha_split < 10.0)
        throw std::invalid_argument("CompensationConfig: n_sample * alpha_split must be >= 10");
    if (k_search.empty()) throw std::invalid_argument("CompensationConfig: empty k_search");
    if (bandwidth_grid.empty())
        throw std::invalid_argument("CompensationConfig: empty bandwidth grid");
}

namespace {

// log likelihood of the scene's ground truth at timestep t (1-based) under
// the compensated KDE reconstruction, one value per exponent in k_search
std::vector<double> scene_loglik_per_k(const Scene& scene, int timestep,
                                       const CompensationConfig& cfg) {
    const std::size_t t = static_cast<std::size_t>(timestep - 1);
    if (scene.n_samples() < static_cast<std::size_t>(cfg.n_sample))
        throw std::invalid_argument("compensation: scene " + scene.scene_id + " has fewer than " +
                                    std::to_string(cfg.n_sample) + " samples");
    std::vector<Point2> pts(static_cast<std::size_t>(cfg.n_sample));
    for (std::size_t j = 0; j < pts.size(); ++j) pts[j] = scene.samples[j][t];

    const auto n_fit = static_cast<std::size_t>(
        std::llround(cfg.alpha_split * static_cast<double>(cfg.n_sample)));
    std::vector<Point2> fit(pts.begin(), pts.begin() + static_cast<long>(n_fit));
    std::vector<Point2> val(pts.begin() + static_cast<long>(n_fit), pts.end());

    const double h = select_bandwidth(fit, val, cfg.bandwidth_grid, cfg.bandwidth_floor);
    KdeModel kde(fit, h);
    const Point2 gt = scene.ground_truth[t];
    const GridSpec2D spec =
        auto_extent(pts, gt, cfg.pad_bandwidths * h, cfg.grid_nx, cfg.grid_ny);
    const std::vector<double> raw = kde_raw_on_grid(kde, spec);

    std::vector<double> out;
    out.reserve(cfg.k_search.size());
    for (double k : cfg.k_search) {
        DensityGrid g;
        g.spec = spec;
        g.masses = compensate(raw, k);
        out.push_back(grid_loglik(g, gt));
    }
    return out;
}

CompensationCurve curve_from_rows(std::vector<std::vector<double>> rows,
                                  const CompensationConfig& cfg, int timestep) {
    CompensationCurve curve;
    curve.timestep = timestep;
    curve.k_values = cfg.k_search;
    curve.n_scenes = static_cast<int>(rows.size());
    curve.avg_loglik.resize(cfg.k_search.size());
    for (std::size_t ki = 0; ki < cfg.k_search.size(); ++ki) {
        std::vector<double> vals;
        vals.reserve(rows.size());
        for (const auto& r : rows) vals.push_back(r[ki]);
        curve.avg_loglik[ki] = sorted_mean(std::move(vals));
    }
    std::size_t best = 0;
    for (std::size_t ki = 1; ki < curve.avg_loglik.size(); ++ki)
        if (curve.avg_loglik[ki] > curve.avg_loglik[best]) best = ki;  // ties keep smaller k
    curve.k_best = curve.k_values[best];
    return curve;
}

}  // namespace

CompensationCurve find_best_compensation(const SceneSet& scenes, int timestep,
                                         const CompensationConfig& cfg, int threads) {
    cfg.validate();
    scenes.validate();
    if (timestep < 1 || timestep > scenes.horizon)
        throw std::invalid_argument("find_best_compensation: timestep out of range");
    std::vector<std::vector<double>> rows(scenes.scenes.size());
    parallel_for(rows.size(), threads, [&](std::size_t si) {
        rows[si] = scene_loglik_per_k(scenes.scenes[si], timestep, cfg);
    });
    return curve_from_rows(std::move(rows), cfg, timestep);
}

CompensationCurve find_best_compensation_joint(const SceneSet& scenes,
                                               const CompensationConfig& cfg, int threads) {
    cfg.validate();
    scenes.validate();
    std::vector<std::vector<double>> rows(scenes.scenes.size() *
                                          static_cast<std::size_t>(scenes.horizon));
    parallel_for(rows.size(), threads, [&](std::size_t i) {
        const std::size_t si = i / static_cast<std::size_t>(scenes.horizon);
        const int t = static_cast<int>(i % static_cast<std::size_t>(scenes.horizon)) + 1;
        rows[i] = scene_loglik_per_k(scenes.scenes[si], t, cfg);
    });
    return curve_from_rows(std::move(rows), cfg, 0);
}

double marginalized_loglik(const SceneSet& scenes, int timestep, double k_bar,
                           const CompensationConfig& cfg, int threads) {
    CompensationConfig single = cfg;
    single.k_search = {k_bar};
    return find_best_compensation(scenes, timestep, single, threads).avg_loglik[0];
}

void write_compensation_curves_csv(const CompensationResult& res, const std::string& path) {
    csv::Writer w(path);
    w.header({"t", "k_bar", "avg_loglik"});
    auto write_curve = [&](const CompensationCurve& c) {
        const std::string label = c.timestep == 0 ? "joint" : std::to_string(c.timestep);
        for (std::size_t i = 0; i < c.k_values.size(); ++i)
            w.line({label, csv::fmt(c.k_values[i]), csv::fmt(c.avg_loglik[i])});
    };
    for (const auto& c : res.per_timestep) write_curve(c);
    if (res.joint) write_curve(*res.joint);
}

void write_compensation_summary_csv(const CompensationResult& res, const std::string& path) {
    csv::Writer w(path);
    w.header({"t", "k_best"});
    for (const auto& c : res.per_timestep)
        w.line({std::to_string(c.timestep), csv::fmt(c.k_best)});
    if (res.joint) w.line({"joint", csv::fmt(res.joint->k_best)});
}

}  // namespace monlab
