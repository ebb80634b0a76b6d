#include "monlab/mon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "monlab/csv.hpp"

namespace monlab {

double mon_draw(const Density& p, std::span<const double> x_star, const MonConfig& cfg,
                std::uint64_t draw_seed) {
    cfg.validate();
    if (p.dim() != static_cast<int>(x_star.size()))
        throw std::invalid_argument("mon_draw: dimension mismatch");
    Rng rng(draw_seed);
    std::vector<double> buf(x_star.size());
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < cfg.n_candidates; ++i) {
        p.sample(rng, buf);
        best = std::min(best, l2_distance(x_star, buf));
    }
    return best;
}

MonEstimate emon_estimate(const Density& p, std::span<const double> x_star, const MonConfig& cfg,
                          int threads) {
    cfg.validate();
    const std::uint64_t point_key = hash_point(x_star);
    std::vector<double> draws(static_cast<std::size_t>(cfg.repetitions));
    parallel_for(draws.size(), threads, [&](std::size_t r) {
        draws[r] = mon_draw(p, x_star, cfg, derive_seed(cfg.seed, point_key, r));
    });
    RunningStats stats;
    for (double d : draws) stats.add(d);
    MonEstimate est;
    est.value = stats.mean();
    est.std_error = cfg.repetitions >= 2
                        ? stats.stddev() / std::sqrt(static_cast<double>(cfg.repetitions))
                        : 0.0;
    est.config = cfg;
    return est;
}

double expected_min_in_bin(double epsilon, double x_star_offset, int z) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("expected_min_in_bin: epsilon must be > 0");
    if (z < 1) throw std::invalid_argument("expected_min_in_bin: z must be >= 1");
    if (std::abs(x_star_offset) > epsilon)
        throw std::invalid_argument("expected_min_in_bin: offset outside bin");
    const double ratio = std::abs(x_star_offset) / epsilon;
    return epsilon / (z + 1) * (1.0 + std::pow(ratio, z + 1));
}

namespace {

// Shared core: dataset MoN loss for several candidate densities at once.
// Candidate streams are keyed by (seed, point content, repetition), not by
// the candidate index, so all candidates see common random numbers.
std::vector<MonEstimate> loss_for_candidates(const std::vector<const Density*>& candidates,
                                             const SampleSet& ground_truth, const MonConfig& cfg,
                                             int threads) {
    cfg.validate();
    const std::size_t n_points = ground_truth.size();
    if (n_points == 0) throw std::invalid_argument("mon_loss_estimate: empty dataset");
    for (const Density* c : candidates)
        if (c->dim() != ground_truth.dim)
            throw std::invalid_argument("mon_loss_estimate: dimension mismatch");

    const std::size_t n_cand = candidates.size();
    std::vector<RunningStats> stats(n_points * n_cand);

    parallel_for(n_points, threads, [&](std::size_t i) {
        const auto x_star = ground_truth.point(i);
        const std::uint64_t point_key = hash_point(x_star);
        std::vector<double> buf(x_star.size());
        for (int r = 0; r < cfg.repetitions; ++r) {
            const std::uint64_t draw_seed = derive_seed(cfg.seed, point_key, static_cast<std::uint64_t>(r));
            for (std::size_t c = 0; c < n_cand; ++c) {
                Rng rng(draw_seed);
                double best = std::numeric_limits<double>::infinity();
                for (int k = 0; k < cfg.n_candidates; ++k) {
                    candidates[c]->sample(rng, buf);
                    best = std::min(best, l2_distance(x_star, buf));
                }
                stats[i * n_cand + c].add(best);
            }
        }
    });

    std::vector<MonEstimate> out(n_cand);
    for (std::size_t c = 0; c < n_cand; ++c) {
        std::vector<double> means(n_points), vars(n_points);
        for (std::size_t i = 0; i < n_points; ++i) {
            const auto& st = stats[i * n_cand + c];
            means[i] = st.mean();
            vars[i] = st.variance() / static_cast<double>(cfg.repetitions);
        }
        MonEstimate est;
        est.config = cfg;
        est.value = sorted_mean(means);
        if (cfg.repetitions >= 2) {
            est.std_error = std::sqrt(sorted_sum(std::move(vars))) / static_cast<double>(n_points);
        } else {
            RunningStats across;
            for (double m : means) across.add(m);
            est.std_error = across.stddev() / std::sqrt(static_cast<double>(n_points));
        }
        out[c] = est;
    }
    return out;
}

}  // namespace

MonEstimate mon_loss_estimate(const Density& p, const SampleSet& ground_truth,
                              const MonConfig& cfg, int threads) {
    return loss_for_candidates({&p}, ground_truth, cfg, threads)[0];
}

std::vector<double> linspace(double lo, double hi, int count) {
    if (count < 1) throw std::invalid_argument("linspace: count must be >= 1");
    std::vector<double> v(static_cast<std::size_t>(count));
    if (count == 1) {
        v[0] = lo;
        return v;
    }
    const double h = (hi - lo) / static_cast<double>(count - 1);
    for (int i = 0; i < count; ++i) v[static_cast<std::size_t>(i)] = lo + h * i;
    v.back() = hi;
    return v;
}

std::vector<double> default_k_grid() { return linspace(0.3, 1.5, 25); }

ExponentScan minimizing_exponent_search(const DensityPtr& base, const SampleSet& ground_truth,
                                        const std::vector<double>& k_grid, const MonConfig& cfg,
                                        int threads) {
    if (k_grid.empty()) throw std::invalid_argument("minimizing_exponent_search: empty k grid");
    if (!std::is_sorted(k_grid.begin(), k_grid.end()))
        throw std::invalid_argument("minimizing_exponent_search: k grid must be sorted");

    std::vector<DensityPtr> powers;
    powers.reserve(k_grid.size());
    for (double k : k_grid) powers.push_back(PowerDensity::make(base, k));
    std::vector<const Density*> raw;
    for (const auto& p : powers) raw.push_back(p.get());

    ExponentScan scan;
    scan.k_grid = k_grid;
    scan.losses = loss_for_candidates(raw, ground_truth, cfg, threads);
    std::size_t best = 0;
    for (std::size_t i = 1; i < scan.losses.size(); ++i)
        if (scan.losses[i].value < scan.losses[best].value) best = i;  // ties keep smaller k
    scan.k_star = k_grid[best];
    return scan;
}

std::vector<NScanEntry> k_vs_n_scan(const DensityPtr& base, const SampleSet& ground_truth,
                                    const std::vector<int>& n_list,
                                    const std::vector<double>& k_grid, const MonConfig& cfg,
                                    int threads) {
    if (n_list.empty()) throw std::invalid_argument("k_vs_n_scan: empty N list");
    if (!std::is_sorted(n_list.begin(), n_list.end()))
        throw std::invalid_argument("k_vs_n_scan: N list must be ascending");
    std::vector<NScanEntry> out;
    out.reserve(n_list.size());
    for (int n : n_list) {
        MonConfig c = cfg;
        c.n_candidates = n;
        out.push_back({n, minimizing_exponent_search(base, ground_truth, k_grid, c, threads)});
    }
    return out;
}

void write_scan_csv(const std::vector<NScanEntry>& entries, const std::string& path) {
    csv::Writer w(path);
    w.header({"N", "k", "loss", "std_error"});
    for (const auto& e : entries)
        for (std::size_t i = 0; i < e.scan.k_grid.size(); ++i)
            w.row({static_cast<double>(e.n), e.scan.k_grid[i], e.scan.losses[i].value,
                   e.scan.losses[i].std_error});
}

}  // namespace monlab
