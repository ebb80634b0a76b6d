#include "monlab/learner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "monlab/csv.hpp"

namespace monlab {

void ConditionedDataset::validate() const {
    if (cond_idx.empty()) throw std::invalid_argument("ConditionedDataset: empty dataset");
    if (targets.size() != cond_idx.size())
        throw std::invalid_argument("ConditionedDataset: target/condition count mismatch");
    std::vector<bool> seen(conditions.size(), false);
    for (int c : cond_idx) {
        if (c < 0 || c >= static_cast<int>(conditions.size()))
            throw std::invalid_argument("ConditionedDataset: condition index out of range");
        seen[static_cast<std::size_t>(c)] = true;
    }
    for (std::size_t i = 0; i < seen.size(); ++i)
        if (!seen[i])
            throw std::invalid_argument("ConditionedDataset: condition '" + conditions[i] +
                                        "' has no pairs");
}

void TrainSchedule::validate() const {
    if (n_start < 1 || n_final < n_start)
        throw std::invalid_argument("TrainSchedule: need 1 <= n_start <= n_final");
    if (epochs < 0) throw std::invalid_argument("TrainSchedule: epochs must be >= 0");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("TrainSchedule: lr must be > 0");
    if (m_particles < n_final)
        throw std::invalid_argument("TrainSchedule: m_particles must be >= n_final");
}

int TrainSchedule::effective_double_every() const {
    if (n_double_every > 0) return n_double_every;
    int levels = 0;
    for (int n = n_start; n < n_final; n *= 2) ++levels;
    return std::max(1, epochs / (levels + 1));
}

int TrainSchedule::n_at_epoch(int epoch) const {
    const int de = effective_double_every();
    long n = n_start;
    for (int i = 0; i < epoch / de && n < n_final; ++i) n *= 2;
    return static_cast<int>(std::min<long>(n, n_final));
}

int ParticleModel::condition_index(const std::string& label) const {
    auto it = std::find(conditions.begin(), conditions.end(), label);
    if (it == conditions.end())
        throw std::invalid_argument("ParticleModel: unknown condition '" + label + "'");
    return static_cast<int>(it - conditions.begin());
}

TrainResult train_mon(const ConditionedDataset& dataset, const TrainSchedule& schedule) {
    dataset.validate();
    schedule.validate();
    const int dim = dataset.targets.dim;
    const auto m = static_cast<std::size_t>(schedule.m_particles);

    TrainResult res;
    res.model.conditions = dataset.conditions;
    res.model.dim = dim;
    res.model.m = schedule.m_particles;
    Rng init_rng(derive_seed(schedule.seed, 0x696e6974, 0));
    for (std::size_t c = 0; c < dataset.conditions.size(); ++c) {
        std::vector<double> pts(m * static_cast<std::size_t>(dim));
        for (double& v : pts) v = schedule.init_spread * init_rng.normal();
        res.model.particles.push_back(std::move(pts));
    }

    Rng rng(derive_seed(schedule.seed, 0x747261696e, 0));
    const std::size_t n_pairs = dataset.size();
    const std::size_t steps = static_cast<std::size_t>(schedule.epochs) * n_pairs;
    res.loss_trace.reserve(steps);
    res.n_trace.reserve(steps);
    std::vector<std::size_t> drawn;
    for (std::size_t s = 0; s < steps; ++s) {
        const int epoch = static_cast<int>(s / n_pairs);
        const int n = schedule.n_at_epoch(epoch);
        const std::size_t pair = rng.uniform_int(n_pairs);
        const auto target = dataset.targets.point(pair);
        auto& pts = res.model.particles[static_cast<std::size_t>(dataset.cond_idx[pair])];

        drawn.resize(static_cast<std::size_t>(n));
        for (auto& d : drawn) d = rng.uniform_int(m);
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_p = drawn[0];
        for (std::size_t d : drawn) {
            const double dist = l2_distance(
                target, {pts.data() + d * static_cast<std::size_t>(dim),
                         static_cast<std::size_t>(dim)});
            if (dist < best) {  // first index among equals
                best = dist;
                best_p = d;
            }
        }
        double* p = pts.data() + best_p * static_cast<std::size_t>(dim);
        for (int d = 0; d < dim; ++d) p[d] += schedule.learning_rate * (target[d] - p[d]);
        res.loss_trace.push_back(best);
        res.n_trace.push_back(n);
    }
    return res;
}

SampleSet model_sample(const ParticleModel& m, const std::string& condition, std::size_t n,
                       std::uint64_t seed, double jitter) {
    const auto ci = static_cast<std::size_t>(m.condition_index(condition));
    const auto& pts = m.particles[ci];
    SampleSet out;
    out.dim = m.dim;
    out.seed = seed;
    out.data.resize(n * static_cast<std::size_t>(m.dim));
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t p = rng.uniform_int(static_cast<std::uint64_t>(m.m));
        for (int d = 0; d < m.dim; ++d) {
            double v = pts[p * static_cast<std::size_t>(m.dim) + static_cast<std::size_t>(d)];
            if (jitter > 0.0) v += jitter * rng.normal();
            out.data[i * static_cast<std::size_t>(m.dim) + static_cast<std::size_t>(d)] = v;
        }
    }
    return out;
}

LearnerScore evaluate_learner(const ParticleModel& m,
                              const std::map<std::string, BinnedDensity>& gt_bins,
                              std::size_t n_eval, std::uint64_t seed) {
    if (gt_bins.empty()) throw std::invalid_argument("evaluate_learner: no ground-truth bins");
    LearnerScore score;
    for (const auto& [label, gt] : gt_bins) {
        const auto samples =
            model_sample(m, label, n_eval, derive_seed(seed, hash_string(label), 0));
        const BinnedDensity model_bins = bin_samples(samples, gt.grid(), /*clip=*/true);
        score.js_raw += js_divergence(model_bins, gt);
        score.js_squared += js_divergence(power_transform_binned(model_bins, 2.0), gt);
    }
    score.js_raw /= static_cast<double>(gt_bins.size());
    score.js_squared /= static_cast<double>(gt_bins.size());
    return score;
}

ToyDataset make_toy_dataset(std::size_t n_pairs, std::uint64_t seed) {
    if (n_pairs < 1) throw std::invalid_argument("make_toy_dataset: need at least one pair");
    ToyDataset toy;
    toy.data.conditions = {"left", "right"};
    auto left = std::make_shared<GaussianMixture>(std::vector<GaussianComponent>{
        {0.5, {-2.0}, {1.0}}, {0.5, {-4.0}, {1.0}}});
    auto right = std::make_shared<GaussianMixture>(std::vector<GaussianComponent>{
        {0.5, {2.0}, {1.0}}, {0.5, {4.0}, {1.0}}});
    toy.target_mixtures = {{"left", left}, {"right", right}};

    toy.data.targets.dim = 1;
    Rng rng(seed);
    double x = 0.0;
    for (std::size_t i = 0; i < n_pairs; ++i) {
        const bool is_left = rng.uniform() < 0.5;
        toy.data.cond_idx.push_back(is_left ? 0 : 1);
        (is_left ? *left : *right).sample(rng, {&x, 1});
        toy.data.targets.data.push_back(x);
    }
    // tiny datasets may miss a condition; patch so both labels appear
    bool has[2] = {false, false};
    for (int c : toy.data.cond_idx) has[c] = true;
    for (int c = 0; c < 2; ++c)
        if (!has[c]) {
            toy.data.cond_idx[0] = c;
            toy.data.targets.data[0] = c == 0 ? -3.0 : 3.0;
        }
    return toy;
}

void write_model_csv(const ParticleModel& m, const std::string& path) {
    csv::Writer w(path);
    std::vector<std::string> head{"condition"};
    for (int d = 0; d < m.dim; ++d) head.push_back("x" + std::to_string(d));
    w.header(head);
    for (std::size_t c = 0; c < m.conditions.size(); ++c)
        for (int p = 0; p < m.m; ++p) {
            std::vector<std::string> row{m.conditions[c]};
            for (int d = 0; d < m.dim; ++d)
                row.push_back(csv::fmt(
                    m.particles[c][static_cast<std::size_t>(p) * m.dim + static_cast<std::size_t>(d)]));
            w.line(row);
        }
}

void write_loss_csv(const TrainResult& r, const std::string& path) {
    csv::Writer w(path);
    w.header({"step", "n", "loss"});
    for (std::size_t s = 0; s < r.loss_trace.size(); ++s)
        w.line({std::to_string(s), std::to_string(r.n_trace[s]), csv::fmt(r.loss_trace[s])});
}

}  // namespace monlab
