#pragma once

#include <map>
#include <string>
#include <vector>

#include "monlab/densities.hpp"

namespace monlab {

// (condition, target) pairs with a shared condition label table
struct ConditionedDataset {
    std::vector<std::string> conditions;
    std::vector<int> cond_idx;  // one entry per pair
    SampleSet targets;          // one point per pair

    std::size_t size() const { return cond_idx.size(); }
    void validate() const;
};

struct TrainSchedule {
    int n_start = 2;
    int n_final = 128;
    int n_double_every = 0;  // epochs between doublings; 0 = spread evenly
    int epochs = 48;
    double learning_rate = 0.05;
    int m_particles = 512;     // per condition
    double init_spread = 2.0;  // particle init stddev around the origin
    std::uint64_t seed = 0;

    void validate() const;
    int effective_double_every() const;
    int n_at_epoch(int epoch) const;
};

// Conditional generative model as per-condition particle sets; sampling picks
// a particle uniformly at random.
struct ParticleModel {
    std::vector<std::string> conditions;
    int dim = 0;
    int m = 0;                                  // particles per condition
    std::vector<std::vector<double>> particles; // per condition, flat point-major

    int condition_index(const std::string& label) const;
};

struct TrainResult {
    ParticleModel model;
    std::vector<double> loss_trace;  // per-step minimum distance
    std::vector<int> n_trace;        // N in effect at each step
};

// Stochastic subgradient training of the empirical MoN loss: per step, draw a
// (condition, target) pair, sample N current particles with replacement, and
// move the nearest of them toward the target by lr * (target - particle).
// N follows the doubling schedule. Deterministic given the seed.
TrainResult train_mon(const ConditionedDataset& dataset, const TrainSchedule& schedule);

// n uniform-with-replacement particle draws plus optional Gaussian jitter
SampleSet model_sample(const ParticleModel& m, const std::string& condition, std::size_t n,
                       std::uint64_t seed, double jitter = 0.0);

struct LearnerScore {
    double js_raw = 0.0;      // JS(model bins, ground-truth bins)
    double js_squared = 0.0;  // JS(model bins squared-and-renormalized, ground-truth bins)
};

// Binned JS of model samples against ground-truth bin masses, raw and after
// the squaring compensation, averaged over conditions.
LearnerScore evaluate_learner(const ParticleModel& m,
                              const std::map<std::string, BinnedDensity>& gt_bins,
                              std::size_t n_eval, std::uint64_t seed);

// Two-condition toy problem: targets are bimodal mixtures mirrored around 0.
struct ToyDataset {
    ConditionedDataset data;
    std::map<std::string, std::shared_ptr<const GaussianMixture>> target_mixtures;
};

ToyDataset make_toy_dataset(std::size_t n_pairs, std::uint64_t seed);

void write_model_csv(const ParticleModel& m, const std::string& path);
void write_loss_csv(const TrainResult& r, const std::string& path);

}  // namespace monlab
