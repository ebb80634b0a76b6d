#pragma once

#include <functional>

#include "monlab/densities.hpp"

namespace monlab {

enum class SquaredSamplerMode { binned, rejection };

struct SquaredSamplerConfig {
    double epsilon = 0.05;           // bin width / proximity threshold
    long max_attempts = 10'000'000;  // per output sample
    SquaredSamplerMode mode = SquaredSamplerMode::binned;

    void validate() const {
        if (!(epsilon > 0.0))
            throw std::invalid_argument("SquaredSamplerConfig: epsilon must be > 0");
        if (max_attempts < 1)
            throw std::invalid_argument("SquaredSamplerConfig: max_attempts must be >= 1");
    }
};

// draws one sample into the span
using SamplerFn = std::function<void(Rng&, std::span<double>)>;

struct SquaredSampleResult {
    SampleSet samples;
    long draws_used = 0;  // total base-density draws
    double acceptance_rate() const {
        return draws_used > 0 ? static_cast<double>(samples.size()) / static_cast<double>(draws_used)
                              : 0.0;
    }
};

// Binned collision sampler: draw from P, hash each draw into an epsilon-grid
// cell, emit one of the two colliding samples (fair coin) once a cell
// receives its second hit. The cell table is reset after every output.
// Throws when max_attempts draws pass without a collision.
SquaredSampleResult sample_squared_binned(const SamplerFn& sampler, int dim,
                                          const SquaredSamplerConfig& cfg, std::size_t n_out,
                                          std::uint64_t seed);

// Pair-rejection sampler: draw pairs from P and accept one member (fair coin)
// whenever the pair is closer than epsilon in L2.
SquaredSampleResult sample_squared_rejection(const SamplerFn& sampler, int dim,
                                             const SquaredSamplerConfig& cfg, std::size_t n_out,
                                             std::uint64_t seed);

inline SamplerFn density_sampler(const DensityPtr& d) {
    return [d](Rng& rng, std::span<double> out) { d->sample(rng, out); };
}

}  // namespace monlab
