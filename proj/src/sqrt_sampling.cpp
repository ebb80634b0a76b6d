#include "monlab/sqrt_sampling.hpp"

#include <cmath>
#include <unordered_map>

namespace monlab {

namespace {

std::uint64_t cell_key(std::span<const double> x, double epsilon) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (double v : x) {
        const auto cell = static_cast<std::int64_t>(std::floor(v / epsilon));
        h ^= static_cast<std::uint64_t>(cell);
        h *= 0x100000001b3ull;
        h = mix64(h);
    }
    return h;
}

}  // namespace

SquaredSampleResult sample_squared_binned(const SamplerFn& sampler, int dim,
                                          const SquaredSamplerConfig& cfg, std::size_t n_out,
                                          std::uint64_t seed) {
    cfg.validate();
    if (cfg.mode != SquaredSamplerMode::binned)
        throw std::invalid_argument("sample_squared_binned: config mode mismatch");
    Rng rng(seed);
    SquaredSampleResult res;
    res.samples.dim = dim;
    res.samples.seed = seed;
    std::vector<double> buf(static_cast<std::size_t>(dim));
    std::unordered_map<std::uint64_t, std::vector<double>> table;
    for (std::size_t out = 0; out < n_out; ++out) {
        table.clear();
        long attempts = 0;
        while (true) {
            if (++attempts > cfg.max_attempts)
                throw std::runtime_error(
                    "sample_squared_binned: no collision within max_attempts "
                    "(epsilon too small or dimension too high)");
            sampler(rng, buf);
            ++res.draws_used;
            auto [it, fresh] = table.try_emplace(cell_key(buf, cfg.epsilon), buf);
            if (!fresh) {
                const bool take_new = rng.uniform() < 0.5;
                res.samples.push(take_new ? std::span<const double>(buf)
                                          : std::span<const double>(it->second));
                break;
            }
        }
    }
    return res;
}

SquaredSampleResult sample_squared_rejection(const SamplerFn& sampler, int dim,
                                             const SquaredSamplerConfig& cfg, std::size_t n_out,
                                             std::uint64_t seed) {
    cfg.validate();
    if (cfg.mode != SquaredSamplerMode::rejection)
        throw std::invalid_argument("sample_squared_rejection: config mode mismatch");
    Rng rng(seed);
    SquaredSampleResult res;
    res.samples.dim = dim;
    res.samples.seed = seed;
    std::vector<double> a(static_cast<std::size_t>(dim)), b(static_cast<std::size_t>(dim));
    for (std::size_t out = 0; out < n_out; ++out) {
        long attempts = 0;
        while (true) {
            if (++attempts > cfg.max_attempts)
                throw std::runtime_error(
                    "sample_squared_rejection: no accepted pair within max_attempts "
                    "(epsilon too small or dimension too high)");
            sampler(rng, a);
            sampler(rng, b);
            res.draws_used += 2;
            if (l2_distance(a, b) < cfg.epsilon) {
                const bool take_first = rng.uniform() < 0.5;
                res.samples.push(take_first ? std::span<const double>(a)
                                            : std::span<const double>(b));
                break;
            }
        }
    }
    return res;
}

}  // namespace monlab
