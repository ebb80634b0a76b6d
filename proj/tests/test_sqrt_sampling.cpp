#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "monlab/sqrt_sampling.hpp"

using namespace monlab;

namespace {

SamplerFn constant_sampler(double value) {
    return [value](Rng&, std::span<double> out) { out[0] = value; };
}

double l1_of_histograms(const SampleSet& a, const SampleSet& b, double lo, double hi, int bins) {
    GridSpec g = GridSpec::regular({lo}, {hi}, {bins});
    auto ha = bin_samples(a, g, true);
    auto hb = bin_samples(b, g, true);
    double s = 0.0;
    for (std::size_t i = 0; i < ha.masses().size(); ++i)
        s += std::abs(ha.masses()[i] - hb.masses()[i]);
    return s;
}

}  // namespace

TEST_CASE("point mass collides immediately") {
    SquaredSamplerConfig cfg;
    cfg.epsilon = 0.1;
    auto res = sample_squared_binned(constant_sampler(3.25), 1, cfg, 100, 1);
    CHECK(res.draws_used == 200);  // two draws per output
    for (std::size_t i = 0; i < res.samples.size(); ++i)
        CHECK(res.samples.point(i)[0] == 3.25);

    cfg.mode = SquaredSamplerMode::rejection;
    auto rej = sample_squared_rejection(constant_sampler(3.25), 1, cfg, 10, 1);
    CHECK(rej.draws_used == 20);  // first pair accepted every time
}

TEST_CASE("mode mismatch and attempt budget") {
    SquaredSamplerConfig cfg;
    cfg.mode = SquaredSamplerMode::rejection;
    CHECK_THROWS_AS(
        sample_squared_binned(constant_sampler(0.0), 1, cfg, 1, 1), std::invalid_argument);

    // a sampler that never revisits a cell exhausts the budget
    SquaredSamplerConfig tight;
    tight.epsilon = 1e-6;
    tight.max_attempts = 200;
    long counter = 0;
    auto runaway = [&counter](Rng&, std::span<double> out) {
        out[0] = static_cast<double>(counter++);
    };
    bool threw = false;
    try {
        (void)sample_squared_binned(runaway, 1, tight, 1000, 3);
    } catch (const std::runtime_error&) {
        threw = true;
    }
    CHECK(threw);
}

TEST_CASE("squared normal matches the analytic reference") {
    auto base = GaussianMixture::standard_normal(1);
    SquaredSamplerConfig cfg;
    cfg.epsilon = 0.05;
    auto ref = [](double x) { return normal_cdf(x, 0.0, std::sqrt(0.5)); };

    auto binned = sample_squared_binned(density_sampler(base), 1, cfg, 5000, 11);
    const double ks_b =
        ks_statistic({binned.samples.data.begin(), binned.samples.data.end()}, ref);
    CHECK(ks_b < 0.03);

    cfg.mode = SquaredSamplerMode::rejection;
    auto rej = sample_squared_rejection(density_sampler(base), 1, cfg, 5000, 12);
    const double ks_r = ks_statistic({rej.samples.data.begin(), rej.samples.data.end()}, ref);
    CHECK(ks_r < 0.03);

    // acceptance rate of the pair test against the overlap integral:
    // P(|x1-x2| < eps) ~= 2 eps / (2 sqrt(pi))
    const double pairs = static_cast<double>(rej.draws_used) / 2.0;
    const double rate = 5000.0 / pairs;
    const double oracle = 2.0 * cfg.epsilon / (2.0 * std::sqrt(M_PI));
    CHECK(std::abs(rate - oracle) / oracle < 0.2);
}

TEST_CASE("uniform input is a fixed point of squaring") {
    auto uniform = std::make_shared<BinnedDensity>(GridSpec{{0.0}, {1.0}, {1}},
                                                   std::vector<double>{1.0});
    SquaredSamplerConfig cfg;
    cfg.epsilon = 0.01;
    auto ref = [](double x) { return std::clamp(x, 0.0, 1.0); };

    auto binned = sample_squared_binned(density_sampler(uniform), 1, cfg, 5000, 21);
    CHECK(ks_statistic({binned.samples.data.begin(), binned.samples.data.end()}, ref) < 0.03);

    cfg.mode = SquaredSamplerMode::rejection;
    auto rej = sample_squared_rejection(density_sampler(uniform), 1, cfg, 5000, 22);
    CHECK(ks_statistic({rej.samples.data.begin(), rej.samples.data.end()}, ref) < 0.03);
}

TEST_CASE("both algorithms agree with each other") {
    auto base = GaussianMixture::standard_normal(1);
    SquaredSamplerConfig cfg;
    cfg.epsilon = 0.05;
    auto a = sample_squared_binned(density_sampler(base), 1, cfg, 10000, 31);
    cfg.mode = SquaredSamplerMode::rejection;
    auto b = sample_squared_rejection(density_sampler(base), 1, cfg, 10000, 32);
    CHECK(l1_of_histograms(a.samples, b.samples, -4.0, 4.0, 25) < 0.05);
}

TEST_CASE("bias shrinks as epsilon shrinks") {
    auto base = GaussianMixture::standard_normal(1);
    auto analytic = PowerDensity::make(base, 2.0);
    const int bins = 50;
    GridSpec g = GridSpec::regular({-4.0}, {4.0}, {bins});
    auto target = binned_from_mixture_cdf(
        GaussianMixture({{1.0, {0.0}, {std::sqrt(0.5)}}}), g);

    const std::size_t n = 20000;
    // multinomial L1 sampling-noise allowance
    const double slack = 3.0 * std::sqrt(2.0 * bins / (M_PI * static_cast<double>(n)));
    double prev = std::numeric_limits<double>::infinity();
    for (double eps : {0.4, 0.2, 0.1, 0.05}) {
        SquaredSamplerConfig cfg;
        cfg.epsilon = eps;
        auto out = sample_squared_binned(density_sampler(base), 1, cfg, n, 41);
        auto hist = bin_samples(out.samples, g, true);
        double l1 = 0.0;
        for (std::size_t i = 0; i < hist.masses().size(); ++i)
            l1 += std::abs(hist.masses()[i] - target.masses()[i]);
        CHECK(l1 <= prev + slack);
        prev = l1;
    }
}

TEST_CASE("deterministic given the seed") {
    auto base = GaussianMixture::standard_normal(1);
    SquaredSamplerConfig cfg;
    cfg.epsilon = 0.05;
    auto a = sample_squared_binned(density_sampler(base), 1, cfg, 500, 77);
    auto b = sample_squared_binned(density_sampler(base), 1, cfg, 500, 77);
    CHECK(a.samples.data == b.samples.data);
    CHECK(a.draws_used == b.draws_used);
}
