#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "monlab/densities.hpp"

using namespace monlab;

namespace {

double l1_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
    return s;
}

// continuous JS divergence by fine trapezoidal quadrature
double js_quadrature(const GaussianMixture& p, const GaussianMixture& q, double lo, double hi,
                     int n_nodes) {
    const double h = (hi - lo) / (n_nodes - 1);
    double sum = 0.0;
    for (int i = 0; i < n_nodes; ++i) {
        const double x = lo + h * i;
        const double pv = p.pdf({&x, 1});
        const double qv = q.pdf({&x, 1});
        const double m = 0.5 * (pv + qv);
        double term = 0.0;
        if (pv > 0.0) term += 0.5 * pv * std::log(pv / m);
        if (qv > 0.0) term += 0.5 * qv * std::log(qv / m);
        sum += (i == 0 || i == n_nodes - 1) ? 0.5 * term : term;
    }
    return sum * h;
}

GaussianMixture normal1d(double mean, double stddev) {
    return GaussianMixture({{1.0, {mean}, {stddev}}});
}

}  // namespace

TEST_CASE("gaussian mixture evaluation") {
    auto std_normal = GaussianMixture::standard_normal(1);
    double x = 0.0;
    CHECK(density_eval(*std_normal, {&x, 1}) == doctest::Approx(0.3989422804).epsilon(1e-9));

    GaussianMixture mix({{0.25, {-1.0}, {0.5}}, {0.75, {2.0}, {1.0}}});
    x = -1.0;
    const double expect = 0.25 / (0.5 * std::sqrt(2 * M_PI)) +
                          0.75 * std::exp(-0.5 * 9.0) / std::sqrt(2 * M_PI);
    CHECK(mix.pdf({&x, 1}) == doctest::Approx(expect).epsilon(1e-12));

    double xy[2] = {0.0, 0.0};
    CHECK_THROWS_AS((void)density_eval(*std_normal, {xy, 2}), std::invalid_argument);

    CHECK_THROWS_AS(GaussianMixture({{0.7, {0.0}, {1.0}}}), std::invalid_argument);
    CHECK_THROWS_AS(GaussianMixture({{1.0, {0.0}, {0.0}}}), std::invalid_argument);
}

TEST_CASE("power density evaluation") {
    auto base = GaussianMixture::standard_normal(1);
    double x = 0.7;
    auto identity = PowerDensity::make(base, 1.0);
    CHECK(identity->pdf({&x, 1}) == doctest::Approx(base->pdf({&x, 1})).epsilon(1e-9));

    // squaring a standard normal gives N(0, sqrt(0.5))
    auto squared = PowerDensity::make(base, 2.0);
    x = 0.0;
    CHECK(squared->pdf({&x, 1}) == doctest::Approx(0.5641895835).epsilon(1e-7));

    const auto* pd = dynamic_cast<const PowerDensity*>(squared.get());
    REQUIRE(pd != nullptr);
    CHECK(pd->norm_constant() == doctest::Approx(1.0 / (2.0 * std::sqrt(M_PI))).epsilon(1e-9));

    CHECK_THROWS_AS(PowerDensity::make(base, -0.5), std::invalid_argument);
}

TEST_CASE("sampling moments and determinism") {
    auto std_normal = GaussianMixture::standard_normal(1);
    const auto s = density_sample(*std_normal, 100000, 42);
    RunningStats st;
    for (double v : s.data) st.add(v);
    CHECK(std::abs(st.mean()) < 0.02);
    CHECK(std::abs(st.stddev() - 1.0) < 0.02);

    const auto squared = PowerDensity::make(std_normal, 2.0);
    const auto s2 = density_sample(*squared, 100000, 43);
    RunningStats st2;
    for (double v : s2.data) st2.add(v);
    CHECK(std::abs(st2.stddev() - std::sqrt(0.5)) < 0.02);

    const auto again = density_sample(*std_normal, 100000, 42);
    CHECK(again.data == s.data);
}

TEST_CASE("binning samples") {
    GridSpec g4 = GridSpec::regular({0.0}, {4.0}, {4});
    SampleSet s;
    s.dim = 1;
    s.data = {0.5, 1.5, 2.5, 3.5};
    auto b = bin_samples(s, g4);
    for (double m : b.masses()) CHECK(m == doctest::Approx(0.25));

    SampleSet one;
    one.dim = 1;
    one.data = {1.2, 1.3, 1.4};
    auto b1 = bin_samples(one, g4);
    CHECK(b1.masses()[1] == doctest::Approx(1.0));

    SampleSet empty;
    empty.dim = 1;
    CHECK_THROWS_AS(bin_samples(empty, g4), std::invalid_argument);

    SampleSet outside;
    outside.dim = 1;
    outside.data = {-3.0, 1.0};
    CHECK_THROWS_AS(bin_samples(outside, g4), std::invalid_argument);
    auto clipped = bin_samples(outside, g4, true);
    CHECK(clipped.masses()[0] == doctest::Approx(0.5));

    // large-sample histogram against analytic CDF-difference masses
    auto std_normal_mix = normal1d(0.0, 1.0);
    auto samples = density_sample(std_normal_mix, 1000000, 7);
    GridSpec g100 = GridSpec::regular({-5.0}, {5.0}, {100});
    auto hist = bin_samples(samples, g100, true);
    auto analytic = binned_from_mixture_cdf(std_normal_mix, g100);
    CHECK(l1_distance(hist.masses(), analytic.masses()) < 0.01);
}

TEST_CASE("binned power transform") {
    GridSpec g2 = GridSpec::regular({0.0}, {2.0}, {2});
    BinnedDensity b(g2, {0.8, 0.2});

    auto same = power_transform_binned(b, 1.0);
    CHECK(same.masses()[0] == doctest::Approx(0.8).epsilon(1e-12));

    auto sq = power_transform_binned(b, 2.0);
    CHECK(sq.masses()[0] == doctest::Approx(0.9411764705882353).epsilon(1e-12));
    CHECK(sq.masses()[1] == doctest::Approx(0.058823529411764705).epsilon(1e-12));

    GridSpec g5 = GridSpec::regular({0.0}, {5.0}, {5});
    BinnedDensity uniform(g5, std::vector<double>(5, 0.2));
    for (double k : {0.3, 2.0, 17.0}) {
        auto u = power_transform_binned(uniform, k);
        for (double m : u.masses()) CHECK(m == doctest::Approx(0.2).epsilon(1e-12));
    }

    // huge exponents concentrate on the argmax instead of underflowing
    auto extreme = power_transform_binned(b, 5000.0);
    CHECK(extreme.masses()[0] == doctest::Approx(1.0));
}

TEST_CASE("exponent composition on binned densities") {
    GridSpec g = GridSpec::regular({-3.0}, {3.0}, {60});
    auto base = binned_from_mixture_cdf(normal1d(0.3, 0.8), g);
    auto two_steps = power_transform_binned(power_transform_binned(base, 0.7), 1.9);
    auto one_step = power_transform_binned(base, 0.7 * 1.9);
    CHECK(l1_distance(two_steps.masses(), one_step.masses()) < 1e-9);
}

TEST_CASE("square-root dilation inverts through the compensation transform") {
    auto base = std::make_shared<GaussianMixture>(
        GaussianMixture({{0.6, {0.0}, {1.0}}, {0.4, {3.0}, {0.5}}}));
    auto dilated = PowerDensity::make(base, 0.5);
    GridSpec g = GridSpec::regular({-5.0}, {8.0}, {200});
    auto dilated_bins = binned_from_density(*dilated, g);
    auto recovered = power_transform_binned(dilated_bins, 2.0);
    auto expected = binned_from_density(*base, g);
    CHECK(l1_distance(recovered.masses(), expected.masses()) < 1e-6);
}

TEST_CASE("jensen-shannon divergence") {
    GridSpec g = GridSpec::regular({0.0}, {4.0}, {4});
    BinnedDensity a(g, {0.5, 0.5, 0.0, 0.0});
    BinnedDensity b(g, {0.0, 0.0, 0.25, 0.75});
    BinnedDensity c(g, {0.1, 0.4, 0.3, 0.2});

    CHECK(js_divergence(a, a) == 0.0);
    CHECK(js_divergence(c, c) == 0.0);
    CHECK(js_divergence(a, b) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(js_divergence(a, c) == js_divergence(c, a));

    GridSpec other = GridSpec::regular({0.0}, {4.0}, {8});
    BinnedDensity d(other, std::vector<double>(8, 0.125));
    CHECK_THROWS_AS((void)js_divergence(a, d), std::invalid_argument);

    // binned value against a fine quadrature oracle
    auto p = normal1d(0.0, 1.0);
    auto q = normal1d(1.0, 1.0);
    GridSpec fine = GridSpec::regular({-6.0}, {7.0}, {500});
    const double binned =
        js_divergence(binned_from_mixture_cdf(p, fine), binned_from_mixture_cdf(q, fine));
    const double oracle = js_quadrature(p, q, -6.0, 7.0, 200001);
    CHECK(std::abs(binned - oracle) < 1e-3);
}

TEST_CASE("product density splits the exponent over factors") {
    auto prod = iid_standard_normal(3);
    CHECK(prod->dim() == 3);
    auto powered = PowerDensity::make(prod, 2.0);
    double x[3] = {0.1, -0.4, 0.9};
    double expect = 1.0;
    for (double xi : x) {
        auto f = PowerDensity::make(GaussianMixture::standard_normal(1), 2.0);
        expect *= f->pdf({&xi, 1});
    }
    CHECK(powered->pdf({x, 3}) == doctest::Approx(expect).epsilon(1e-9));

    auto s = density_sample(*powered, 50000, 11);
    for (int d = 0; d < 3; ++d) {
        RunningStats st;
        for (std::size_t i = 0; i < s.size(); ++i) st.add(s.point(i)[d]);
        CHECK(std::abs(st.stddev() - std::sqrt(0.5)) < 0.02);
    }
}

TEST_CASE("binned density csv serialization") {
    GridSpec g = GridSpec::regular({0.0}, {1.0}, {2});
    BinnedDensity b(g, {0.25, 0.75});
    const std::string path = "test_binned.csv";
    write_binned_csv(b, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "bin_center_0,mass");
    std::getline(in, line);
    CHECK(line == "0.25,0.25");
    std::remove(path.c_str());
}
