#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <thread>
#include <vector>

namespace monlab {

inline constexpr const char* kVersion = "monlab 0.1.0";

// Counter-free splitmix64 generator. Fully portable, trivially seedable,
// which is what the per-task seed derivation scheme needs.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1), 53 bits
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, bound)
    std::uint64_t uniform_int(std::uint64_t bound) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
    }

    // standard normal via Box-Muller; the spare is cached
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        // avoid log(0)
        while (u1 <= 0.0) u1 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// One avalanche round; used to mix seeds with stream identifiers.
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Derive an independent stream seed from a base seed and two identifiers.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::uint64_t h = mix64(seed ^ 0x2545f4914f6cdd1dull);
    h = mix64(h ^ mix64(a ^ 0x9e3779b97f4a7c15ull));
    h = mix64(h ^ mix64(b ^ 0xd1b54a32d192ed03ull));
    return h;
}

// FNV-1a over raw bytes
inline std::uint64_t hash_bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::uint64_t hash_string(std::string_view s) { return hash_bytes(s.data(), s.size()); }

// Hash of the bit patterns of a coordinate vector. Ties RNG streams to point
// content rather than dataset position, so estimates are invariant under
// dataset permutation.
inline std::uint64_t hash_point(std::span<const double> x) {
    return hash_bytes(x.data(), x.size() * sizeof(double));
}

// Permutation-invariant sum: sorts a scratch copy, then accumulates.
inline double sorted_sum(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    double s = 0.0;
    for (double v : values) s += v;
    return s;
}

inline double sorted_mean(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("sorted_mean: empty input");
    const double n = static_cast<double>(values.size());
    return sorted_sum(std::move(values)) / n;
}

// Runs fn(i) for i in [0, n). Each index writes its own output slot, so the
// result is identical for every thread count.
inline void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (std::size_t t = 0; t < nt; ++t) {
        pool.emplace_back([&, t]() {
            for (std::size_t i = t; i < n; i += nt) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

inline double normal_cdf(double x, double mean = 0.0, double stddev = 1.0) {
    return 0.5 * std::erfc(-(x - mean) / (stddev * 1.4142135623730950488));
}

// Inverse standard normal CDF (Acklam's rational approximation, |rel err| < 1.2e-9).
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal_quantile: p must be in (0,1)");
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double plow = 0.02425;
    double q, r;
    if (p < plow) {
        q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    q = p - 0.5;
    r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// Fisher-Yates shuffle driven by the given stream.
template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i)
        std::swap(v[i - 1], v[rng.uniform_int(i)]);
}

inline double sq(double x) { return x * x; }

inline double l2_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += sq(a[i] - b[i]);
    return std::sqrt(s);
}

// Kolmogorov-Smirnov statistic of a 1-d sample against a reference CDF.
inline double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw std::invalid_argument("ks_statistic: empty sample");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double f = cdf(samples[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    }
    return d;
}

struct RunningStats {
    std::size_t n = 0;
    double sum = 0.0;
    double sum_sq = 0.0;

    void add(double x) {
        ++n;
        sum += x;
        sum_sq += x * x;
    }
    double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
    // unbiased sample variance
    double variance() const {
        if (n < 2) return 0.0;
        const double m = mean();
        double v = (sum_sq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1);
        return v > 0.0 ? v : 0.0;
    }
    double stddev() const { return std::sqrt(variance()); }
};

}  // namespace monlab
