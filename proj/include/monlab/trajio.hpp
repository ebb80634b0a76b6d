#pragma once

#include <array>
#include <string>
#include <vector>

#include "monlab/mon.hpp"

namespace monlab {

using Point2 = std::array<double, 2>;

// One prediction instance: observed past, ground-truth future, and K
// model-sampled futures of the same horizon.
struct Scene {
    std::string scene_id;
    std::vector<Point2> observed;
    std::vector<Point2> ground_truth;
    std::vector<std::vector<Point2>> samples;

    int horizon() const { return static_cast<int>(ground_truth.size()); }
    std::size_t n_samples() const { return samples.size(); }
    void validate() const;
};

struct SceneSet {
    std::vector<Scene> scenes;
    int horizon = 0;

    void validate() const;
};

// JSONL, one scene per line. An optional first line carries
// {"meta": {"T": ..., "units": "meters"}}. Parsing fails atomically on the
// first malformed record, reporting the line number.
SceneSet load_scenes(const std::string& path);
void save_scenes(const SceneSet& set, const std::string& path);

enum class SynthKind { faithful, sqrt_dilated, power };

SynthKind synth_kind_from_string(const std::string& name);
std::string to_string(SynthKind kind);

struct SynthScenes {
    SceneSet scenes;
    // generating per-timestep marginal of the ground-truth process, [scene][t]
    std::vector<std::vector<DensityPtr>> gt_marginals;
    double sample_exponent = 1.0;
};

// Synthetic scene generator: ground-truth futures follow a two-mode
// left/right random walk with per-step Gaussian displacement noise; sampled
// futures are drawn per timestep from the power-family member of the
// ground-truth marginal (exponent 1 = faithful, 0.5 = sqrt-dilated dilation
// regime, k = arbitrary). Deterministic given the seed; the ground-truth
// stream does not depend on the kind, so runs with equal seeds are paired.
// scale multiplies the whole geometry (drift, step noise, origin spread);
// noise_ratio_y shrinks the y displacement noise relative to x (real
// trajectory data is strongly anisotropic along track); mode_split is the
// initial left/right mode offset in noise-stddev units, small values blend
// the modes into one broad lobe. balanced_samples stratifies the sample
// quantiles per scene (variance-reduced model emissions for the KDE suites);
// disable it for plain iid emissions.
SynthScenes synth_scenes(SynthKind kind, std::size_t n_scenes, std::size_t k_samples, int horizon,
                         std::uint64_t seed, double power_k = 2.0, double scale = 1.0,
                         double noise_ratio_y = 1.0, double mode_split = 2.2,
                         bool balanced_samples = true);

// MoN metric on whole trajectories: per scene and repetition, choose N of the
// K sampled futures without replacement and take the minimum L2 distance of
// the flattened 2T-vectors to the ground truth; average over repetitions and
// scenes. Samples are canonicalized (sorted) per scene and repetition streams
// are keyed by scene_id, so the result is invariant under scene order and
// sample order.
MonEstimate mon_metric(const SceneSet& set, int n_candidates, int repetitions, std::uint64_t seed,
                       int threads = 1);

}  // namespace monlab
