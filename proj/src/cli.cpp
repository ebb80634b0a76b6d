#include "monlab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "monlab/csv.hpp"
#include "monlab/kde.hpp"
#include "monlab/learner.hpp"
#include "monlab/mon.hpp"
#include "monlab/sqrt_sampling.hpp"
#include "monlab/svg.hpp"
#include "monlab/trajio.hpp"

namespace monlab {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct GlobalOpts {
    std::uint64_t seed = 0;
    int threads = 1;
    std::string out_dir = ".";
    bool svg = false;

    fs::path out(const std::string& name) const { return fs::path(out_dir) / name; }
};

// The manifest is written before any results. Output paths are relative to
// the out dir so reruns into different directories stay byte-identical.
void write_manifest(const GlobalOpts& g, const std::string& subcommand, const json& config,
                    const std::vector<std::string>& outputs) {
    fs::create_directories(g.out_dir);
    json m;
    m["subcommand"] = subcommand;
    m["seed"] = g.seed;
    m["threads"] = g.threads;
    m["version"] = kVersion;
    m["config"] = config;
    m["outputs"] = outputs;
    std::string name = subcommand + "_manifest.json";
    std::replace(name.begin(), name.end(), '-', '_');
    std::ofstream out(g.out(name), std::ios::binary);
    if (!out) throw std::runtime_error("cannot write manifest in " + g.out_dir);
    out << m.dump(2) << '\n';
}

std::vector<double> resolve_k_grid(const std::vector<double>& explicit_grid, double k_min,
                                   double k_max, double k_step) {
    if (!explicit_grid.empty()) {
        auto g = explicit_grid;
        std::sort(g.begin(), g.end());
        return g;
    }
    std::vector<double> g;
    for (int i = 0;; ++i) {
        const double k = k_min + k_step * i;
        if (k > k_max + 1e-12) break;
        g.push_back(k);
    }
    return g;
}

// ---- mon-scan ----

struct MonScanOpts {
    int n = 256;
    long m = 20000;
    int r = 20;
    int dims = 1;
    double k_min = 0.3, k_max = 1.5, k_step = 0.05;
    std::vector<double> k_grid;
};

int cmd_mon_scan(const GlobalOpts& g, const MonScanOpts& o) {
    const auto grid = resolve_k_grid(o.k_grid, o.k_min, o.k_max, o.k_step);
    write_manifest(g, "mon-scan",
                   {{"n", o.n},
                    {"m", o.m},
                    {"r", o.r},
                    {"dims", o.dims},
                    {"k_grid", grid}},
                   {"mon_scan.csv"});

    const DensityPtr base = iid_standard_normal(o.dims);
    const SampleSet gt = density_sample(*base, static_cast<std::size_t>(o.m),
                                        derive_seed(g.seed, hash_string("ground-truth"), 0));
    MonConfig cfg;
    cfg.n_candidates = o.n;
    cfg.repetitions = o.r;
    cfg.seed = g.seed;
    const ExponentScan scan = minimizing_exponent_search(base, gt, grid, cfg, g.threads);

    csv::Writer w(g.out("mon_scan.csv").string());
    w.header({"k", "loss", "std_error"});
    for (std::size_t i = 0; i < grid.size(); ++i)
        w.row({grid[i], scan.losses[i].value, scan.losses[i].std_error});

    if (g.svg) {
        svg::LinePlot plot("dataset MoN loss vs exponent (N=" + std::to_string(o.n) + ")", "k",
                           "MoN loss");
        svg::Series s;
        s.x = grid;
        for (const auto& e : scan.losses) s.y.push_back(e.value);
        s.label = "loss";
        plot.add_series(std::move(s));
        plot.write(g.out("mon_scan.svg").string());
    }
    std::cout << "k_star=" << csv::fmt(scan.k_star) << "\n";
    return 0;
}

// ---- k-vs-n ----

struct KvsNOpts {
    int dims = 1;
    std::vector<int> n_list = {1, 2, 4, 8, 16, 32, 64, 128, 256};
    long m = 8000;
    int r = 10;
    double k_min = 0.3, k_max = 1.5, k_step = 0.05;
    std::vector<double> k_grid;
};

int cmd_k_vs_n(const GlobalOpts& g, const KvsNOpts& o) {
    const auto grid = resolve_k_grid(o.k_grid, o.k_min, o.k_max, o.k_step);
    write_manifest(g, "k-vs-n",
                   {{"dims", o.dims},
                    {"n_list", o.n_list},
                    {"m", o.m},
                    {"r", o.r},
                    {"k_grid", grid}},
                   {"k_vs_n.csv", "k_vs_n_summary.csv"});

    const DensityPtr base = iid_standard_normal(o.dims);
    const SampleSet gt = density_sample(*base, static_cast<std::size_t>(o.m),
                                        derive_seed(g.seed, hash_string("ground-truth"), 0));
    MonConfig cfg;
    cfg.repetitions = o.r;
    cfg.seed = g.seed;
    auto n_list = o.n_list;
    std::sort(n_list.begin(), n_list.end());
    const auto entries = k_vs_n_scan(base, gt, n_list, grid, cfg, g.threads);

    write_scan_csv(entries, g.out("k_vs_n.csv").string());
    csv::Writer w(g.out("k_vs_n_summary.csv").string());
    w.header({"N", "k_star"});
    for (const auto& e : entries) {
        w.row({static_cast<double>(e.n), e.scan.k_star});
        std::cout << "N=" << e.n << " k_star=" << csv::fmt(e.scan.k_star) << "\n";
    }

    if (g.svg) {
        svg::LinePlot plot("MoN-minimizing exponent vs N (dims=" + std::to_string(o.dims) + ")",
                           "N", "k_star");
        svg::Series s;
        for (const auto& e : entries) {
            s.x.push_back(static_cast<double>(e.n));
            s.y.push_back(e.scan.k_star);
        }
        plot.add_series(std::move(s));
        plot.write(g.out("k_vs_n.svg").string());
    }
    return 0;
}

// ---- square-sample ----

struct SquareSampleOpts {
    std::string mode = "both";  // binned | rejection | both
    std::string input_dist = "normal";
    double epsilon = 0.05;
    long n_out = 5000;
    long max_attempts = 10'000'000;
};

int cmd_square_sample(const GlobalOpts& g, const SquareSampleOpts& o) {
    std::vector<std::string> modes;
    if (o.mode == "both")
        modes = {"binned", "rejection"};
    else if (o.mode == "binned" || o.mode == "rejection")
        modes = {o.mode};
    else
        throw CLI::ValidationError("--mode must be binned, rejection or both");

    std::vector<std::string> outputs = {"square_sample_report.csv"};
    for (const auto& m : modes) outputs.push_back("squared_samples_" + m + ".csv");
    write_manifest(g, "square-sample",
                   {{"mode", o.mode},
                    {"input_dist", o.input_dist},
                    {"epsilon", o.epsilon},
                    {"n_out", o.n_out},
                    {"max_attempts", o.max_attempts}},
                   outputs);

    DensityPtr base;
    std::function<double(double)> ref_cdf;
    if (o.input_dist == "normal") {
        base = GaussianMixture::standard_normal(1);
        // squaring N(0,1) yields N(0, sqrt(0.5))
        ref_cdf = [](double x) { return normal_cdf(x, 0.0, std::sqrt(0.5)); };
    } else if (o.input_dist == "uniform") {
        base = std::make_shared<BinnedDensity>(GridSpec{{0.0}, {1.0}, {1}},
                                               std::vector<double>{1.0});
        // uniform is a fixed point of squaring
        ref_cdf = [](double x) { return std::clamp(x, 0.0, 1.0); };
    } else {
        throw CLI::ValidationError("--input-dist must be normal or uniform");
    }

    csv::Writer report(g.out("square_sample_report.csv").string());
    report.header({"mode", "ks", "n_out", "draws_used", "acceptance_rate"});
    svg::LinePlot plot("squared-distribution sampler vs analytic reference", "x", "density");

    for (const auto& mode : modes) {
        SquaredSamplerConfig cfg;
        cfg.epsilon = o.epsilon;
        cfg.max_attempts = o.max_attempts;
        cfg.mode = mode == "binned" ? SquaredSamplerMode::binned : SquaredSamplerMode::rejection;
        const auto sampler = density_sampler(base);
        const SquaredSampleResult res =
            mode == "binned"
                ? sample_squared_binned(sampler, 1, cfg, static_cast<std::size_t>(o.n_out),
                                        derive_seed(g.seed, hash_string(mode), 0))
                : sample_squared_rejection(sampler, 1, cfg, static_cast<std::size_t>(o.n_out),
                                           derive_seed(g.seed, hash_string(mode), 0));
        write_samples_csv(res.samples, g.out("squared_samples_" + mode + ".csv").string());
        const double ks =
            ks_statistic({res.samples.data.begin(), res.samples.data.end()}, ref_cdf);
        report.line({mode, csv::fmt(ks), std::to_string(o.n_out), std::to_string(res.draws_used),
                     csv::fmt(res.acceptance_rate())});
        std::cout << "mode=" << mode << " ks=" << csv::fmt(ks)
                  << " draws=" << res.draws_used << "\n";

        if (g.svg) {
            auto box = base->support_box();
            GridSpec hist = GridSpec::regular({box[0][0]}, {box[0][1]}, {60});
            const BinnedDensity bins = bin_samples(res.samples, hist, true);
            svg::Series s;
            for (std::size_t i = 0; i < bins.masses().size(); ++i) {
                s.x.push_back(bins.grid().bin_center(i)[0]);
                s.y.push_back(bins.masses()[i] / bins.grid().bin_volume());
            }
            s.label = mode;
            plot.add_series(std::move(s));
        }
    }
    if (g.svg) plot.write(g.out("square_sample.svg").string());
    return 0;
}

// ---- learn-toy ----

struct LearnToyOpts {
    int seeds = 5;
    int epochs = 48;
    int n_start = 2;
    int n_final = 128;
    int n_double_every = 0;
    int m_particles = 512;
    double lr = 0.05;
    long pairs = 4000;
    long n_eval = 200000;
    int bins = 100;
    double range_lo = -8.0, range_hi = 8.0;
};

int cmd_learn_toy(const GlobalOpts& g, const LearnToyOpts& o) {
    write_manifest(g, "learn-toy",
                   {{"seeds", o.seeds},
                    {"epochs", o.epochs},
                    {"n_start", o.n_start},
                    {"n_final", o.n_final},
                    {"n_double_every", o.n_double_every},
                    {"m_particles", o.m_particles},
                    {"lr", o.lr},
                    {"pairs", o.pairs},
                    {"n_eval", o.n_eval},
                    {"bins", o.bins},
                    {"range", {o.range_lo, o.range_hi}}},
                   {"learn_toy_js.csv", "learn_toy_model.csv", "learn_toy_loss.csv"});

    const ToyDataset toy =
        make_toy_dataset(static_cast<std::size_t>(o.pairs), derive_seed(g.seed, 0xda7a, 0));
    const GridSpec grid = GridSpec::regular({o.range_lo}, {o.range_hi}, {o.bins});
    std::map<std::string, BinnedDensity> gt_bins;
    for (const auto& [label, mix] : toy.target_mixtures)
        gt_bins.emplace(label, binned_from_mixture_cdf(*mix, grid));

    std::vector<TrainResult> runs(static_cast<std::size_t>(o.seeds));
    std::vector<LearnerScore> scores(runs.size());
    parallel_for(runs.size(), g.threads, [&](std::size_t si) {
        TrainSchedule sched;
        sched.n_start = o.n_start;
        sched.n_final = o.n_final;
        sched.n_double_every = o.n_double_every;
        sched.epochs = o.epochs;
        sched.learning_rate = o.lr;
        sched.m_particles = o.m_particles;
        sched.seed = derive_seed(g.seed, hash_string("learn"), si);
        runs[si] = train_mon(toy.data, sched);
        scores[si] = evaluate_learner(runs[si].model, gt_bins, static_cast<std::size_t>(o.n_eval),
                                      derive_seed(g.seed, hash_string("eval"), si));
    });

    csv::Writer w(g.out("learn_toy_js.csv").string());
    w.header({"seed_index", "js_raw", "js_squared"});
    std::vector<double> raws, sqs;
    for (std::size_t si = 0; si < scores.size(); ++si) {
        w.row({static_cast<double>(si), scores[si].js_raw, scores[si].js_squared});
        raws.push_back(scores[si].js_raw);
        sqs.push_back(scores[si].js_squared);
        std::cout << "seed " << si << ": JS_raw=" << csv::fmt(scores[si].js_raw)
                  << ", JS_squared=" << csv::fmt(scores[si].js_squared) << "\n";
    }
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    };
    std::cout << "JS_raw=" << csv::fmt(median(raws)) << ", JS_squared=" << csv::fmt(median(sqs))
              << " (medians over " << o.seeds << " seeds)\n";

    write_model_csv(runs[0].model, g.out("learn_toy_model.csv").string());
    write_loss_csv(runs[0], g.out("learn_toy_loss.csv").string());

    if (o.n_final == 1) {
        // mean-collapse heuristic: compare model spread against target spread
        for (const auto& [label, mix] : toy.target_mixtures) {
            const SampleSet s = model_sample(runs[0].model, label, 20000,
                                             derive_seed(g.seed, hash_string("collapse"), 0));
            RunningStats st;
            for (double v : s.data) st.add(v);
            RunningStats gt;
            const SampleSet t = density_sample(*mix, 20000, derive_seed(g.seed, 0xc0, 1));
            for (double v : t.data) gt.add(v);
            if (st.stddev() < 0.5 * gt.stddev())
                std::cout << "warning: N=1 training collapsed condition '" << label
                          << "' toward the conditional mean (model std " << csv::fmt(st.stddev())
                          << " vs target std " << csv::fmt(gt.stddev()) << ")\n";
        }
    }

    if (g.svg) {
        svg::LinePlot plot("learned vs ground-truth densities", "x", "mass");
        for (const auto& [label, gt] : gt_bins) {
            const SampleSet s =
                model_sample(runs[0].model, label, static_cast<std::size_t>(o.n_eval),
                             derive_seed(g.seed, hash_string("plot-" + label), 0));
            const BinnedDensity mb = bin_samples(s, grid, true);
            svg::Series gt_s, m_s;
            for (std::size_t i = 0; i < gt.masses().size(); ++i) {
                const double c = gt.grid().bin_center(i)[0];
                gt_s.x.push_back(c);
                gt_s.y.push_back(gt.masses()[i]);
                m_s.x.push_back(c);
                m_s.y.push_back(mb.masses()[i]);
            }
            gt_s.label = label + " target";
            m_s.label = label + " model";
            plot.add_series(std::move(gt_s));
            plot.add_series(std::move(m_s));
        }
        plot.write(g.out("learn_toy.svg").string());
    }
    return 0;
}

// ---- synth ----

struct SynthOpts {
    std::string kind = "sqrt_dilated";
    double power_k = 2.0;
    long scenes = 20;
    long k = 1000;
    int t = 3;
    double scale = 2.75;
    double noise_y_ratio = 1.0;
    double mode_split = 2.2;
    bool iid_samples = false;
    std::string out = "scenes.jsonl";
};

int cmd_synth(const GlobalOpts& g, const SynthOpts& o) {
    write_manifest(g, "synth",
                   {{"kind", o.kind},
                    {"power_k", o.power_k},
                    {"scenes", o.scenes},
                    {"k", o.k},
                    {"t", o.t},
                    {"scale", o.scale},
                    {"noise_y_ratio", o.noise_y_ratio},
                    {"mode_split", o.mode_split},
                    {"iid_samples", o.iid_samples},
                    {"out", o.out}},
                   {o.out});
    const SynthScenes synth =
        synth_scenes(synth_kind_from_string(o.kind), static_cast<std::size_t>(o.scenes),
                     static_cast<std::size_t>(o.k), o.t, g.seed, o.power_k, o.scale,
                     o.noise_y_ratio, o.mode_split, !o.iid_samples);
    const fs::path path = fs::path(o.out).is_absolute() ? fs::path(o.out) : g.out(o.out);
    save_scenes(synth.scenes, path.string());
    std::cout << "wrote " << o.scenes << " " << o.kind << " scenes (K=" << o.k << ", T=" << o.t
              << ") to " << path.string() << "\n";
    return 0;
}

// ---- compensate ----

struct CompensateOpts {
    std::string input;
    int t = 0;  // 0 = all timesteps
    bool joint = false;
    int n_sample = 1000;
    double alpha_split = 0.7;
    int k_count = 25;
    double k_min = 0.001, k_max = 3.0;
    int grid_nx = 100, grid_ny = 100;
};

CompensationConfig compensation_config(const CompensateOpts& o) {
    CompensationConfig cfg;
    cfg.n_sample = o.n_sample;
    cfg.alpha_split = o.alpha_split;
    cfg.k_search = linspace(o.k_min, o.k_max, o.k_count);
    cfg.grid_nx = o.grid_nx;
    cfg.grid_ny = o.grid_ny;
    return cfg;
}

int cmd_compensate(const GlobalOpts& g, const CompensateOpts& o) {
    write_manifest(g, "compensate",
                   {{"input", o.input},
                    {"t", o.t},
                    {"joint", o.joint},
                    {"n_sample", o.n_sample},
                    {"alpha_split", o.alpha_split},
                    {"k_count", o.k_count},
                    {"k_min", o.k_min},
                    {"k_max", o.k_max},
                    {"grid", {o.grid_nx, o.grid_ny}}},
                   {"compensation_curve.csv", "compensation_summary.csv"});

    const SceneSet scenes = load_scenes(o.input);
    const CompensationConfig cfg = compensation_config(o);

    CompensationResult res;
    if (o.t > 0) {
        res.per_timestep.push_back(find_best_compensation(scenes, o.t, cfg, g.threads));
    } else {
        for (int t = 1; t <= scenes.horizon; ++t)
            res.per_timestep.push_back(find_best_compensation(scenes, t, cfg, g.threads));
    }
    if (o.joint) res.joint = find_best_compensation_joint(scenes, cfg, g.threads);

    write_compensation_curves_csv(res, g.out("compensation_curve.csv").string());
    write_compensation_summary_csv(res, g.out("compensation_summary.csv").string());
    for (const auto& c : res.per_timestep)
        std::cout << "t=" << c.timestep << " k_best=" << csv::fmt(c.k_best) << "\n";
    if (res.joint) std::cout << "joint k_best=" << csv::fmt(res.joint->k_best) << "\n";

    if (g.svg) {
        svg::LinePlot plot("average log likelihood vs compensation exponent", "k_bar",
                           "avg log likelihood");
        for (const auto& c : res.per_timestep) {
            svg::Series s;
            s.x = c.k_values;
            s.y = c.avg_loglik;
            s.label = "t=" + std::to_string(c.timestep);
            plot.add_series(std::move(s));
        }
        if (res.joint) {
            svg::Series s;
            s.x = res.joint->k_values;
            s.y = res.joint->avg_loglik;
            s.label = "joint";
            plot.add_series(std::move(s));
        }
        plot.write(g.out("compensation_curve.svg").string());

        // first-scene heatmaps, uncompensated vs best exponent
        const Scene& sc = scenes.scenes[0];
        const int t = o.t > 0 ? o.t : 1;
        std::vector<Point2> pts(static_cast<std::size_t>(std::min<std::size_t>(
            static_cast<std::size_t>(cfg.n_sample), sc.n_samples())));
        for (std::size_t j = 0; j < pts.size(); ++j)
            pts[j] = sc.samples[j][static_cast<std::size_t>(t - 1)];
        const auto n_fit = static_cast<std::size_t>(cfg.alpha_split * pts.size());
        std::vector<Point2> fit(pts.begin(), pts.begin() + static_cast<long>(n_fit));
        std::vector<Point2> val(pts.begin() + static_cast<long>(n_fit), pts.end());
        const double h = select_bandwidth(fit, val, cfg.bandwidth_grid, cfg.bandwidth_floor);
        const KdeModel kde(fit, h);
        const GridSpec2D spec =
            auto_extent(pts, sc.ground_truth[static_cast<std::size_t>(t - 1)],
                        cfg.pad_bandwidths * h, cfg.grid_nx, cfg.grid_ny);
        const double k_best = res.per_timestep[0].k_best;
        svg::write_heatmap(eval_on_grid(kde, spec, 1.0).masses, spec.nx, spec.ny,
                           "scene " + sc.scene_id + " t=" + std::to_string(t) + " raw",
                           g.out("compensate_heatmap_raw.svg").string());
        svg::write_heatmap(eval_on_grid(kde, spec, k_best).masses, spec.nx, spec.ny,
                           "scene " + sc.scene_id + " t=" + std::to_string(t) + " k_bar=" +
                               csv::fmt(k_best),
                           g.out("compensate_heatmap_compensated.svg").string());
    }
    return 0;
}

// ---- eval ----

struct EvalOpts {
    std::string input;
    double kbar = 1.0;
    int n = 0;  // 0 = use all K samples
    int r = 10;
    int n_sample = 0;  // 0 = min(K, 1000)
};

int cmd_eval(const GlobalOpts& g, const EvalOpts& o) {
    write_manifest(g, "eval",
                   {{"input", o.input}, {"kbar", o.kbar}, {"n", o.n}, {"r", o.r},
                    {"n_sample", o.n_sample}},
                   {"eval.csv"});
    const SceneSet scenes = load_scenes(o.input);
    std::size_t k_min = scenes.scenes[0].n_samples();
    for (const auto& s : scenes.scenes) k_min = std::min(k_min, s.n_samples());
    const int n = o.n > 0 ? o.n : static_cast<int>(k_min);

    CompensationConfig cfg;
    cfg.n_sample = o.n_sample > 0 ? o.n_sample
                                  : static_cast<int>(std::min<std::size_t>(k_min, 1000));

    const MonEstimate mon = mon_metric(scenes, n, o.r, g.seed, g.threads);
    csv::Writer w(g.out("eval.csv").string());
    w.header({"metric", "value", "std_error"});
    w.line({"mon_metric", csv::fmt(mon.value), csv::fmt(mon.std_error)});
    std::cout << "mon_metric=" << csv::fmt(mon.value) << " (std_error " << csv::fmt(mon.std_error)
              << ", N=" << n << ", R=" << o.r << ")\n";
    for (int t = 1; t <= scenes.horizon; ++t) {
        const double ll = marginalized_loglik(scenes, t, o.kbar, cfg, g.threads);
        w.line({"loglik_t" + std::to_string(t), csv::fmt(ll), ""});
        std::cout << "loglik_t" << t << "=" << csv::fmt(ll) << " (k_bar=" << csv::fmt(o.kbar)
                  << ")\n";
    }
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"MoN (variety) loss analysis toolkit"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--seed", g.seed, "RNG seed");
    app.add_option("--threads", g.threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--out-dir", g.out_dir, "output directory");
    app.add_flag("--svg", g.svg, "also emit SVG plots");

    MonScanOpts ms;
    auto* mon_scan = app.add_subcommand("mon-scan", "dataset MoN loss over a grid of exponents");
    mon_scan->add_option("--n", ms.n, "candidates per draw (N)")->check(CLI::PositiveNumber);
    mon_scan->add_option("--m", ms.m, "ground-truth sample count")->check(CLI::PositiveNumber);
    mon_scan->add_option("--r", ms.r, "repetitions per point (R)")->check(CLI::PositiveNumber);
    mon_scan->add_option("--dims", ms.dims, "dimensionality")->check(CLI::Range(1, 10));
    mon_scan->add_option("--k-min", ms.k_min, "grid start");
    mon_scan->add_option("--k-max", ms.k_max, "grid end");
    mon_scan->add_option("--k-step", ms.k_step, "grid step")->check(CLI::PositiveNumber);
    mon_scan->add_option("--k-grid", ms.k_grid, "explicit exponent list")->delimiter(',');

    KvsNOpts kn;
    auto* k_vs_n = app.add_subcommand("k-vs-n", "minimizing exponent as a function of N");
    k_vs_n->add_option("--dims", kn.dims, "dimensionality")->check(CLI::Range(1, 10));
    k_vs_n->add_option("--n-list", kn.n_list, "N values (ascending)")->delimiter(',');
    k_vs_n->add_option("--m", kn.m, "ground-truth sample count")->check(CLI::PositiveNumber);
    k_vs_n->add_option("--r", kn.r, "repetitions per point (R)")->check(CLI::PositiveNumber);
    k_vs_n->add_option("--k-min", kn.k_min, "grid start");
    k_vs_n->add_option("--k-max", kn.k_max, "grid end");
    k_vs_n->add_option("--k-step", kn.k_step, "grid step")->check(CLI::PositiveNumber);
    k_vs_n->add_option("--k-grid", kn.k_grid, "explicit exponent list")->delimiter(',');

    SquareSampleOpts sq;
    auto* square = app.add_subcommand("square-sample", "sample from the square of a density");
    square->add_option("--mode", sq.mode, "binned, rejection or both");
    square->add_option("--input-dist", sq.input_dist, "normal or uniform");
    square->add_option("--epsilon", sq.epsilon, "bin width / proximity threshold")
        ->check(CLI::PositiveNumber);
    square->add_option("--n-out", sq.n_out, "output sample count")->check(CLI::PositiveNumber);
    square->add_option("--max-attempts", sq.max_attempts, "draw budget per output")
        ->check(CLI::PositiveNumber);

    LearnToyOpts lt;
    auto* learn = app.add_subcommand("learn-toy", "train the particle learner on the toy problem");
    learn->add_option("--seeds", lt.seeds, "independent training seeds")
        ->check(CLI::PositiveNumber);
    learn->add_option("--epochs", lt.epochs, "training epochs")->check(CLI::NonNegativeNumber);
    learn->add_option("--n-start", lt.n_start, "initial N")->check(CLI::PositiveNumber);
    learn->add_option("--n-final", lt.n_final, "final N")->check(CLI::PositiveNumber);
    learn->add_option("--n-double-every", lt.n_double_every, "epochs between doublings (0=auto)");
    learn->add_option("--m-particles", lt.m_particles, "particles per condition")
        ->check(CLI::PositiveNumber);
    learn->add_option("--lr", lt.lr, "learning rate")->check(CLI::PositiveNumber);
    learn->add_option("--pairs", lt.pairs, "dataset size")->check(CLI::PositiveNumber);
    learn->add_option("--n-eval", lt.n_eval, "evaluation sample count")
        ->check(CLI::PositiveNumber);
    learn->add_option("--bins", lt.bins, "evaluation histogram bins")->check(CLI::PositiveNumber);
    learn->add_option("--range-lo", lt.range_lo, "evaluation range start");
    learn->add_option("--range-hi", lt.range_hi, "evaluation range end");

    SynthOpts sy;
    auto* synth = app.add_subcommand("synth", "generate synthetic trajectory scenes");
    synth->add_option("--kind", sy.kind, "faithful, sqrt_dilated or power");
    synth->add_option("--power-k", sy.power_k, "exponent for kind=power")
        ->check(CLI::PositiveNumber);
    synth->add_option("--scenes", sy.scenes, "scene count")->check(CLI::PositiveNumber);
    synth->add_option("--k", sy.k, "sampled futures per scene")->check(CLI::PositiveNumber);
    synth->add_option("--t", sy.t, "horizon (timesteps)")->check(CLI::PositiveNumber);
    synth->add_option("--scale", sy.scale, "geometry scale factor")->check(CLI::PositiveNumber);
    synth->add_option("--noise-y-ratio", sy.noise_y_ratio,
                      "y displacement noise relative to x")
        ->check(CLI::Range(1e-6, 1.0));
    synth->add_option("--mode-split", sy.mode_split,
                      "initial mode offset in noise-stddev units")
        ->check(CLI::NonNegativeNumber);
    synth->add_flag("--iid-samples", sy.iid_samples,
                    "plain iid sample emission instead of quantile-balanced");
    synth->add_option("--out", sy.out, "output JSONL file");

    CompensateOpts co;
    auto* comp = app.add_subcommand("compensate", "search the best compensation exponent");
    comp->add_option("--input", co.input, "scene JSONL file")->required();
    comp->add_option("--t", co.t, "single timestep (default: all)")
        ->check(CLI::NonNegativeNumber);
    comp->add_flag("--joint", co.joint, "also fit one exponent across all timesteps");
    comp->add_option("--n-sample", co.n_sample, "samples per scene")->check(CLI::PositiveNumber);
    comp->add_option("--alpha-split", co.alpha_split, "KDE fit fraction");
    comp->add_option("--k-count", co.k_count, "search grid size")->check(CLI::PositiveNumber);
    comp->add_option("--k-min", co.k_min, "search grid start");
    comp->add_option("--k-max", co.k_max, "search grid end");
    comp->add_option("--grid-nx", co.grid_nx, "grid resolution x")->check(CLI::PositiveNumber);
    comp->add_option("--grid-ny", co.grid_ny, "grid resolution y")->check(CLI::PositiveNumber);

    EvalOpts ev;
    auto* eval = app.add_subcommand("eval", "MoN metric and marginalized log likelihood");
    eval->add_option("--input", ev.input, "scene JSONL file")->required();
    eval->add_option("--kbar", ev.kbar, "compensation exponent for the log likelihood");
    eval->add_option("--n", ev.n, "futures per MoN draw (0 = all)")
        ->check(CLI::NonNegativeNumber);
    eval->add_option("--r", ev.r, "MoN repetitions per scene")->check(CLI::PositiveNumber);
    eval->add_option("--n-sample", ev.n_sample, "KDE samples per scene (0 = auto)")
        ->check(CLI::NonNegativeNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (mon_scan->parsed()) return cmd_mon_scan(g, ms);
        if (k_vs_n->parsed()) return cmd_k_vs_n(g, kn);
        if (square->parsed()) return cmd_square_sample(g, sq);
        if (learn->parsed()) return cmd_learn_toy(g, lt);
        if (synth->parsed()) return cmd_synth(g, sy);
        if (comp->parsed()) return cmd_compensate(g, co);
        if (eval->parsed()) return cmd_eval(g, ev);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace monlab
