#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "monlab/cli.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv{"monlab"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return monlab::run_cli(static_cast<int>(argv.size()), argv.data());
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
    CHECK(run({"no-such-command"}) == 2);
    CHECK(run({"mon-scan", "--no-such-flag"}) == 2);
    CHECK(run({"mon-scan", "--n", "-3"}) == 2);
    CHECK(run({"compensate"}) == 2);  // --input is required
    CHECK(run({}) == 2);
    CHECK(run({"square-sample", "--mode", "sideways"}) == 2);
}

TEST_CASE("validation failures exit with 1") {
    TempDir d("monlab_cli_fail");
    CHECK(run({"--out-dir", d.str(), "compensate", "--input", d.str() + "/missing.jsonl"}) == 1);
    CHECK(run({"--out-dir", d.str(), "eval", "--input", d.str() + "/missing.jsonl"}) == 1);
    // collision budget exhausted: far-apart uniform cells at tiny epsilon
    CHECK(run({"--out-dir", d.str(), "square-sample", "--mode", "binned", "--epsilon", "1e-12",
               "--n-out", "5", "--max-attempts", "50"}) == 1);
}

TEST_CASE("single-value exponent grid is returned as-is") {
    TempDir d("monlab_cli_kgrid");
    CHECK(run({"--seed", "4", "--out-dir", d.str(), "mon-scan", "--k-grid", "1.0", "--n", "4",
               "--m", "50", "--r", "2"}) == 0);
    const std::string csv = slurp(d.path / "mon_scan.csv");
    CHECK(csv == "k,loss,std_error\n" + csv.substr(csv.find('\n') + 1));
    CHECK(csv.find("\n1,") != std::string::npos);
    CHECK(slurp(d.path / "mon_scan_manifest.json").find("\"subcommand\": \"mon-scan\"") !=
          std::string::npos);
}

TEST_CASE("outputs are byte-identical across reruns and thread counts") {
    TempDir a("monlab_cli_det_a"), b("monlab_cli_det_b"), c("monlab_cli_det_c");
    const std::vector<std::string> tail{"mon-scan", "--n",      "8",  "--m",
                                        "200",      "--r",      "3",  "--k-min",
                                        "0.4",      "--k-max",  "1.2", "--k-step",
                                        "0.2"};
    auto with = [&](const std::string& dir, const std::string& threads) {
        std::vector<std::string> args{"--seed", "11", "--threads", threads, "--out-dir", dir};
        args.insert(args.end(), tail.begin(), tail.end());
        return args;
    };
    CHECK(run(with(a.str(), "1")) == 0);
    CHECK(run(with(b.str(), "2")) == 0);
    CHECK(run(with(c.str(), "1")) == 0);
    CHECK(slurp(a.path / "mon_scan.csv") == slurp(b.path / "mon_scan.csv"));
    CHECK(slurp(a.path / "mon_scan.csv") == slurp(c.path / "mon_scan.csv"));
    // same thread count reproduces the manifest byte for byte as well
    CHECK(slurp(a.path / "mon_scan_manifest.json") == slurp(c.path / "mon_scan_manifest.json"));
}

TEST_CASE("synth then compensate and eval round trip") {
    TempDir d("monlab_cli_synth");
    CHECK(run({"--seed", "5", "--out-dir", d.str(), "synth", "--kind", "sqrt_dilated",
               "--scenes", "6", "--k", "150", "--t", "2", "--out", "sc.jsonl"}) == 0);
    CHECK(fs::exists(d.path / "sc.jsonl"));

    CHECK(run({"--seed", "5", "--out-dir", d.str(), "compensate", "--input",
               (d.path / "sc.jsonl").string(), "--n-sample", "150", "--k-count", "7",
               "--k-min", "0.5", "--k-max", "2.5", "--joint"}) == 0);
    const std::string summary = slurp(d.path / "compensation_summary.csv");
    CHECK(summary.find("t,k_best") != std::string::npos);
    CHECK(summary.find("joint") != std::string::npos);
    CHECK(slurp(d.path / "compensation_curve.csv").find("t,k_bar,avg_loglik") !=
          std::string::npos);

    CHECK(run({"--seed", "5", "--out-dir", d.str(), "eval", "--input",
               (d.path / "sc.jsonl").string(), "--kbar", "2", "--r", "3"}) == 0);
    const std::string eval_csv = slurp(d.path / "eval.csv");
    CHECK(eval_csv.find("mon_metric") != std::string::npos);
    CHECK(eval_csv.find("loglik_t2") != std::string::npos);
}

TEST_CASE("synth is reproducible byte for byte") {
    TempDir a("monlab_cli_seed_a"), b("monlab_cli_seed_b");
    for (const auto& dir : {a.str(), b.str()})
        CHECK(run({"--seed", "7", "--out-dir", dir, "synth", "--scenes", "3", "--k", "40",
                   "--t", "2", "--out", "x.jsonl"}) == 0);
    CHECK(slurp(a.path / "x.jsonl") == slurp(b.path / "x.jsonl"));
}

TEST_CASE("square-sample reports per-mode statistics") {
    TempDir d("monlab_cli_sq");
    CHECK(run({"--seed", "3", "--out-dir", d.str(), "square-sample", "--n-out", "400",
               "--epsilon", "0.1"}) == 0);
    const std::string report = slurp(d.path / "square_sample_report.csv");
    CHECK(report.find("binned") != std::string::npos);
    CHECK(report.find("rejection") != std::string::npos);
    CHECK(fs::exists(d.path / "squared_samples_binned.csv"));
    CHECK(fs::exists(d.path / "squared_samples_rejection.csv"));
}

TEST_CASE("learn-toy runs with zero epochs and warns on n-final 1") {
    TempDir d("monlab_cli_learn");
    CHECK(run({"--seed", "2", "--out-dir", d.str(), "learn-toy", "--seeds", "1", "--epochs",
               "0", "--pairs", "100", "--n-eval", "2000", "--m-particles", "32", "--n-final",
               "16"}) == 0);
    CHECK(fs::exists(d.path / "learn_toy_js.csv"));
    CHECK(fs::exists(d.path / "learn_toy_model.csv"));

    CHECK(run({"--seed", "2", "--out-dir", d.str(), "learn-toy", "--seeds", "1", "--epochs",
               "6", "--pairs", "300", "--n-eval", "2000", "--m-particles", "32", "--n-start",
               "1", "--n-final", "1"}) == 0);
}

TEST_CASE("svg emission") {
    TempDir d("monlab_cli_svg");
    CHECK(run({"--seed", "4", "--svg", "--out-dir", d.str(), "mon-scan", "--n", "4", "--m",
               "80", "--r", "2", "--k-grid", "0.5,1.0,1.5"}) == 0);
    const std::string svg = slurp(d.path / "mon_scan.svg");
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("polyline") != std::string::npos);
}
