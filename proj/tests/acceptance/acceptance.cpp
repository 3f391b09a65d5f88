// Acceptance runner: one PASS/FAIL line per criterion on stdout, details on
// stderr. With no arguments every criterion runs; otherwise only the named
// ones (e.g. `stscnn_acceptance AC-1 AC-3`).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "stscnn/baselines.hpp"
#include "stscnn/experiment.hpp"
#include "stscnn/metrics.hpp"
#include "stscnn/network.hpp"
#include "stscnn/trainer.hpp"
#include "support/naive_metrics.hpp"
#include "support/reference.hpp"

namespace fs = std::filesystem;
using namespace stscnn;
using stscnn::testing::random_tensor;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int precision = 4) {
    std::ostringstream s;
    s.precision(precision);
    s << v;
    return s.str();
}

void detail(const std::string& line) { std::cerr << "  " << line << std::endl; }

struct Outcome {
    bool pass = false;
    std::string summary;
};

Outcome ac1_conv_oracle() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> channels(1, 4), size(4, 14), kernel(0, 2), dil(1, 3), batch(1, 2);
    double worst = 0.0;
    std::set<std::pair<int, int>> covered;
    for (int k = 0; k < 50; ++k) {
        const int S = 3 + 2 * (k % 3);
        const int d = 1 + (k / 3) % 3;
        covered.insert({S, d});
        const auto layer = stscnn::testing::random_layer(channels(rng), channels(rng), S, d,
                                                         k % 2 ? Activation::relu : Activation::linear, rng);
        const Tensor4 in = random_tensor(Shape{batch(rng), layer.in_channels, size(rng), size(rng)}, rng);
        const Tensor4 fast = conv2d_forward(in, layer);
        const Tensor4 slow = stscnn::testing::direct_conv(in, layer, d * (S - 1) / 2);
        if (fast.shape() != slow.shape()) return {false, "shape mismatch for S=" + std::to_string(S)};
        worst = std::max(worst, stscnn::testing::max_abs_diff(fast, slow));
    }
    const double secs = seconds_since(t0);
    const bool ok = worst <= 1e-12 && covered.size() == 9 && secs < 60.0;
    return {ok, "50 configs, 9 (S,d) pairs, max |diff| " + fmt(worst) + ", " + fmt(secs, 3) + " s"};
}

Outcome ac2_gradient_check() {
    const auto t0 = Clock::now();
    NetworkConfig tiny;
    tiny.input_bands = 1;
    tiny.fusion_channels = 3;
    tiny.multiscale_channels = 2;
    tiny.trunk_channels = 6;
    const GradCheckResult r = gradient_check(tiny, 8, 8, 1);
    const double secs = seconds_since(t0);
    const bool ok = r.max_relative_error < 1e-5 && r.checked == build_network(tiny, 0).parameter_count() &&
                    secs < 300.0;
    return {ok, std::to_string(r.checked) + " parameters, max relative error " + fmt(r.max_relative_error) +
                    " (" + r.worst_layer + "), " + fmt(secs, 3) + " s"};
}

Outcome ac3_metric_oracles() {
    namespace naive = stscnn::testing;
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<int> side(24, 48), bands(2, 4);
    std::bernoulli_distribution keep(0.7);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
        const int h = side(rng), w = side(rng);
        const Tensor4 x = random_tensor(Shape{1, bands(rng), h, w}, rng, 0.0, 1.0);
        Tensor4 y = x;
        std::normal_distribution<double> noise(0.0, 0.05);
        for (auto& v : y.data()) v = std::clamp(v + noise(rng), 0.0, 1.0);
        std::vector<std::uint8_t> mv(static_cast<std::size_t>(h) * w);
        for (auto& v : mv) v = keep(rng) ? 1 : 0;
        const Mask m(h, w, mv);
        for (const Mask* scope : {static_cast<const Mask*>(nullptr), &m}) {
            for (int b = 0; b < x.c(); ++b) {
                worst = std::max(worst, std::abs(psnr(x, y, b, 1.0, scope) - naive::naive_psnr(x, y, b, 1.0, scope)));
                worst = std::max(worst, std::abs(ssim(x, y, b, 1.0, scope) - naive::naive_ssim(x, y, b, 1.0, scope)));
                worst = std::max(worst, std::abs(cc(x, y, b, scope) - naive::naive_cc(x, y, b, scope)));
            }
            worst = std::max(worst, std::abs(sam(x, y, scope).degrees - naive::naive_sam(x, y, scope)));
        }
    }
    const Tensor4 x = random_tensor(Shape{1, 3, 16, 16}, rng, 0.05, 1.0);
    bool closed = std::isinf(psnr(x, x, 0, 1.0)) && psnr(x, x, 0, 1.0) > 0 && ssim(x, x, 0, 1.0) == 1.0 &&
                  cc(x, x, 0) == 1.0 && sam(x, x).degrees == 0.0;
    Tensor4 e1(Shape{1, 2, 4, 4}), e2(Shape{1, 2, 4, 4});
    for (auto& v : e1.plane(0, 0)) v = 1.0;
    for (auto& v : e2.plane(0, 1)) v = 1.0;
    closed = closed && sam(e1, e2).degrees == 90.0;
    detail("closed forms: psnr " + fmt(psnr(x, x, 0, 1.0)) + ", ssim " + fmt(ssim(x, x, 0, 1.0), 17) + ", cc " +
           fmt(cc(x, x, 0), 17) + ", sam " + fmt(sam(x, x).degrees) + ", orthogonal sam " + fmt(sam(e1, e2).degrees, 17));
    return {worst <= 1e-9 && closed,
            "20 pairs x {full, gap}: max |diff| " + fmt(worst) + "; closed forms " + (closed ? "exact" : "WRONG")};
}

// Everything the training-based criteria share.
struct SeedRun {
    std::uint64_t seed = 0;
    NetworkParams<double> params;
    std::vector<EpochRecord> trace;
    double cnn = 0.0;
    double copy = 0.0;
    double lf = 0.0;
};

struct TrainedRuns {
    ExperimentConfig cfg;
    std::vector<SeedRun> runs;
    double seconds = 0.0;
};

TrainedRuns& trained_runs() {
    static TrainedRuns cache = [] {
        TrainedRuns t;
        t.cfg = desk_experiment_config();
        const auto t0 = Clock::now();
        for (std::uint64_t seed : t.cfg.seeds) {
            const auto s0 = Clock::now();
            const ExperimentData data = build_experiment_data(t.cfg, seed);
            TrainConfig tc = t.cfg.train;
            tc.seed = seed;
            TrainResult res = train(data.patches, tc, t.cfg.network);
            SeedRun r;
            r.seed = seed;
            r.cnn = evaluate_model(res.params, data.test, t.cfg).mpsnr;
            r.copy = evaluate_baseline("copy_fill", data.test, t.cfg).mpsnr;
            r.lf = evaluate_baseline("lf", data.test, t.cfg).mpsnr;
            r.params = std::move(res.params);
            r.trace = std::move(res.trace);
            detail("seed " + std::to_string(seed) + ": sts_cnn " + fmt(r.cnn) + " dB, copy_fill " + fmt(r.copy) +
                   " dB, lf " + fmt(r.lf) + " dB, final loss " + fmt(r.trace.back().mean_loss) + " (" +
                   fmt(seconds_since(s0), 3) + " s)");
            t.runs.push_back(std::move(r));
        }
        t.seconds = seconds_since(t0);
        return t;
    }();
    return cache;
}

Outcome ac4_learning() {
    const TrainedRuns& t = trained_runs();
    int passed = 0;
    std::string per_seed;
    for (const auto& r : t.runs) {
        const bool ok = r.cnn >= r.copy + 3.0 && r.cnn >= r.lf - 1.0;
        passed += ok;
        per_seed += (per_seed.empty() ? "" : "; ") + std::string("seed ") + std::to_string(r.seed) + " " +
                    fmt(r.cnn) + " vs copy+3 " + fmt(r.copy + 3.0) + ", lf-1 " + fmt(r.lf - 1.0);
        if (r.trace.size() > 20) {
            detail("seed " + std::to_string(r.seed) + ": epoch-20 loss " + fmt(r.trace[20].mean_loss) +
                   " vs epoch-1 loss " + fmt(r.trace[1].mean_loss));
        }
    }
    const bool ok = passed == static_cast<int>(t.runs.size()) && t.runs.size() == 3 && t.seconds < 1800.0;
    return {ok, std::to_string(passed) + "/" + std::to_string(t.runs.size()) + " seeds (" + per_seed + "), " +
                    fmt(t.seconds, 4) + " s"};
}

Outcome ac5_ablation() {
    const TrainedRuns& t = trained_runs();
    std::map<std::string, double> mean;
    for (const auto& r : t.runs) mean["full"] += r.cnn / static_cast<double>(t.runs.size());
    for (const auto& variant : ablation_variants(t.cfg.network)) {
        if (variant.name == "full") {
            if (!(variant.config == t.cfg.network)) return {false, "full variant differs from the trained model"};
            continue;
        }
        for (const auto& r : t.runs) {
            const ExperimentData data = build_experiment_data(t.cfg, r.seed);
            TrainConfig tc = t.cfg.train;
            tc.seed = r.seed;
            const TrainResult res = train(data.patches, tc, variant.config);
            const double v = evaluate_model(res.params, data.test, t.cfg).mpsnr;
            detail(variant.name + " seed " + std::to_string(r.seed) + ": " + fmt(v) + " dB (full " + fmt(r.cnn) + ")");
            mean[variant.name] += v / static_cast<double>(t.runs.size());
        }
    }
    bool ok = mean.size() == 4;
    std::string text = "3-seed mean mPSNR: full " + fmt(mean["full"]);
    for (const auto& [name, value] : mean) {
        if (name == "full") continue;
        ok = ok && mean["full"] >= value;
        text += ", " + name + " " + fmt(value);
    }
    return {ok, text};
}

double ls_slope(const std::vector<int>& xs, const std::vector<double>& ys) {
    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    return sxy / sxx;
}

Outcome ac6_registration() {
    const TrainedRuns& t = trained_runs();
    const auto& shifts = t.cfg.shifts;
    std::map<std::string, std::vector<double>> mean;
    for (const auto& r : t.runs) {
        for (const auto& row : run_regsweep(t.cfg, r.params, r.seed)) {
            auto& series = mean[row.method];
            series.resize(shifts.size(), 0.0);
            const auto at = std::find(shifts.begin(), shifts.end(), row.shift) - shifts.begin();
            series[static_cast<std::size_t>(at)] += row.psnr / static_cast<double>(t.runs.size());
        }
    }
    for (const auto& [method, series] : mean) {
        std::string line = method + ":";
        for (double v : series) line += " " + fmt(v);
        detail(line);
    }
    const auto& cnn = mean["sts_cnn"];
    const auto& copy = mean["copy_fill"];
    bool monotone = cnn.size() == shifts.size() && shifts.front() == 0 && shifts.back() == 5;
    for (std::size_t i = 1; i < cnn.size(); ++i) monotone = monotone && cnn[i] <= cnn[i - 1] + 0.2;
    const double s_cnn = ls_slope(shifts, cnn);
    const double s_copy = ls_slope(shifts, copy);
    return {monotone && s_cnn > s_copy, std::string("sts_cnn ") + (monotone ? "non-increasing" : "NOT non-increasing") +
                                            " within 0.2 dB; slope " + fmt(s_cnn) + " dB/px vs copy_fill " +
                                            fmt(s_copy) + " dB/px"};
}

std::vector<std::uint8_t> file_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Relative path -> contents of every regular file under `root`.
std::map<std::string, std::vector<std::uint8_t>> tree_bytes(const fs::path& root) {
    std::map<std::string, std::vector<std::uint8_t>> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = file_bytes(e.path());
    }
    return out;
}

Outcome ac7_schedule_determinism() {
    TrainConfig cfg;
    bool schedule = cfg.epochs == 100;
    for (int e = 0; e < cfg.epochs; ++e) schedule = schedule && lr_at(e, cfg) == 0.01 * std::pow(0.1, e / 20);

    NetworkConfig tiny;
    tiny.input_bands = 1;
    tiny.fusion_channels = 3;
    tiny.multiscale_channels = 2;
    tiny.trunk_channels = 6;
    std::mt19937_64 rng(5);
    const Tensor4 x = random_tensor(Shape{1, 1, 8, 8}, rng, 0.0, 1.0);
    const TrainResult res = train({make_sample(x, random_tensor(x.shape(), rng, 0.0, 1.0), gen_stripe_mask(8, 8, 4, 1))},
                                  cfg, tiny);
    bool traced = res.trace.size() == 100;
    for (const auto& r : res.trace) traced = traced && r.lr == 0.01 * std::pow(0.1, r.epoch / 20);

    const fs::path root = fs::temp_directory_path() / "stscnn_acceptance_ac7";
    fs::remove_all(root);
    fs::create_directories(root);
    std::ofstream((root / "cfg.json").string()) << R"({
        "dataset": {"height": 64, "width": 64},
        "train": {"epochs": 4, "patch_size": 16, "patch_stride": 16, "batch_size": 4, "checkpoint_every": 2}
    })";
    int codes = 0;
    for (const char* run : {"a", "b"}) {
        codes += cli_dispatch({"stscnn", "--deterministic", "train", "--config", (root / "cfg.json").string(), "--seed",
                               "17", "--out", (root / run).string()});
    }
    const auto a = tree_bytes(root / "a");
    const auto b = tree_bytes(root / "b");
    const bool identical = codes == 0 && !a.empty() && a == b && a.count("loss_trace.csv") == 1 &&
                           a.count("checkpoints/epoch_0002/manifest.json") == 1 &&
                           a.count("checkpoints/final/manifest.json") == 1;
    fs::remove_all(root);
    return {schedule && traced && identical,
            std::string("lr_at ") + (schedule ? "exact" : "WRONG") + ", trained lr trace " + (traced ? "exact" : "WRONG") +
                " over 100 epochs; two --deterministic runs: " + std::to_string(a.size()) + " files " +
                (identical ? "bitwise identical" : "DIFFER")};
}

Outcome ac8_structure() {
    bool fields = receptive_field(1, FieldMode::dilated_pyramid) == 3 && receptive_field(2, FieldMode::dilated_pyramid) == 7 &&
                  receptive_field(3, FieldMode::dilated_pyramid) == 15;
    for (int i = 1; i <= 20; ++i) {
        std::vector<int> ks(static_cast<std::size_t>(i), 3), plain(static_cast<std::size_t>(i), 1), doubling;
        for (int k = 0; k < i; ++k) doubling.push_back(1 << k);
        const long long common = receptive_field(i, FieldMode::common);
        const long long pyramid = receptive_field(i, FieldMode::dilated_pyramid);
        fields = fields && common == 2LL * i + 1 && pyramid == (1LL << (i + 1)) - 1;
        fields = fields && stack_receptive_field(ks, plain) == common && stack_receptive_field(ks, doubling) == pyramid;
        fields = fields && (i == 1 ? pyramid == common : pyramid > common);
    }

    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> side(4, 20), bands(1, 3);
    std::bernoulli_distribution keep(0.6);
    int preserved = 0;
    for (int k = 0; k < 100; ++k) {
        const int h = side(rng), w = side(rng), b = bands(rng);
        const Tensor4 x = random_tensor(Shape{1, b, h, w}, rng, 0.0, 1.0);
        const Tensor4 y2 = random_tensor(x.shape(), rng, 0.0, 1.0);
        std::vector<std::uint8_t> mv(static_cast<std::size_t>(h) * w);
        for (auto& v : mv) v = keep(rng) ? 1 : 0;
        mv[0] = 1;
        mv[1] = 1;
        mv[2] = 0;
        const Mask m(h, w, mv);
        const Tensor4 y1 = apply_mask(x, m, 0.0);
        NetworkConfig net;
        net.input_bands = b;
        net.fusion_channels = 3;
        net.multiscale_channels = 2;
        net.trunk_channels = 6;
        const auto params = build_network(net, static_cast<std::uint64_t>(k));
        const std::vector<Tensor4> outputs{reconstruct(params, y1, y2, m), lf_reconstruct(y1, y2, m),
                                           copy_fill(y1, y2, m)};
        bool all = true;
        for (const auto& out : outputs) {
            for (int c = 0; c < b; ++c) {
                for (int r = 0; r < h; ++r) {
                    for (int q = 0; q < w; ++q) {
                        if (m.valid(r, q) && out(0, c, r, q) != y1(0, c, r, q)) all = false;
                    }
                }
            }
        }
        preserved += all;
    }
    return {fields && preserved == 100, std::string("receptive fields ") + (fields ? "match both formulas" : "MISMATCH") +
                                            "; compositing preserved valid pixels in " + std::to_string(preserved) +
                                            "/100 cases (sts_cnn, lf, copy_fill)"};
}

} // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"AC-1", ac1_conv_oracle},        {"AC-2", ac2_gradient_check}, {"AC-3", ac3_metric_oracles},
        {"AC-4", ac4_learning},           {"AC-5", ac5_ablation},       {"AC-6", ac6_registration},
        {"AC-7", ac7_schedule_determinism}, {"AC-8", ac8_structure}};
    std::set<std::string> wanted(argv + 1, argv + argc);
    for (const auto& w : wanted) {
        if (std::none_of(criteria.begin(), criteria.end(), [&](const auto& c) { return c.first == w; })) {
            std::cerr << "unknown criterion '" << w << "'\n";
            return 2;
        }
    }
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        if (!wanted.empty() && !wanted.count(name)) continue;
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::cout << name << (o.pass ? " PASS " : " FAIL ") << o.summary << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
