#include "cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "stscnn/baselines.hpp"
#include "stscnn/checkpoint.hpp"
#include "stscnn/experiment.hpp"
#include "stscnn/io.hpp"
#include "stscnn/report.hpp"

namespace stscnn {

namespace fs = std::filesystem;

namespace {

void note(const std::string& msg) { std::cerr << "stscnn: " << msg << '\n'; }

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory '" + dir + "': " + ec.message());
}

std::vector<int> parse_bands(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stoi(item));
        } catch (const std::exception&) {
            throw ArgumentError("bad band list '" + text + "'");
        }
    }
    return out;
}

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    bool deterministic = false;
};

ExperimentConfig config_or_default(const Common& c) {
    return c.config.empty() ? desk_experiment_config() : load_experiment_config(c.config);
}

std::uint64_t pick_seed(const Common& c, const ExperimentConfig& cfg) {
    return c.seed ? *c.seed : cfg.seeds.front();
}

} // namespace

int cli_dispatch(const std::vector<std::string>& args) {
    CLI::App app{"Two-input residual CNN for reconstructing missing pixels in multi-band rasters"};
    app.require_subcommand(1);
    Common common;
    app.add_flag("--deterministic", common.deterministic,
                 "Bitwise-reproducible execution (always on: every kernel is single-threaded)");

    auto add_common = [&](CLI::App* sub, bool with_config) {
        if (with_config) sub->add_option("--config", common.config, "Experiment config (JSON)");
        sub->add_option("--seed", common.seed, "Random seed");
    };

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic scene and its auxiliary image");
    int bands = 2, height = 256, width = 256;
    std::string relation = "nonlinear", synth_out;
    synth->add_option("--bands", bands)->capture_default_str();
    synth->add_option("--height", height)->capture_default_str();
    synth->add_option("--width", width)->capture_default_str();
    synth->add_option("--relation", relation, "affine or nonlinear")->capture_default_str();
    synth->add_option("--out", synth_out, "Output directory (x.stsr, y2.stsr)")->required();
    add_common(synth, false);

    // mask
    auto* mask_cmd = app.add_subcommand("mask", "Simulate a missing-data mask");
    MaskSpec mspec;
    std::string kind = "modis_stripes", mask_out;
    int mh = 256, mw = 256;
    mask_cmd->add_option("--kind", kind, "modis_stripes, slc_off, cloud or cloud_plus_slc")->capture_default_str();
    mask_cmd->add_option("--height", mh)->capture_default_str();
    mask_cmd->add_option("--width", mw)->capture_default_str();
    mask_cmd->add_option("--period", mspec.period)->capture_default_str();
    mask_cmd->add_option("--stripe-width", mspec.stripe_width)->capture_default_str();
    mask_cmd->add_option("--phase", mspec.phase)->capture_default_str();
    mask_cmd->add_option("--max-gap", mspec.slc.max_gap)->capture_default_str();
    mask_cmd->add_option("--center-band", mspec.slc.center_band)->capture_default_str();
    mask_cmd->add_option("--slc-period", mspec.slc.period)->capture_default_str();
    mask_cmd->add_option("--angle", mspec.slc.angle_deg)->capture_default_str();
    mask_cmd->add_option("--coverage", mspec.coverage)->capture_default_str();
    mask_cmd->add_option("--smoothness", mspec.smoothness)->capture_default_str();
    mask_cmd->add_option("--out", mask_out, "Output mask tensor file")->required();
    add_common(mask_cmd, false);

    // apply
    auto* apply = app.add_subcommand("apply", "Blank the missing pixels of an image");
    std::string image, mask_path, out_path;
    double fill = 0.0;
    apply->add_option("--image", image)->required();
    apply->add_option("--mask", mask_path)->required();
    apply->add_option("--fill", fill)->capture_default_str();
    apply->add_option("--out", out_path)->required();

    // train
    auto* train_cmd = app.add_subcommand("train", "Train a network on synthetic or supplied data");
    std::string train_out, tx, ty2, tmask;
    train_cmd->add_option("--out", train_out, "Output directory")->required();
    train_cmd->add_option("--x", tx, "Clean scene tensor (with --y2 and --mask)");
    train_cmd->add_option("--y2", ty2, "Auxiliary image tensor");
    train_cmd->add_option("--mask", tmask, "Mask tensor");
    add_common(train_cmd, true);

    // reconstruct
    auto* rec = app.add_subcommand("reconstruct", "Fill the gaps of y1 with a trained network");
    std::string ckpt, y1p, y2p;
    double lo = 0.0, hi = 1.0;
    rec->add_option("--checkpoint", ckpt)->required();
    rec->add_option("--y1", y1p)->required();
    rec->add_option("--y2", y2p)->required();
    rec->add_option("--mask", mask_path)->required();
    rec->add_option("--lo", lo, "Lower clamp")->capture_default_str();
    rec->add_option("--hi", hi, "Upper clamp")->capture_default_str();
    rec->add_option("--out", out_path)->required();

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "Score a reconstruction (full and gap_only rows)");
    std::string truth, estimate, method = "estimate";
    double peak = 1.0;
    int shift = 0;
    eval->add_option("--truth", truth)->required();
    eval->add_option("--estimate", estimate)->required();
    eval->add_option("--mask", mask_path)->required();
    eval->add_option("--peak", peak, "Data range L")->capture_default_str();
    eval->add_option("--method", method, "Label written to the report")->capture_default_str();
    eval->add_option("--shift", shift, "Shift label written to the report")->capture_default_str();
    eval->add_option("--out", out_path, "CSV report (a .json twin is written next to it)")->required();
    add_common(eval, false);

    // baseline
    auto* base = app.add_subcommand("baseline", "Reconstruct with linear fitting or copy-fill");
    std::string bmethod = "lf";
    int degree = 1;
    base->add_option("--method", bmethod, "lf or copy_fill")->capture_default_str();
    base->add_option("--y1", y1p)->required();
    base->add_option("--y2", y2p)->required();
    base->add_option("--mask", mask_path)->required();
    base->add_option("--degree", degree, "Polynomial degree for lf")->capture_default_str();
    base->add_option("--out", out_path)->required();

    // gradcheck
    auto* grad = app.add_subcommand("gradcheck", "Finite-difference check of backpropagation on a tiny network");
    int gh = 8, gw = 8;
    double tolerance = 1e-5;
    std::string grad_out;
    grad->add_option("--height", gh)->capture_default_str();
    grad->add_option("--width", gw)->capture_default_str();
    grad->add_option("--tolerance", tolerance)->capture_default_str();
    grad->add_option("--out", grad_out, "Optional text file for the result line");
    add_common(grad, false);

    // ablate
    auto* abl = app.add_subcommand("ablate", "Train the full model and three ablations");
    std::string abl_out;
    abl->add_option("--out", abl_out, "Output directory (ablation.csv)")->required();
    add_common(abl, true);

    // regsweep
    auto* reg = app.add_subcommand("regsweep", "Evaluate under 0-5 pixel registration error");
    std::string reg_out;
    reg->add_option("--checkpoint", ckpt)->required();
    reg->add_option("--out", reg_out, "Output directory (regsweep.csv)")->required();
    add_common(reg, true);

    // export
    auto* exp = app.add_subcommand("export", "Render bands as binary PGM/PPM");
    std::string band_list = "0";
    exp->add_option("--image", image)->required();
    exp->add_option("--bands", band_list, "One band or three comma-separated bands")->capture_default_str();
    exp->add_option("--lo", lo)->capture_default_str();
    exp->add_option("--hi", hi)->capture_default_str();
    exp->add_option("--out", out_path)->required();

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        std::cerr << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        std::cerr << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        std::cerr << "stscnn: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    try {
        if (synth->parsed()) {
            const auto scene = synth_scene(bands, height, width, common.seed.value_or(1), relation_from_string(relation));
            ensure_dir(synth_out);
            write_tensor((fs::path(synth_out) / "x.stsr").string(), scene.x);
            write_tensor((fs::path(synth_out) / "y2.stsr").string(), scene.y2);
            note("wrote scene " + scene.x.shape().str() + " to " + synth_out);
        } else if (mask_cmd->parsed()) {
            mspec.kind = mask_kind_from_string(kind);
            const Mask m = make_mask(mspec, mh, mw, common.seed.value_or(1));
            write_mask(mask_out, m);
            note("mask " + kind + " coverage " + format_double(m.zero_coverage()));
        } else if (apply->parsed()) {
            const Tensor4 x = read_tensor(image);
            write_tensor(out_path, apply_mask(x, read_mask(mask_path), fill));
        } else if (train_cmd->parsed()) {
            ExperimentConfig cfg = config_or_default(common);
            const std::uint64_t seed = pick_seed(common, cfg);
            std::vector<TrainingSample> patches;
            if (!tx.empty() || !ty2.empty() || !tmask.empty()) {
                if (tx.empty() || ty2.empty() || tmask.empty()) {
                    throw ArgumentError("train: --x, --y2 and --mask go together");
                }
                const TrainingSample scene = make_sample(read_tensor(tx), read_tensor(ty2), read_mask(tmask));
                std::size_t dropped = 0;
                patches = extract_patches(scene, cfg.train.patch_size, cfg.train.patch_stride, &dropped);
                if (dropped) note("dropped " + std::to_string(dropped) + " all-missing patches");
                cfg.network.input_bands = scene.x.c();
            } else {
                patches = build_experiment_data(cfg, seed).patches;
            }
            ensure_dir(train_out);
            TrainConfig tc = cfg.train;
            tc.seed = seed;
            tc.checkpoint_dir = (fs::path(train_out) / "checkpoints").string();
            note("training on " + std::to_string(patches.size()) + " patches, seed " + std::to_string(seed));
            const TrainResult res = train(patches, tc, cfg.network, [](const EpochRecord& r) {
                note("epoch " + std::to_string(r.epoch) + " lr " + format_double(r.lr) + " loss " +
                     format_double(r.mean_loss));
                return true;
            });
            write_loss_trace((fs::path(train_out) / "loss_trace.csv").string(), res.trace);
            std::ofstream((fs::path(train_out) / "config.json").string()) << experiment_config_to_json(cfg) << '\n';
            note("final checkpoint in " + (fs::path(tc.checkpoint_dir) / "final").string());
        } else if (rec->parsed()) {
            const auto params = load_checkpoint(ckpt);
            const Tensor4 xhat = reconstruct(params, read_tensor(y1p), read_tensor(y2p), read_mask(mask_path), ValueRange{lo, hi});
            write_tensor(out_path, xhat);
        } else if (eval->parsed()) {
            const Tensor4 x = read_tensor(truth);
            const Tensor4 e = read_tensor(estimate);
            const Mask m = read_mask(mask_path);
            const auto seed = static_cast<long long>(common.seed.value_or(0));
            const MetricsReport full = evaluate_metrics(x, e, peak, MetricScope::full, &m);
            const MetricsReport gap = evaluate_metrics(x, e, peak, MetricScope::gap_only, &m);
            auto rows = metrics_rows(full, method, shift, seed);
            for (const auto& r : metrics_rows(gap, method, shift, seed)) rows.push_back(r);
            write_metrics_csv(out_path, rows);
            write_metrics_json(fs::path(out_path).replace_extension(".json").string(), {full, gap}, {method, method});
            note("mpsnr full " + format_double(full.mpsnr) + " dB, gap_only " + format_double(gap.mpsnr) + " dB");
        } else if (base->parsed()) {
            const Tensor4 y1 = read_tensor(y1p);
            const Tensor4 y2 = read_tensor(y2p);
            const Mask m = read_mask(mask_path);
            if (bmethod == "lf") {
                write_tensor(out_path, lf_reconstruct(y1, y2, m, degree));
            } else if (bmethod == "copy_fill") {
                write_tensor(out_path, copy_fill(y1, y2, m));
            } else {
                throw ArgumentError("unknown baseline '" + bmethod + "' (expected lf or copy_fill)");
            }
        } else if (grad->parsed()) {
            NetworkConfig tiny;
            tiny.input_bands = 1;
            tiny.fusion_channels = 3;
            tiny.multiscale_channels = 2;
            tiny.trunk_channels = 6;
            const auto r = gradient_check(tiny, gh, gw, common.seed.value_or(1));
            const std::string line = "max relative error " + format_double(r.max_relative_error) + " (layer " +
                                     r.worst_layer + ", " + std::to_string(r.checked) + " parameters)";
            note(line);
            if (!grad_out.empty()) {
                std::ofstream f(grad_out);
                if (!f) throw IoError("cannot open '" + grad_out + "' for writing");
                f << line << '\n';
            }
            if (!(r.max_relative_error < tolerance)) {
                note("gradient check failed: tolerance " + format_double(tolerance));
                return kExitNumeric;
            }
        } else if (abl->parsed()) {
            ExperimentConfig cfg = config_or_default(common);
            if (common.seed) cfg.seeds = {*common.seed};
            ensure_dir(abl_out);
            const auto rows = run_ablation(cfg, note);
            write_ablation_csv((fs::path(abl_out) / "ablation.csv").string(), rows);
        } else if (reg->parsed()) {
            const ExperimentConfig cfg = config_or_default(common);
            const auto params = load_checkpoint(ckpt);
            ensure_dir(reg_out);
            const auto rows = run_regsweep(cfg, params, pick_seed(common, cfg));
            write_metrics_csv((fs::path(reg_out) / "regsweep.csv").string(), rows);
        } else if (exp->parsed()) {
            export_image(read_tensor(image), parse_bands(band_list), out_path, lo, hi);
        }
    } catch (const ArgumentError& e) {
        note(std::string("error: ") + e.what());
        return kExitUsage;
    } catch (const NumericError& e) {
        note(std::string("numeric failure: ") + e.what());
        return kExitNumeric;
    } catch (const std::exception& e) {
        note(std::string("error: ") + e.what());
        return kExitData;
    }
    return kExitOk;
}

} // namespace stscnn
