#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "stscnn/metrics.hpp"
#include "stscnn/network.hpp"
#include "stscnn/report.hpp"
#include "stscnn/synth.hpp"
#include "stscnn/trainer.hpp"

namespace stscnn {

enum class MaskKind { modis_stripes, slc_off, cloud, cloud_plus_slc };

std::string to_string(MaskKind kind);
MaskKind mask_kind_from_string(const std::string& name);

struct MaskSpec {
    MaskKind kind = MaskKind::modis_stripes;
    int period = 4;              // stripes
    int stripe_width = 1;
    int phase = 0;
    SlcOffParams slc;            // SLC-off wedges
    double coverage = 0.15;      // clouds
    double smoothness = 6.0;
};

/// Builds the mask described by `shape`; clouds draw from `seed`.
Mask make_mask(const MaskSpec& shape, int height, int width, std::uint64_t seed);

struct DatasetSpec {
    int bands = 2;
    int height = 256;
    int width = 256;
    Relation relation = Relation::nonlinear;
    int train_scenes = 1;
    /// Held-out scene for seed s is generated from s + test_seed_offset.
    std::uint64_t test_seed_offset = 1000;
};

/// Everything one experiment needs. Loaded from JSON; unknown keys are rejected.
struct ExperimentConfig {
    std::vector<std::uint64_t> seeds{1, 2, 3};
    std::string output_dir = "stscnn_out";
    DatasetSpec dataset;
    MaskSpec mask;
    NetworkConfig network;
    TrainConfig train;
    MetricScope scope = MetricScope::gap_only;
    double data_range = 1.0;
    std::vector<int> shifts{0, 1, 2, 3, 4, 5};
};

/// Desk-scale setup used by the acceptance runs: four training scenes cut
/// into 40x40 patches at stride 80, a 24-map trunk, batch 1, and 200 epochs
/// with the rate divided by ten every 50. JSON configs override it key by key.
ExperimentConfig desk_experiment_config();

ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);
std::string experiment_config_to_json(const ExperimentConfig& cfg);

struct ExperimentData {
    std::vector<TrainingSample> scenes;  // full training scenes
    std::vector<TrainingSample> patches;
    TrainingSample test;                 // held-out scene
};

/// Synthetic scenes, masks and patches for one seed.
ExperimentData build_experiment_data(const ExperimentConfig& cfg, std::uint64_t seed);

/// Gap-filled held-out scene from a trained network, evaluated in cfg.scope.
MetricsReport evaluate_model(const NetworkParams<double>& params, const TrainingSample& test,
                             const ExperimentConfig& cfg, int shift = 0);

/// Reconstructs with each baseline and evaluates it in cfg.scope.
MetricsReport evaluate_baseline(const std::string& method, const TrainingSample& test,
                                const ExperimentConfig& cfg, int shift = 0);

struct AblationVariant {
    std::string name;
    NetworkConfig config;
};

/// full, no_multiscale, no_dilation, no_boost derived from `base`.
std::vector<AblationVariant> ablation_variants(const NetworkConfig& base);

struct AblationRow {
    std::string variant;
    std::uint64_t seed = 0;
    std::size_t parameter_count = 0;
    long long receptive_field = 0;  // side length through the dilated stack
    double mpsnr = 0.0;
    double mssim = 0.0;
};

using Logger = std::function<void(const std::string&)>;

/// Trains every variant on identical data for every seed.
std::vector<AblationRow> run_ablation(const ExperimentConfig& cfg, const Logger& log = {});

inline constexpr const char* kAblationCsvHeader = "variant,seed,parameter_count,receptive_field,mpsnr,mssim";
void write_ablation_csv(const std::string& path, const std::vector<AblationRow>& rows);

/// Evaluates the trained model and both baselines with the auxiliary image
/// displaced horizontally by each of cfg.shifts pixels. One "all" row per
/// method and shift; methods are sts_cnn, lf and copy_fill.
std::vector<MetricsRow> run_regsweep(const ExperimentConfig& cfg, const NetworkParams<double>& params,
                                     std::uint64_t seed);

struct GradCheckResult {
    double max_relative_error = 0.0;
    std::string worst_layer;
    std::size_t checked = 0;
};

/// Compares backward() with central differences for every parameter of a
/// freshly initialised network on one random h x w sample (64-bit).
GradCheckResult gradient_check(const NetworkConfig& cfg, int height, int width, std::uint64_t seed,
                               double step = 1e-4);

} // namespace stscnn
