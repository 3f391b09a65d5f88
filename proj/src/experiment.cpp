#include "stscnn/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "json_fields.hpp"
#include "stscnn/baselines.hpp"

namespace stscnn {

using detail::json;
using detail::ObjectReader;

std::string to_string(MaskKind kind) {
    switch (kind) {
    case MaskKind::modis_stripes: return "modis_stripes";
    case MaskKind::slc_off: return "slc_off";
    case MaskKind::cloud: return "cloud";
    case MaskKind::cloud_plus_slc: return "cloud_plus_slc";
    }
    return "?";
}

MaskKind mask_kind_from_string(const std::string& name) {
    for (auto k : {MaskKind::modis_stripes, MaskKind::slc_off, MaskKind::cloud, MaskKind::cloud_plus_slc}) {
        if (to_string(k) == name) return k;
    }
    throw ArgumentError("unknown mask kind '" + name +
                        "' (expected modis_stripes, slc_off, cloud or cloud_plus_slc)");
}

Mask make_mask(const MaskSpec& shape, int height, int width, std::uint64_t seed) {
    switch (shape.kind) {
    case MaskKind::modis_stripes: return gen_stripe_mask(height, width, shape.period, shape.stripe_width, shape.phase);
    case MaskKind::slc_off: return gen_slcoff_mask(height, width, shape.slc);
    case MaskKind::cloud: return gen_cloud_mask(height, width, shape.coverage, shape.smoothness, seed);
    case MaskKind::cloud_plus_slc:
        return combine_masks(gen_cloud_mask(height, width, shape.coverage, shape.smoothness, seed),
                             gen_slcoff_mask(height, width, shape.slc));
    }
    throw ArgumentError("make_mask: unknown kind");
}

ExperimentConfig desk_experiment_config() {
    ExperimentConfig cfg;
    cfg.network.fusion_channels = 12;
    cfg.network.multiscale_channels = 8;
    cfg.network.trunk_channels = 24;
    cfg.dataset.train_scenes = 4;
    cfg.train.epochs = 200;
    cfg.train.decline_every = 50;
    cfg.train.batch_size = 1;
    cfg.train.patch_stride = 80;
    return cfg;
}

namespace {

MaskSpec mask_from_json(const json& j, MaskSpec m) {
    ObjectReader r(j, "mask");
    std::string kind = to_string(m.kind);
    r.optional("kind", kind);
    r.optional("period", m.period);
    r.optional("stripe_width", m.stripe_width);
    r.optional("phase", m.phase);
    r.optional("center_band", m.slc.center_band);
    r.optional("max_gap", m.slc.max_gap);
    r.optional("slc_period", m.slc.period);
    r.optional("angle_deg", m.slc.angle_deg);
    r.optional("slc_phase", m.slc.phase);
    r.optional("coverage", m.coverage);
    r.optional("smoothness", m.smoothness);
    r.finish();
    try {
        m.kind = mask_kind_from_string(kind);
    } catch (const ArgumentError& e) {
        throw ConfigError(std::string("mask: ") + e.what());
    }
    return m;
}

json to_json(const MaskSpec& m) {
    return json{{"kind", to_string(m.kind)},     {"period", m.period},
                {"stripe_width", m.stripe_width}, {"phase", m.phase},
                {"center_band", m.slc.center_band}, {"max_gap", m.slc.max_gap},
                {"slc_period", m.slc.period},    {"angle_deg", m.slc.angle_deg},
                {"slc_phase", m.slc.phase},      {"coverage", m.coverage},
                {"smoothness", m.smoothness}};
}

DatasetSpec dataset_from_json(const json& j, DatasetSpec d) {
    ObjectReader r(j, "dataset");
    r.optional("bands", d.bands);
    r.optional("height", d.height);
    r.optional("width", d.width);
    std::string relation = to_string(d.relation);
    r.optional("relation", relation);
    r.optional("train_scenes", d.train_scenes);
    r.optional("test_seed_offset", d.test_seed_offset);
    r.finish();
    try {
        d.relation = relation_from_string(relation);
    } catch (const ArgumentError& e) {
        throw ConfigError(std::string("dataset: ") + e.what());
    }
    if (d.bands < 2 || d.height < 1 || d.width < 1) throw ConfigError("dataset: needs >= 2 bands and a non-empty scene");
    if (d.train_scenes < 1) throw ConfigError("dataset: train_scenes must be >= 1");
    return d;
}

json to_json(const DatasetSpec& d) {
    return json{{"bands", d.bands},
                {"height", d.height},
                {"width", d.width},
                {"relation", to_string(d.relation)},
                {"train_scenes", d.train_scenes},
                {"test_seed_offset", d.test_seed_offset}};
}

} // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("experiment config: ") + e.what());
    }
    ExperimentConfig cfg = desk_experiment_config();
    ObjectReader r(j, "config");
    r.optional("seeds", cfg.seeds);
    r.optional("output_dir", cfg.output_dir);
    if (r.has("dataset")) cfg.dataset = dataset_from_json(r.child("dataset"), cfg.dataset);
    if (r.has("mask")) cfg.mask = mask_from_json(r.child("mask"), cfg.mask);
    if (r.has("network")) cfg.network = detail::network_config_from_json(r.child("network"), "network", cfg.network);
    if (r.has("train")) cfg.train = detail::train_config_from_json(r.child("train"), "train", cfg.train);
    std::string scope = to_string(cfg.scope);
    r.optional("scope", scope);
    r.optional("data_range", cfg.data_range);
    r.optional("shifts", cfg.shifts);
    r.finish();
    try {
        cfg.scope = scope_from_string(scope);
    } catch (const ArgumentError& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (cfg.seeds.empty()) throw ConfigError("config: seeds must not be empty");
    if (!(cfg.data_range > 0.0)) throw ConfigError("config: data_range must be > 0");
    if (cfg.network.input_bands != cfg.dataset.bands) {
        throw ConfigError("config: network.input_bands (" + std::to_string(cfg.network.input_bands) +
                          ") differs from dataset.bands (" + std::to_string(cfg.dataset.bands) + ")");
    }
    for (int s : cfg.shifts) {
        if (std::abs(s) > 5) throw ConfigError("config: shifts must lie within [-5, 5]");
    }
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_experiment_config(ss.str());
}

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
    const json j{{"seeds", cfg.seeds},
                 {"output_dir", cfg.output_dir},
                 {"dataset", to_json(cfg.dataset)},
                 {"mask", to_json(cfg.mask)},
                 {"network", detail::to_json(cfg.network)},
                 {"train", detail::to_json(cfg.train)},
                 {"scope", to_string(cfg.scope)},
                 {"data_range", cfg.data_range},
                 {"shifts", cfg.shifts}};
    return j.dump(2);
}

ExperimentData build_experiment_data(const ExperimentConfig& cfg, std::uint64_t seed) {
    const auto& d = cfg.dataset;
    ExperimentData data;
    for (int k = 0; k < d.train_scenes; ++k) {
        const std::uint64_t s = seed + static_cast<std::uint64_t>(k);
        SyntheticScene scene = synth_scene(d.bands, d.height, d.width, s, d.relation);
        Mask mask = make_mask(cfg.mask, d.height, d.width, s);
        data.scenes.push_back(make_sample(std::move(scene.x), std::move(scene.y2), std::move(mask)));
        auto patches = extract_patches(data.scenes.back(), cfg.train.patch_size, cfg.train.patch_stride);
        for (auto& p : patches) data.patches.push_back(std::move(p));
    }
    const std::uint64_t ts = seed + d.test_seed_offset;
    SyntheticScene test = synth_scene(d.bands, d.height, d.width, ts, d.relation);
    data.test = make_sample(std::move(test.x), std::move(test.y2), make_mask(cfg.mask, d.height, d.width, ts));
    return data;
}

namespace {

const Mask* scope_mask(const ExperimentConfig& cfg, const TrainingSample& s) {
    return cfg.scope == MetricScope::gap_only ? &s.mask : nullptr;
}

} // namespace

MetricsReport evaluate_model(const NetworkParams<double>& params, const TrainingSample& test,
                             const ExperimentConfig& cfg, int shift) {
    const Tensor4 y2 = shift == 0 ? test.y2 : shift_image(test.y2, shift, 0);
    const Tensor4 xhat = reconstruct(params, test.y1, y2, test.mask, ValueRange{0.0, cfg.data_range});
    return evaluate_metrics(test.x, xhat, cfg.data_range, cfg.scope, scope_mask(cfg, test));
}

MetricsReport evaluate_baseline(const std::string& method, const TrainingSample& test,
                                const ExperimentConfig& cfg, int shift) {
    const Tensor4 y2 = shift == 0 ? test.y2 : shift_image(test.y2, shift, 0);
    Tensor4 xhat;
    if (method == "lf") {
        xhat = lf_reconstruct(test.y1, y2, test.mask);
    } else if (method == "copy_fill") {
        xhat = copy_fill(test.y1, y2, test.mask);
    } else {
        throw ArgumentError("unknown baseline '" + method + "' (expected lf or copy_fill)");
    }
    return evaluate_metrics(test.x, xhat, cfg.data_range, cfg.scope, scope_mask(cfg, test));
}

std::vector<AblationVariant> ablation_variants(const NetworkConfig& base) {
    std::vector<AblationVariant> out;
    out.push_back({"full", base});
    NetworkConfig c = base;
    c.multiscale = false;
    out.push_back({"no_multiscale", c});
    c = base;
    c.dilations.assign(base.dilations.size(), 1);
    out.push_back({"no_dilation", c});
    c = base;
    c.boost = false;
    out.push_back({"no_boost", c});
    return out;
}

std::vector<AblationRow> run_ablation(const ExperimentConfig& cfg, const Logger& log) {
    std::vector<AblationRow> rows;
    for (std::uint64_t seed : cfg.seeds) {
        const ExperimentData data = build_experiment_data(cfg, seed);
        for (const auto& v : ablation_variants(cfg.network)) {
            TrainConfig tc = cfg.train;
            tc.seed = seed;
            tc.checkpoint_dir.clear();
            const TrainResult res = train(data.patches, tc, v.config);
            const MetricsReport rep = evaluate_model(res.params, data.test, cfg);
            AblationRow row;
            row.variant = v.name;
            row.seed = seed;
            row.parameter_count = res.params.parameter_count();
            row.receptive_field = stack_receptive_field(std::vector<int>(v.config.dilations.size(), 3), v.config.dilations);
            row.mpsnr = rep.mpsnr;
            row.mssim = rep.mssim;
            if (log) {
                log("ablation seed " + std::to_string(seed) + " " + v.name + ": mpsnr " + format_double(rep.mpsnr) +
                    " dB, " + std::to_string(row.parameter_count) + " parameters");
            }
            rows.push_back(row);
        }
    }
    return rows;
}

void write_ablation_csv(const std::string& path, const std::vector<AblationRow>& rows) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << kAblationCsvHeader << '\n';
    for (const auto& r : rows) {
        out << r.variant << ',' << r.seed << ',' << r.parameter_count << ',' << r.receptive_field << ','
            << format_double(r.mpsnr) << ',' << format_double(r.mssim) << '\n';
    }
}

std::vector<MetricsRow> run_regsweep(const ExperimentConfig& cfg, const NetworkParams<double>& params,
                                     std::uint64_t seed) {
    const ExperimentData data = build_experiment_data(cfg, seed);
    std::vector<MetricsRow> rows;
    const auto s = static_cast<long long>(seed);
    for (int shift : cfg.shifts) rows.push_back(summary_row(evaluate_model(params, data.test, cfg, shift), "sts_cnn", shift, s));
    for (const char* m : {"lf", "copy_fill"}) {
        for (int shift : cfg.shifts) rows.push_back(summary_row(evaluate_baseline(m, data.test, cfg, shift), m, shift, s));
    }
    return rows;
}

namespace {

std::uint64_t relu_pattern(const ForwardCache<double>& c) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](const Tensor4& t) {
        for (double v : t.data()) {
            h ^= v > 0.0 ? 1U : 0U;
            h *= 1099511628211ULL;
        }
    };
    mix(c.f1);
    mix(c.f2);
    for (const auto& t : c.ms) mix(t);
    mix(c.boost);
    for (const auto& t : c.dil_out) mix(t);
    return h;
}

} // namespace

GradCheckResult gradient_check(const NetworkConfig& cfg, int height, int width, std::uint64_t seed, double step) {
    cfg.validate();
    NetworkParams<double> p = build_network(cfg, seed);
    std::mt19937_64 rng(seed + 1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> small(0.0, 0.1);
    for (auto& l : p.layers) {
        for (auto& b : l.biases) b = small(rng);
    }
    const Shape shape{1, cfg.input_bands, height, width};
    Tensor4 x(shape), y2(shape);
    for (auto& v : x.data()) v = u(rng);
    for (auto& v : y2.data()) v = u(rng);
    Mask mask(height, width);
    for (int y = 0; y < height; ++y) {
        for (int q = 0; q < width; ++q) mask.set(y, q, u(rng) > 0.3);
    }
    const Tensor4 y1 = apply_mask(x, mask);

    ForwardCache<double> cache;
    forward(p, y1, y2, mask, &cache);
    const GradientSet<double> g = backward(p, cache, y1, x);

    std::uint64_t pattern = 0;
    auto loss = [&] {
        ForwardCache<double> c;
        const Tensor4 r = forward(p, y1, y2, mask, &c);
        pattern = relu_pattern(c);
        return loss_mse(r, y1, x).value;
    };
    auto numeric = [&](double& slot) {
        const double saved = slot;
        loss();
        const std::uint64_t base = pattern;
        double h = step;
        double result = 0.0;
        for (int attempt = 0; attempt < 6; ++attempt, h *= 0.1) {
            slot = saved + h;
            const double fp = loss();
            const bool same_p = pattern == base;
            slot = saved - h;
            const double fm = loss();
            const bool same_m = pattern == base;
            slot = saved;
            result = (fp - fm) / (2.0 * h);
            if (same_p && same_m) break;
        }
        return result;
    };
    auto rel = [](double a, double n) {
        return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-7});
    };

    GradCheckResult out;
    for (std::size_t k = 0; k < p.layers.size(); ++k) {
        auto& l = p.layers[k];
        for (std::size_t i = 0; i < l.weights.size(); ++i) {
            const double e = rel(g.layers[k].weights[i], numeric(l.weights[i]));
            if (e > out.max_relative_error) {
                out.max_relative_error = e;
                out.worst_layer = l.name;
            }
            ++out.checked;
        }
        for (std::size_t i = 0; i < l.biases.size(); ++i) {
            const double e = rel(g.layers[k].biases[i], numeric(l.biases[i]));
            if (e > out.max_relative_error) {
                out.max_relative_error = e;
                out.worst_layer = l.name;
            }
            ++out.checked;
        }
    }
    return out;
}

} // namespace stscnn
