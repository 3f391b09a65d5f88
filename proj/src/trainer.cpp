#include "stscnn/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>

#include "stscnn/checkpoint.hpp"
#include "stscnn/sgd.hpp"

namespace stscnn {

std::string to_string(Precision p) { return p == Precision::f32 ? "f32" : "f64"; }

Precision precision_from_string(const std::string& name) {
    if (name == "f32" || name == "float32") return Precision::f32;
    if (name == "f64" || name == "float64") return Precision::f64;
    throw ArgumentError("unknown precision '" + name + "' (expected f32 or f64)");
}

std::string to_string(LossNormalization n) { return n == LossNormalization::sample ? "sample" : "pixel"; }

LossNormalization loss_normalization_from_string(const std::string& name) {
    if (name == "sample") return LossNormalization::sample;
    if (name == "pixel") return LossNormalization::pixel;
    throw ArgumentError("unknown loss normalization '" + name + "' (expected sample or pixel)");
}

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
    if (!(base_lr > 0.0)) throw ConfigError("train: base_lr must be > 0");
    if (!(decline > 0.0 && decline <= 1.0)) throw ConfigError("train: decline must lie in (0, 1]");
    if (decline_every < 1) throw ConfigError("train: decline_every must be >= 1");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("train: momentum must lie in [0, 1)");
    if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
    if (patch_size < 1) throw ConfigError("train: patch_size must be >= 1");
    if (patch_stride < 1) throw ConfigError("train: patch_stride must be >= 1");
    if (checkpoint_every < 1) throw ConfigError("train: checkpoint_every must be >= 1");
    if (max_iterations && *max_iterations < 1) throw ConfigError("train: max_iterations must be >= 1");
}

double lr_at(int epoch, const TrainConfig& cfg) {
    if (epoch < 0 || epoch >= cfg.epochs) {
        throw ArgumentError("lr_at: epoch " + std::to_string(epoch) + " outside [0, " +
                            std::to_string(cfg.epochs) + ")");
    }
    return cfg.base_lr * std::pow(cfg.decline, epoch / cfg.decline_every);
}

namespace {

Tensor4 crop(const Tensor4& t, int y0, int x0, int size) {
    Tensor4 out(Shape{t.n(), t.c(), size, size});
    for (int n = 0; n < t.n(); ++n) {
        for (int c = 0; c < t.c(); ++c) {
            for (int y = 0; y < size; ++y) {
                const double* src = &t(n, c, y0 + y, x0);
                std::copy(src, src + size, &out(n, c, y, 0));
            }
        }
    }
    return out;
}

Mask crop(const Mask& m, int y0, int x0, int size) {
    Mask out(size, size);
    for (int y = 0; y < size; ++y) {
        for (int x = 0; x < size; ++x) out.set(y, x, m.valid(y0 + y, x0 + x));
    }
    return out;
}

} // namespace

std::vector<TrainingSample> extract_patches(const TrainingSample& scene, int size, int stride,
                                            std::size_t* dropped) {
    const Shape& s = scene.x.shape();
    require_same_shape(s, scene.y1.shape(), "extract_patches: x vs y1");
    require_same_shape(s, scene.y2.shape(), "extract_patches: x vs y2");
    require_mask_fits(scene.mask, s, "extract_patches");
    if (size < 1 || stride < 1) throw ArgumentError("extract_patches: size and stride must be >= 1");
    if (size > s.h || size > s.w) {
        throw ArgumentError("extract_patches: patch size " + std::to_string(size) +
                            " exceeds scene " + std::to_string(s.h) + "x" + std::to_string(s.w));
    }
    std::vector<TrainingSample> out;
    std::size_t skipped = 0;
    for (int y0 = 0; y0 + size <= s.h; y0 += stride) {
        for (int x0 = 0; x0 + size <= s.w; x0 += stride) {
            Mask m = crop(scene.mask, y0, x0, size);
            if (m.missing_count() == m.size()) {
                ++skipped;
                continue;
            }
            out.push_back(TrainingSample{crop(scene.x, y0, x0, size), crop(scene.y1, y0, x0, size),
                                         crop(scene.y2, y0, x0, size), std::move(m)});
        }
    }
    if (dropped) *dropped = skipped;
    return out;
}

namespace {

template <typename T>
struct Prepared {
    Tensor<T> x, y1, y2;
    const Mask* mask;
};

template <typename T>
std::vector<Prepared<T>> prepare(const std::vector<TrainingSample>& data, int bands) {
    std::vector<Prepared<T>> out;
    out.reserve(data.size());
    for (const auto& s : data) {
        require_same_shape(s.x.shape(), s.y1.shape(), "train: x vs y1");
        require_same_shape(s.x.shape(), s.y2.shape(), "train: x vs y2");
        require_mask_fits(s.mask, s.x.shape(), "train");
        if (s.x.c() != bands) {
            throw ShapeError("train: sample has " + std::to_string(s.x.c()) +
                             " bands, network expects " + std::to_string(bands));
        }
        out.push_back({s.x.cast<T>(), s.y1.cast<T>(), s.y2.cast<T>(), &s.mask});
    }
    return out;
}

void write_checkpoint(const TrainConfig& cfg, const std::string& tag, const NetworkParams<double>& p) {
    if (cfg.checkpoint_dir.empty()) return;
    save_checkpoint(p, (std::filesystem::path(cfg.checkpoint_dir) / tag).string());
}

std::string epoch_tag(int epoch) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "epoch_%04d", epoch);
    return buf;
}

template <typename T>
TrainResult run(const std::vector<TrainingSample>& dataset, const TrainConfig& cfg,
                const NetworkParams<double>& initial, const EpochCallback& on_epoch) {
    NetworkParams<T> params = initial.template cast<T>();
    const auto data = prepare<T>(dataset, initial.config.input_bands);
    auto velocity = zero_velocity<T>(params.layers);

    std::mt19937_64 order_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    TrainResult result;
    bool stop = false;
    int last_saved = -1;
    for (int epoch = 0; epoch < cfg.epochs && !stop; ++epoch) {
        for (std::size_t i = order.size(); i > 1; --i) {
            std::uniform_int_distribution<std::size_t> pick(0, i - 1);
            std::swap(order[i - 1], order[pick(order_rng)]);
        }
        const double lr = lr_at(epoch, cfg);
        double loss_sum = 0.0;
        int batches = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t end = std::min(order.size(), start + cfg.batch_size);
            auto grads = GradientSet<T>::zeros_like(params);
            double batch_loss = 0.0;
            for (std::size_t k = start; k < end; ++k) {
                const auto& s = data[order[k]];
                ForwardCache<T> cache;
                const Tensor<T> r_hat = forward(params, s.y1, s.y2, *s.mask, &cache);
                batch_loss += loss_mse(r_hat, s.y1, s.x).value;
                auto g = backward(params, cache, s.y1, s.x);
                if (cfg.loss_normalization == LossNormalization::pixel) {
                    g.scale(static_cast<T>(1.0 / static_cast<double>(s.x.size())));
                }
                grads.accumulate(g);
            }
            const double count = static_cast<double>(end - start);
            batch_loss /= count;
            if (!std::isfinite(batch_loss)) {
                std::string where = cfg.checkpoint_dir.empty() || last_saved < 0
                                        ? std::string("no checkpoint written")
                                        : "last good checkpoint " + epoch_tag(last_saved);
                throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) +
                                   " (" + where + ")");
            }
            grads.scale(static_cast<T>(1.0 / count));
            sgd_step<T>(params.layers, grads.layers, static_cast<T>(lr), static_cast<T>(cfg.momentum),
                        velocity);
            loss_sum += batch_loss;
            ++batches;
            ++result.iterations;
            if (cfg.max_iterations && result.iterations >= *cfg.max_iterations) {
                stop = true;
                break;
            }
        }
        EpochRecord rec{epoch, lr, loss_sum / batches};
        result.trace.push_back(rec);
        if ((epoch + 1) % cfg.checkpoint_every == 0) {
            write_checkpoint(cfg, epoch_tag(epoch + 1), params.template cast<double>());
            last_saved = epoch + 1;
        }
        if (on_epoch && !on_epoch(rec)) stop = true;
    }
    result.params = params.template cast<double>();
    write_checkpoint(cfg, "final", result.params);
    return result;
}

} // namespace

TrainResult train(const std::vector<TrainingSample>& dataset, const TrainConfig& cfg,
                  NetworkParams<double> initial, const EpochCallback& on_epoch) {
    cfg.validate();
    initial.config.validate();
    if (dataset.empty()) throw ArgumentError("train: empty dataset");
    if (cfg.precision == Precision::f32) return run<float>(dataset, cfg, initial, on_epoch);
    return run<double>(dataset, cfg, initial, on_epoch);
}

TrainResult train(const std::vector<TrainingSample>& dataset, const TrainConfig& cfg,
                  const NetworkConfig& net_config, const EpochCallback& on_epoch) {
    net_config.validate();
    return train(dataset, cfg, build_network(net_config, cfg.seed), on_epoch);
}

} // namespace stscnn
