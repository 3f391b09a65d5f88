#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stscnn/network.hpp"

namespace stscnn {

enum class Precision { f32, f64 };

/// How the per-batch loss gradient is scaled before the SGD step.
/// `sample`: gradient of (1/2N) sum ||r_hat - r||^2, the loss as written.
/// `pixel`: the same divided by the number of elements per sample (B*H*W),
/// which keeps the step size independent of patch geometry.
enum class LossNormalization { sample, pixel };

std::string to_string(Precision p);
Precision precision_from_string(const std::string& name);
std::string to_string(LossNormalization n);
LossNormalization loss_normalization_from_string(const std::string& name);

struct TrainConfig {
    int epochs = 100;
    double base_lr = 0.01;
    double decline = 0.1;
    int decline_every = 20;
    double momentum = 0.9;
    int batch_size = 8;
    int patch_size = 40;
    int patch_stride = 40;
    std::uint64_t seed = 0;
    Precision precision = Precision::f32;
    LossNormalization loss_normalization = LossNormalization::pixel;
    /// Stop after this many SGD steps even if epochs remain.
    std::optional<long long> max_iterations;
    int checkpoint_every = 10;
    /// Checkpoints go to <dir>/epoch_XXXX and <dir>/final when non-empty.
    std::string checkpoint_dir;

    void validate() const;
};

/// base_lr * decline ^ floor(epoch / decline_every).
double lr_at(int epoch, const TrainConfig& cfg);

/// Joint grid crops of x, y1, y2 and mask. Patches whose mask is entirely
/// missing are dropped; their number is written to `dropped` when given.
std::vector<TrainingSample> extract_patches(const TrainingSample& scene, int size, int stride,
                                            std::size_t* dropped = nullptr);

struct EpochRecord {
    int epoch = 0;
    double lr = 0.0;
    double mean_loss = 0.0;  // mean over batches of the (1/2N) sum-of-squares loss
};

struct TrainResult {
    NetworkParams<double> params;
    std::vector<EpochRecord> trace;
    long long iterations = 0;
};

/// Called after every epoch; return false to stop early.
using EpochCallback = std::function<bool(const EpochRecord&)>;

/// Seeded minibatch SGD. The network is initialised from cfg.seed, and the
/// sample order is reshuffled (Fisher-Yates) every epoch.
TrainResult train(const std::vector<TrainingSample>& dataset, const TrainConfig& cfg,
                  const NetworkConfig& net_config, const EpochCallback& on_epoch = {});

/// Same, continuing from existing parameters.
TrainResult train(const std::vector<TrainingSample>& dataset, const TrainConfig& cfg,
                  NetworkParams<double> initial, const EpochCallback& on_epoch = {});

} // namespace stscnn
